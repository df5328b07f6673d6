#include "powermeter/export.hpp"

#include <unistd.h>

#include <charconv>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "powermeter/errors.hpp"

namespace fs = std::filesystem;

namespace powermeter {

namespace {

struct RawCsv {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawCsv read_raw(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    RawCsv out;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto body = std::string_view(line).substr(1);
            if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            const auto colon = body.find(": ");
            if (colon != std::string_view::npos)
                out.meta.emplace_back(std::string(body.substr(0, colon)), std::string(body.substr(colon + 2)));
            continue;
        }
        auto cells = csv::split(line);
        if (!have_header) {
            out.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != out.header.size())
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(out.header.size()) + " fields, got " + std::to_string(cells.size()));
            out.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw ParseError(path.string() + ": no header line");
    return out;
}

SessionMetadata parse_meta(const RawCsv& raw) {
    SessionMetadata m;
    for (const auto& [k, v] : raw.meta) {
        if (k == "start_time") {
            m.start_time = v;
        } else if (k == "interval_ms") {
            m.interval_ms = static_cast<long>(csv::parse_double(v));
        } else if (k == "host") {
            m.host = v;
        } else if (k == "methods") {
            std::string_view rest = v;
            while (!rest.empty()) {
                const auto c = rest.find(',');
                m.methods.emplace_back(rest.substr(0, c));
                rest = c == std::string_view::npos ? std::string_view{} : rest.substr(c + 1);
            }
        }
    }
    return m;
}

std::string meta_lines(const SessionMetadata& m) {
    std::string methods;
    for (const auto& name : m.methods) methods += (methods.empty() ? "" : ",") + name;
    std::ostringstream os;
    os << "# start_time: " << m.start_time << "\n"
       << "# interval_ms: " << m.interval_ms << "\n"
       << "# methods: " << methods << "\n"
       << "# host: " << m.host << "\n";
    return os.str();
}

std::string opt_cell(const std::optional<double>& v) { return v ? csv::format17(*v) : std::string(); }

std::optional<double> opt_parse(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return csv::parse_double(s);
}

std::size_t parse_count(const std::string& s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("not a count: '" + s + "'");
    return v;
}

std::string iso_local(std::chrono::system_clock::time_point tp, const char* fmt) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    localtime_r(&tt, &tm);
    char buf[64];
    const auto n = std::strftime(buf, sizeof buf, fmt, &tm);
    return std::string(buf, n);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << content;
    f.flush();
    if (!f) throw IoError("write failed: " + path.string());
}

} // namespace

std::string local_hostname() {
    char buf[256] = {};
    if (gethostname(buf, sizeof buf - 1) != 0) return "localhost";
    return buf;
}

SessionExport make_export(const Session& session, std::string host) {
    SessionExport ex;
    ex.meta.start_time = iso_local(session.started_at(), "%Y-%m-%dT%H:%M:%S");
    ex.meta.interval_ms = static_cast<long>(session.interval().count());
    ex.meta.methods = session.method_names();
    ex.meta.host = std::move(host);
    for (const auto& series : session.series())
        for (const auto& s : series.samples()) ex.power.push_back({s.round, series.channel(), s.t, s.watts});
    ex.energy = session.report();
    return ex;
}

std::vector<PowerSeries> to_series(std::span<const PowerRow> rows) {
    std::vector<PowerSeries> out;
    std::map<ChannelId, std::size_t> index;
    for (const auto& r : rows) {
        auto [it, inserted] = index.try_emplace(r.channel, out.size());
        if (inserted) out.emplace_back(r.channel);
        out[it->second].append({r.t, r.watts, r.round});
    }
    return out;
}

std::string power_table_csv(const SessionExport& ex) {
    std::string out = meta_lines(ex.meta) + csv::join(kPowerColumns) + "\n";
    for (const auto& r : ex.power)
        out += csv::join({std::to_string(r.round), r.channel.method, r.channel.device, csv::format17(r.t),
                          csv::format17(r.watts)}) +
               "\n";
    return out;
}

std::string energy_table_csv(const SessionExport& ex) {
    std::string out = meta_lines(ex.meta) + csv::join(kEnergyColumns) + "\n";
    for (const auto& r : ex.energy)
        out += csv::join({r.channel.method, r.channel.device, opt_cell(r.energy_wh), opt_cell(r.mean_w),
                          opt_cell(r.max_w), opt_cell(r.duration_s), std::to_string(r.samples),
                          std::to_string(r.gaps)}) +
               "\n";
    return out;
}

std::vector<fs::path> export_tables(const SessionExport& ex, const fs::path& dir, std::string_view filetype,
                                    std::string_view suffix, bool force) {
    if (filetype == "h5") throw UsageError("filetype 'h5' is not built in this configuration (supported: csv)");
    if (filetype != "csv") throw UsageError("unknown filetype '" + std::string(filetype) + "' (supported: csv)");

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

    const std::vector<fs::path> paths = {dir / ("power" + std::string(suffix) + ".csv"),
                                         dir / ("energy" + std::string(suffix) + ".csv")};
    if (!force)
        for (const auto& p : paths)
            if (fs::exists(p)) throw CollisionError(p.string() + " exists (use --force to overwrite)");

    write_file(paths[0], power_table_csv(ex));
    write_file(paths[1], energy_table_csv(ex));
    return paths;
}

PowerTable read_power_table(const fs::path& path) {
    const auto raw = read_raw(path);
    if (raw.header != kPowerColumns) throw ParseError(path.string() + ": not a power table");
    PowerTable t;
    t.meta = parse_meta(raw);
    for (const auto& r : raw.rows)
        t.rows.push_back({parse_count(r[0]), {r[1], r[2]}, csv::parse_double(r[3]), csv::parse_double(r[4])});
    return t;
}

EnergyTable read_energy_table(const fs::path& path) {
    const auto raw = read_raw(path);
    if (raw.header != kEnergyColumns) throw ParseError(path.string() + ": not an energy table");
    EnergyTable t;
    t.meta = parse_meta(raw);
    for (const auto& r : raw.rows) {
        EnergyRow row;
        row.channel = {r[0], r[1]};
        row.energy_wh = opt_parse(r[2]);
        row.mean_w = opt_parse(r[3]);
        row.max_w = opt_parse(r[4]);
        row.duration_s = opt_parse(r[5]);
        row.samples = parse_count(r[6]);
        row.gaps = parse_count(r[7]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string render_suffix(std::string_view tpl, const SuffixContext& ctx) {
    std::string out;
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] != '%') {
            out += tpl[i];
            continue;
        }
        if (i + 1 == tpl.size()) throw UsageError("dangling '%' in suffix (supported: %h %p %t %%)");
        switch (tpl[++i]) {
        case 'h': out += ctx.hostname; break;
        case 'p': out += std::to_string(ctx.pid); break;
        case 't': out += iso_local(ctx.start, "%Y%m%d-%H%M%S"); break;
        case '%': out += '%'; break;
        default:
            throw UsageError(std::string("unknown suffix placeholder '%") + tpl[i] + "' (supported: %h %p %t %%)");
        }
    }
    return out;
}

ResultTable merge_energy_tables(std::span<const fs::path> files) {
    ResultTable out;
    out.columns.push_back("source");
    out.columns.insert(out.columns.end(), kEnergyColumns.begin(), kEnergyColumns.end());

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& file : files) {
        RawCsv raw;
        try {
            raw = read_raw(file);
        } catch (const Error& e) {
            throw MergeError(file.string() + ": " + e.what());
        }
        if (raw.header != kEnergyColumns) throw MergeError(file.string() + ": energy table schema mismatch");

        const std::string stem = file.stem().string();
        std::string source;
        if (stem.rfind("energy", 0) == 0) {
            source = stem.substr(6);
            while (!source.empty() && (source[0] == '_' || source[0] == '-' || source[0] == '.')) source.erase(0, 1);
        }
        if (source.empty()) source = parse_meta(raw).host;
        if (source.empty()) source = stem;

        for (const auto& r : raw.rows) {
            if (!seen.emplace(source, r[0], r[1]).second)
                throw MergeError(file.string() + ": duplicate row for source '" + source + "' channel " + r[0] + ":" +
                                 r[1]);
            std::vector<std::string> row{source};
            row.insert(row.end(), r.begin(), r.end());
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

} // namespace powermeter

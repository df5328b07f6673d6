#include "powermeter/sweep.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "powermeter/errors.hpp"
#include "powermeter/export.hpp"

namespace fs = std::filesystem;

namespace powermeter {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

struct Placeholder {
    std::size_t begin;   // offset of '$'
    std::size_t end;     // one past '}'
    std::string name;
    std::size_t line;
};

// All ${name} occurrences in order. Throws MissingBinding on a malformed one.
std::vector<Placeholder> scan_placeholders(std::string_view tpl) {
    std::vector<Placeholder> out;
    std::size_t line = 1;
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] == '\n') ++line;
        if (tpl[i] != '$' || i + 1 >= tpl.size() || tpl[i + 1] != '{') continue;
        const auto close = tpl.find('}', i + 2);
        if (close == std::string_view::npos)
            throw MissingBinding("unterminated placeholder on template line " + std::to_string(line));
        const std::string name(tpl.substr(i + 2, close - i - 2));
        if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char))
            throw MissingBinding("malformed placeholder '${" + name + "}' on template line " + std::to_string(line));
        out.push_back({i, close + 1, name, line});
        i = close;
    }
    return out;
}

ValueList scalar_or_list(const YAML::Node& node, const std::string& what) {
    ValueList out;
    if (node.IsSequence()) {
        for (const auto& v : node) {
            if (!v.IsScalar()) throw SpecError(what + ": values must be scalars");
            out.push_back(v.as<std::string>());
        }
    } else if (node.IsScalar()) {
        out.push_back(node.as<std::string>());
    } else if (!node.IsNull()) {
        throw SpecError(what + ": expected a value or a list of values");
    }
    return out;
}

NamedLists named_lists(const YAML::Node& node, const std::string& what) {
    NamedLists out;
    if (!node) return out;
    if (!node.IsMap()) throw SpecError(what + " must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!seen.insert(key).second) throw SpecError(what + ": duplicate key " + key);
        out.emplace_back(key, scalar_or_list(kv.second, what + "." + key));
    }
    return out;
}

std::string str_field(const YAML::Node& node, const char* key, std::string fallback) {
    const auto v = node[key];
    if (!v) return fallback;
    if (!v.IsScalar()) throw SpecError(std::string("metrics.") + key + " must be a scalar");
    return v.as<std::string>();
}

} // namespace

ExtractRule::ExtractRule(std::string m, std::string p) : metric(std::move(m)), pattern(std::move(p)) {
    try {
        re = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw SpecError("extract rule '" + metric + "': bad pattern: " + e.what());
    }
    if (re.mark_count() != 1)
        throw SpecError("extract rule '" + metric + "' must have exactly one capture group, has " +
                        std::to_string(re.mark_count()));
}

SweepSpec parse_sweep_spec(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw SpecError(std::string("sweep spec is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw SpecError("sweep spec must be a mapping");

    try {
        SweepSpec spec;
        spec.name = root["name"] ? root["name"].as<std::string>() : "sweep";
        spec.parameters = named_lists(root["parameters"], "parameters");

        if (const auto tags = root["tags"]) {
            if (!tags.IsMap()) throw SpecError("tags must be a mapping");
            for (const auto& kv : tags) {
                const auto tag = kv.first.as<std::string>();
                spec.tags.emplace_back(tag, kv.second.IsNull() ? NamedLists{} : named_lists(kv.second, "tags." + tag));
            }
        }

        if (const auto platform = root["platform"]) {
            if (!platform.IsMap()) throw SpecError("platform must be a mapping");
            for (const auto& kv : platform) {
                if (!kv.second.IsScalar()) throw SpecError("platform." + kv.first.as<std::string>() + " must be a scalar");
                spec.platform.emplace_back(kv.first.as<std::string>(), kv.second.as<std::string>());
            }
        }

        if (!root["template"] || !root["template"].IsScalar()) throw SpecError("sweep spec needs a template");
        spec.job_template = root["template"].as<std::string>();

        if (const auto extract = root["extract"]) {
            if (!extract.IsSequence()) throw SpecError("extract must be a list");
            for (const auto& rule : extract) {
                if (!rule["metric"] || !rule["pattern"]) throw SpecError("extract rules need metric and pattern");
                spec.extract.emplace_back(rule["metric"].as<std::string>(), rule["pattern"].as<std::string>());
            }
        }

        if (const auto m = root["metrics"]) {
            if (!m.IsMap()) throw SpecError("metrics must be a mapping");
            MetricsMapping mm;
            try {
                mm.convention = parse_convention(str_field(m, "convention", "gpu-tokens"));
            } catch (const DomainError& e) {
                throw SpecError(e.what());
            }
            mm.global_batch_size = str_field(m, "global_batch_size", "");
            mm.sequence_length = str_field(m, "sequence_length", mm.sequence_length);
            mm.elapsed_ms = str_field(m, "elapsed_ms", "");
            mm.devices = str_field(m, "devices", mm.devices);
            mm.micro_batch_size = str_field(m, "micro_batch_size", mm.micro_batch_size);
            mm.dp_degree = str_field(m, "dp_degree", mm.dp_degree);
            mm.processed = str_field(m, "processed", "");
            if (mm.global_batch_size.empty() || mm.elapsed_ms.empty())
                throw SpecError("metrics needs global_batch_size and elapsed_ms");
            spec.metrics = mm;
        }

        // Every placeholder must name a parameter (declared or tag-enabled) or
        // a platform constant, and the two namespaces must not overlap.
        std::set<std::string> names;
        for (const auto& [p, _] : spec.parameters) names.insert(p);
        for (const auto& [_, overrides] : spec.tags)
            for (const auto& [p, __] : overrides) names.insert(p);
        for (const auto& [c, _] : spec.platform)
            if (!names.insert(c).second) throw SpecError("platform constant '" + c + "' shadows a parameter");
        std::set<std::string> metric_names;
        for (const auto& r : spec.extract)
            if (!metric_names.insert(r.metric).second) throw SpecError("duplicate extract metric " + r.metric);

        try {
            for (const auto& ph : scan_placeholders(spec.job_template))
                if (!names.count(ph.name))
                    throw SpecError("template line " + std::to_string(ph.line) + ": '${" + ph.name +
                                    "}' is not a parameter or platform constant");
        } catch (const MissingBinding& e) {
            throw SpecError(e.what());
        }
        return spec;
    } catch (const YAML::Exception& e) {
        throw SpecError(std::string("sweep spec: ") + e.what());
    }
}

SweepSpec load_sweep_spec(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read sweep spec " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return parse_sweep_spec(os.str());
}

std::string_view to_string(RunStatus s) {
    switch (s) {
    case RunStatus::pending: return "pending";
    case RunStatus::running: return "running";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
    }
    return "?";
}

std::vector<RunInstance> expand_permutations(const SweepSpec& spec, std::span<const std::string> tags) {
    NamedLists active = spec.parameters;
    for (const auto& tag : tags) {
        const auto it = std::find_if(spec.tags.begin(), spec.tags.end(), [&](const auto& t) { return t.first == tag; });
        if (it == spec.tags.end()) {
            std::string known;
            for (const auto& t : spec.tags) known += (known.empty() ? "" : ", ") + t.first;
            throw UnknownTag("unknown tag '" + tag + "' (known: " + known + ")");
        }
        for (const auto& [name, values] : it->second) {
            auto p = std::find_if(active.begin(), active.end(), [&](const auto& a) { return a.first == name; });
            if (p == active.end())
                active.emplace_back(name, values);
            else
                p->second = values;
        }
    }
    for (const auto& [name, values] : active)
        if (values.empty()) throw EmptySweep("parameter '" + name + "' has no values");

    std::vector<std::string> order;
    for (const auto& [name, _] : active) order.push_back(name);

    std::vector<RunInstance> out;
    std::vector<std::size_t> idx(active.size(), 0);
    for (int id = 0;; ++id) {
        RunInstance run;
        run.id = id;
        run.parameter_order = order;
        for (std::size_t p = 0; p < active.size(); ++p) run.bindings[active[p].first] = active[p].second[idx[p]];
        out.push_back(std::move(run));

        // Odometer: the last parameter varies fastest.
        std::size_t p = active.size();
        while (p > 0) {
            --p;
            if (++idx[p] < active[p].second.size()) break;
            idx[p] = 0;
            if (p == 0) return out;
        }
        if (active.empty()) return out;
    }
}

std::string render_template(std::string_view tpl, const Bindings& bindings) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& ph : scan_placeholders(tpl)) {
        const auto it = bindings.find(ph.name);
        if (it == bindings.end())
            throw MissingBinding("unbound placeholder '" + ph.name + "' on template line " + std::to_string(ph.line));
        out.append(tpl.substr(pos, ph.begin - pos));
        out += it->second;
        pos = ph.end;
    }
    out.append(tpl.substr(pos));
    return out;
}

Bindings template_bindings(const SweepSpec& spec, const RunInstance& run) {
    Bindings b = run.bindings;
    for (const auto& [k, v] : spec.platform) b.emplace(k, v);
    return b;
}

namespace {

std::string script_text(const SweepSpec& spec, const RunInstance& run) {
    auto body = render_template(spec.job_template, template_bindings(spec, run));
    if (body.rfind("#!", 0) != 0) body = "#!/bin/sh\n" + body;
    if (body.empty() || body.back() != '\n') body += '\n';
    return body;
}

fs::path script_name(const RunInstance& run) { return "run_" + std::to_string(run.id) + ".sh"; }

fs::path write_script(const SweepSpec& spec, RunInstance& run, const fs::path& root) {
    run.workdir = root / ("run_" + std::to_string(run.id));
    std::error_code ec;
    fs::create_directories(run.workdir, ec);
    if (ec) throw IoError("cannot create " + run.workdir.string() + ": " + ec.message());
    const auto path = run.workdir / script_name(run);
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + path.string());
        f << script_text(spec, run);
    }
    fs::permissions(path, fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add, ec);
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace

std::vector<fs::path> write_scripts(const SweepSpec& spec, std::vector<RunInstance>& runs, const fs::path& root) {
    std::vector<fs::path> out;
    for (auto& run : runs) out.push_back(write_script(spec, run, root));
    return out;
}

std::vector<RunInstance> execute_local(const SweepSpec& spec, std::vector<RunInstance> runs,
                                       const WrapOptions& prototype, const fs::path& root,
                                       const MethodRegistry& registry) {
    for (auto& run : runs) {
        run.status = RunStatus::running;
        try {
            write_script(spec, run, root);
        } catch (const Error& e) {
            run.status = RunStatus::failed;
            run.reason = e.what();
            continue;
        }

        WrapOptions opts = prototype;
        opts.command = {"/bin/sh", script_name(run).string()};
        opts.workdir = run.workdir;
        opts.df_out = run.workdir;
        opts.stdout_path = run.workdir / "run.log";
        opts.force = true;

        const auto res = run_wrapped(opts, registry);
        run.exit_code = res.exit_code;
        if (res.exports.size() == 2) run.energy_file = res.exports[1];
        if (!res.child_started) {
            run.status = RunStatus::failed;
            run.reason = res.error;
            continue;
        }
        try {
            run.captured = parse_run_log(slurp(*opts.stdout_path), spec.extract);
        } catch (const ParseError& e) {
            run.status = RunStatus::failed;
            run.reason = e.what();
            continue;
        }
        if (res.exit_code != 0) {
            run.status = RunStatus::failed;
            run.reason = "exit code " + std::to_string(res.exit_code);
        } else if (!res.error.empty()) {
            run.status = RunStatus::failed;
            run.reason = res.error;
        } else {
            run.status = RunStatus::done;
        }
    }
    return runs;
}

std::vector<RunInstance> execute_local(const SweepSpec& spec, std::vector<RunInstance> runs,
                                       const WrapOptions& prototype, const fs::path& root) {
    static const MethodRegistry builtins = MethodRegistry::with_builtins();
    return execute_local(spec, std::move(runs), prototype, root, builtins);
}

std::map<std::string, double> parse_run_log(std::string_view log, std::span<const ExtractRule> rules) {
    std::map<std::string, double> out;
    std::size_t lineno = 0;
    while (!log.empty()) {
        ++lineno;
        const auto nl = log.find('\n');
        const std::string line(log.substr(0, nl));
        log = nl == std::string_view::npos ? std::string_view{} : log.substr(nl + 1);

        for (const auto& rule : rules) {
            std::smatch m;
            if (!std::regex_search(line, m, rule.re)) continue;
            try {
                out[rule.metric] = csv::parse_double(m[1].str());
            } catch (const ParseError&) {
                throw ParseError("line " + std::to_string(lineno) + ": metric '" + rule.metric + "' captured '" +
                                 m[1].str() + "', not a number");
            }
        }
    }
    return out;
}

namespace {

std::optional<double> resolve_value(const std::string& ref, const SweepSpec& spec, const RunInstance& run) {
    std::string text;
    if (const auto it = run.bindings.find(ref); it != run.bindings.end()) {
        text = it->second;
    } else if (const auto c = std::find_if(spec.platform.begin(), spec.platform.end(),
                                           [&](const auto& kv) { return kv.first == ref; });
               c != spec.platform.end()) {
        text = c->second;
    } else if (const auto m = run.captured.find(ref); m != run.captured.end()) {
        return m->second;
    } else {
        text = ref;
    }
    try {
        return csv::parse_double(text);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

std::optional<double> total_energy(const fs::path& energy_file) {
    if (energy_file.empty()) return std::nullopt;
    try {
        const auto table = read_energy_table(energy_file);
        std::optional<double> sum;
        for (const auto& r : table.rows)
            if (r.energy_wh) sum = sum.value_or(0.0) + *r.energy_wh;
        return sum;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string cell(const std::optional<double>& v) { return v ? csv::format_shortest(*v) : std::string(); }

} // namespace

ResultTable tabulate(const SweepSpec& spec, std::span<const RunInstance> runs) {
    std::vector<std::string> params;
    if (!runs.empty()) {
        params = runs.front().parameter_order;
    } else {
        for (const auto& [p, _] : spec.parameters) params.push_back(p);
    }

    ResultTable table;
    table.columns.push_back("id");
    table.columns.insert(table.columns.end(), params.begin(), params.end());
    table.columns.push_back("status");
    for (const auto& r : spec.extract) table.columns.push_back(r.metric);
    if (spec.metrics)
        for (const char* c : {"throughput", "throughput_per_device", "energy_wh", "energy_per_device_wh", "efficiency"})
            table.columns.push_back(c);

    for (const auto& run : runs) {
        std::vector<std::string> row{std::to_string(run.id)};
        for (const auto& p : params) {
            const auto it = run.bindings.find(p);
            row.push_back(it == run.bindings.end() ? std::string() : it->second);
        }
        row.emplace_back(to_string(run.status));
        for (const auto& r : spec.extract) {
            const auto it = run.captured.find(r.metric);
            row.push_back(it == run.captured.end() ? std::string() : csv::format_shortest(it->second));
        }

        if (spec.metrics) {
            std::optional<double> thr, thr_dev, energy, energy_dev, eff;
            if (run.status == RunStatus::done) {
                const auto& mm = *spec.metrics;
                const auto gbs = resolve_value(mm.global_batch_size, spec, run);
                const auto seq = resolve_value(mm.sequence_length, spec, run);
                const auto elapsed = resolve_value(mm.elapsed_ms, spec, run);
                const auto devices = resolve_value(mm.devices, spec, run);
                const auto micro = resolve_value(mm.micro_batch_size, spec, run);
                const auto dp = resolve_value(mm.dp_degree, spec, run);
                energy = total_energy(run.energy_file);

                if (gbs && seq && elapsed && devices && micro && dp) {
                    RunMetricsInput in;
                    in.convention = mm.convention;
                    in.global_batch_size = std::llround(*gbs);
                    in.sequence_length = std::llround(*seq);
                    in.elapsed_per_iteration_s = *elapsed / 1000.0;
                    in.device_count = std::llround(*devices);
                    in.micro_batch_size = std::llround(*micro);
                    in.dp_degree = std::llround(*dp);
                    try {
                        thr = throughput(in);
                        thr_dev = per_device(*thr, in.device_count);
                        if (energy) {
                            energy_dev = *energy / static_cast<double>(in.device_count);
                            in.energy_per_device_wh = *energy_dev;
                            std::optional<double> samples =
                                mm.processed.empty() ? gbs : resolve_value(mm.processed, spec, run);
                            if (samples && *energy_dev > 0) {
                                const double units = mm.convention == Convention::gpu_tokens
                                                         ? *samples * static_cast<double>(in.sequence_length)
                                                         : *samples;
                                eff = efficiency_row(in, units).efficiency;
                            }
                        }
                    } catch (const DomainError&) {
                        thr.reset();
                        thr_dev.reset();
                        eff.reset();
                    }
                }
            }
            for (const auto& v : {thr, thr_dev, energy, energy_dev, eff}) row.push_back(cell(v));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace powermeter

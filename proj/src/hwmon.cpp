#include "powermeter/hwmon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <system_error>

#include "powermeter/errors.hpp"

namespace fs = std::filesystem;

namespace powermeter {

namespace {

std::optional<std::string> read_first_line(const fs::path& p) {
    std::ifstream f(p);
    if (!f) return std::nullopt;
    std::string line;
    std::getline(f, line);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r' || line.back() == ' '))
        line.pop_back();
    return line;
}

bool exists_file(const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec);
}

} // namespace

HwmonScan hwmon_enumerate(const fs::path& root) {
    std::error_code ec;
    fs::directory_iterator it(root, ec);
    if (ec) throw IoError("cannot read hwmon root " + root.string() + ": " + ec.message());

    std::vector<std::string> nodes;
    for (const auto& entry : it) {
        const auto name = entry.path().filename().string();
        if (name.rfind("hwmon", 0) != 0) continue;
        std::error_code dir_ec;
        if (fs::is_directory(entry.path(), dir_ec)) nodes.push_back(name);
    }
    std::sort(nodes.begin(), nodes.end());

    HwmonScan scan;
    for (const auto& node : nodes) {
        const fs::path dir = root / node;
        fs::path value;
        for (const char* candidate : {"power1_average", "power1_input"}) {
            if (exists_file(dir / candidate)) {
                value = dir / candidate;
                break;
            }
        }

        auto label = read_first_line(dir / "power1_oem_info");
        if (!label) label = read_first_line(dir / "power1_label");
        const bool power_label = label.has_value();

        if (value.empty()) {
            if (power_label)
                scan.warnings.push_back(node + ": label '" + *label + "' but no power1_average/power1_input, skipped");
            continue;
        }
        if (!label) label = read_first_line(dir / "name");
        if (!label || label->empty()) label = node;

        scan.sensors.push_back(HwmonSensor{root, node, *label, value, 1e6});
    }
    return scan;
}

std::optional<double> hwmon_read(const HwmonSensor& sensor) {
    const auto line = read_first_line(sensor.value_file);
    if (!line || line->empty()) return std::nullopt;
    long long raw = 0;
    const auto res = std::from_chars(line->data(), line->data() + line->size(), raw);
    if (res.ec != std::errc{} || res.ptr != line->data() + line->size() || raw < 0) return std::nullopt;
    return static_cast<double>(raw) / sensor.scale;
}

HwmonMethod::HwmonMethod(fs::path root) {
    auto scan = hwmon_enumerate(root);
    sensors_ = std::move(scan.sensors);
    warnings_ = std::move(scan.warnings);

    std::map<std::string, int> seen;
    for (const auto& s : sensors_) ++seen[s.label];
    for (const auto& s : sensors_) {
        const std::string device = seen[s.label] > 1 ? s.label + " (" + s.node + ")" : s.label;
        channels_.push_back({"gh", device});
    }
}

std::vector<Reading> HwmonMethod::poll(double) {
    std::vector<Reading> out;
    out.reserve(sensors_.size());
    for (const auto& s : sensors_) out.push_back({hwmon_read(s), std::nullopt});
    return out;
}

} // namespace powermeter

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "powermeter/method.hpp"

namespace powermeter {

inline constexpr const char* kDefaultHwmonRoot = "/sys/class/hwmon";

/// A power sensor under a hwmon node. Values in the value file are integers
/// in microwatts (Linux hwmon sysfs ABI); `scale` converts them to watts.
struct HwmonSensor {
    std::filesystem::path root;
    std::string node;   // e.g. "hwmon3"
    std::string label;
    std::filesystem::path value_file;
    double scale = 1e6;
};

struct HwmonScan {
    std::vector<HwmonSensor> sensors;
    std::vector<std::string> warnings;
};

/// Lists every `hwmon*` node below `root` (lexicographic by node name) that
/// exposes power1_average or power1_input. Throws IoError if `root` cannot be
/// read.
HwmonScan hwmon_enumerate(const std::filesystem::path& root);

/// Current power in watts, or nullopt if the value file is missing, not an
/// integer, or negative.
std::optional<double> hwmon_read(const HwmonSensor& sensor);

/// The `gh` method: every hwmon power sensor below a root directory.
class HwmonMethod : public MeasurementMethod {
public:
    explicit HwmonMethod(std::filesystem::path root = kDefaultHwmonRoot);

    std::string name() const override { return "gh"; }
    const std::vector<ChannelId>& channels() const override { return channels_; }
    std::vector<Reading> poll(double t) override;

    const std::vector<HwmonSensor>& sensors() const { return sensors_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::vector<HwmonSensor> sensors_;
    std::vector<std::string> warnings_;
    std::vector<ChannelId> channels_;
};

} // namespace powermeter

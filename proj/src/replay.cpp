#include "powermeter/replay.hpp"

#include <algorithm>

#include "powermeter/export.hpp"

namespace powermeter {

TraceReplay::TraceReplay(std::vector<PowerSeries> recorded)
    : recorded_(std::move(recorded)), cursor_(recorded_.size(), 0) {
    for (const auto& s : recorded_) channels_.push_back(s.channel());
}

TraceReplay TraceReplay::from_file(const std::filesystem::path& power_csv) {
    const auto table = read_power_table(power_csv);
    return TraceReplay(to_series(table.rows));
}

std::vector<Reading> TraceReplay::poll(double) {
    std::vector<Reading> out;
    out.reserve(recorded_.size());
    for (std::size_t c = 0; c < recorded_.size(); ++c) {
        const auto samples = recorded_[c].samples();
        if (cursor_[c] < samples.size()) {
            const auto& s = samples[cursor_[c]++];
            out.push_back({s.watts, s.t});
        } else {
            out.push_back({});
        }
    }
    return out;
}

bool TraceReplay::exhausted() const {
    for (std::size_t c = 0; c < recorded_.size(); ++c)
        if (cursor_[c] < recorded_[c].size()) return false;
    return true;
}

} // namespace powermeter

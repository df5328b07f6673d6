#pragma once

#include <filesystem>
#include <vector>

#include "powermeter/method.hpp"

namespace powermeter {

/// Re-emits a recorded power table. Each poll advances every channel by one
/// recorded sample and reports the recorded timestamp; channels that have run
/// out report gaps. Channel ids are the recorded ones.
class TraceReplay : public MeasurementMethod {
public:
    explicit TraceReplay(std::vector<PowerSeries> recorded);
    /// Loads a power table written by export_tables(). Throws IoError/ParseError.
    static TraceReplay from_file(const std::filesystem::path& power_csv);

    std::string name() const override { return "replay"; }
    const std::vector<ChannelId>& channels() const override { return channels_; }
    std::vector<Reading> poll(double t) override;
    bool exhausted() const override;

private:
    std::vector<PowerSeries> recorded_;
    std::vector<ChannelId> channels_;
    std::vector<std::size_t> cursor_;
};

} // namespace powermeter

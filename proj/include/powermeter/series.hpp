#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace powermeter {

/// Identifies one power stream: the method that produced it and the device or
/// sensor label within that method.
struct ChannelId {
    std::string method;
    std::string device;

    auto operator<=>(const ChannelId&) const = default;
    bool operator==(const ChannelId&) const = default;

    std::string str() const { return method + ":" + device; }
};

struct PowerSample {
    double t = 0.0;     // seconds, monotonic
    double watts = 0.0;
    std::uint64_t round = 0;
};

/// Time-ordered samples of one channel. append() enforces power >= 0 and
/// strictly increasing timestamps.
class PowerSeries {
public:
    PowerSeries() = default;
    explicit PowerSeries(ChannelId channel) : channel_(std::move(channel)) {}
    PowerSeries(ChannelId channel, std::vector<PowerSample> samples);

    const ChannelId& channel() const { return channel_; }
    std::span<const PowerSample> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    /// Returns false (and leaves the series unchanged) if the sample would
    /// break ordering or carries a negative or non-finite power.
    bool try_append(const PowerSample& s);
    void append(const PowerSample& s);

    /// Every power value multiplied by `factor` (factor >= 0).
    PowerSeries scaled(double factor) const;
    /// Samples [first, last] inclusive, as a new series.
    PowerSeries slice(std::size_t first, std::size_t last) const;

private:
    ChannelId channel_;
    std::vector<PowerSample> samples_;
};

/// One row of an energy report. The optional fields are absent when the
/// channel did not yield at least two valid samples.
struct EnergyRow {
    ChannelId channel;
    std::optional<double> energy_wh;
    std::optional<double> mean_w;
    std::optional<double> max_w;
    std::optional<double> duration_s;
    std::size_t samples = 0;
    std::size_t gaps = 0;
};

using EnergyReport = std::vector<EnergyRow>;

/// Trapezoidal integral of power over time, in watt-hours.
/// Throws EmptySeries for fewer than two samples and InvalidSeries when
/// timestamps are not strictly increasing or a power value is invalid.
double integrate_energy(std::span<const PowerSample> samples);
inline double integrate_energy(const PowerSeries& series) { return integrate_energy(series.samples()); }

/// Energy plus descriptive statistics. mean_w is the time-weighted mean
/// (energy / duration), so mean_w * duration / 3600 == energy.
EnergyRow summarize(const PowerSeries& series, std::size_t gaps = 0);

/// Like summarize() but never throws: short series yield a row with the
/// optional fields absent.
EnergyRow summarize_or_absent(const PowerSeries& series, std::size_t gaps = 0);

} // namespace powermeter

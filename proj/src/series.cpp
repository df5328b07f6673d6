#include "powermeter/series.hpp"

#include <algorithm>
#include <cmath>

#include "powermeter/errors.hpp"

namespace powermeter {

namespace {

bool valid_power(double w) { return std::isfinite(w) && w >= 0.0; }

// Neumaier-compensated sum; keeps split/whole integrals consistent to ~1 ulp.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

constexpr double kSecondsPerHour = 3600.0;

} // namespace

PowerSeries::PowerSeries(ChannelId channel, std::vector<PowerSample> samples)
    : channel_(std::move(channel)) {
    samples_.reserve(samples.size());
    for (const auto& s : samples) append(s);
}

bool PowerSeries::try_append(const PowerSample& s) {
    if (!valid_power(s.watts) || !std::isfinite(s.t)) return false;
    if (!samples_.empty() && !(s.t > samples_.back().t)) return false;
    samples_.push_back(s);
    return true;
}

void PowerSeries::append(const PowerSample& s) {
    if (!try_append(s))
        throw InvalidSeries("channel " + channel_.str() + ": sample at t=" + std::to_string(s.t) +
                            " breaks ordering or has invalid power");
}

PowerSeries PowerSeries::scaled(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) throw InvalidSeries("scale factor must be finite and >= 0");
    PowerSeries out(channel_);
    out.samples_ = samples_;
    for (auto& s : out.samples_) s.watts *= factor;
    return out;
}

PowerSeries PowerSeries::slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= samples_.size()) throw InvalidSeries("slice out of range");
    PowerSeries out(channel_);
    out.samples_.assign(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                        samples_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return out;
}

namespace {

double integrate_joules(std::span<const PowerSample> samples) {
    if (samples.size() < 2)
        throw EmptySeries("energy integration needs at least 2 samples, got " + std::to_string(samples.size()));

    CompensatedSum joules;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto& a = samples[i - 1];
        const auto& b = samples[i];
        if (!(b.t > a.t)) throw InvalidSeries("timestamps not strictly increasing at index " + std::to_string(i));
        if (!valid_power(a.watts) || !valid_power(b.watts))
            throw InvalidSeries("negative or non-finite power near index " + std::to_string(i));
        joules.add(0.5 * (a.watts + b.watts) * (b.t - a.t));
    }
    return joules.value();
}

} // namespace

double integrate_energy(std::span<const PowerSample> samples) { return integrate_joules(samples) / kSecondsPerHour; }

EnergyRow summarize(const PowerSeries& series, std::size_t gaps) {
    const auto samples = series.samples();
    EnergyRow row;
    row.channel = series.channel();
    row.samples = samples.size();
    row.gaps = gaps;
    const double joules = integrate_joules(samples);
    row.energy_wh = joules / kSecondsPerHour;
    row.duration_s = samples.back().t - samples.front().t;
    row.mean_w = joules / *row.duration_s;
    row.max_w = std::max_element(samples.begin(), samples.end(),
                                 [](const PowerSample& a, const PowerSample& b) { return a.watts < b.watts; })
                    ->watts;
    return row;
}

EnergyRow summarize_or_absent(const PowerSeries& series, std::size_t gaps) {
    if (series.size() >= 2) return summarize(series, gaps);
    EnergyRow row;
    row.channel = series.channel();
    row.samples = series.size();
    row.gaps = gaps;
    return row;
}

} // namespace powermeter

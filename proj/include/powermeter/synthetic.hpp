#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "powermeter/method.hpp"

namespace powermeter {

enum class WaveKind { constant, ramp, sinusoid };

/// Deterministic power profile used for tests and dry runs.
///   constant: base
///   ramp:     base + amplitude * min(t / period, 1)
///   sinusoid: base + amplitude * sin(2 pi t / period)
/// `jitter` adds uniform noise in [-jitter, jitter] drawn from `seed`.
struct SyntheticWaveform {
    WaveKind kind = WaveKind::constant;
    double base = 100.0;
    double amplitude = 0.0;
    double period = 60.0;
    int channel_count = 1;
    std::uint64_t seed = 0;
    double jitter = 0.0;
};

/// Throws ConfigError unless the waveform can never emit negative power.
void validate(const SyntheticWaveform& wave);

/// Noise-free power at time t >= 0.
double synthetic_poll(const SyntheticWaveform& wave, double t);

/// Parses "kind=sinusoid,base=200,amplitude=100,period=60,channels=2,seed=1,jitter=0".
/// Unspecified keys keep their defaults. Throws ConfigError.
SyntheticWaveform parse_waveform(std::string_view args);

class SyntheticMethod : public MeasurementMethod {
public:
    explicit SyntheticMethod(SyntheticWaveform wave);

    std::string name() const override { return "synthetic"; }
    const std::vector<ChannelId>& channels() const override { return channels_; }
    std::vector<Reading> poll(double t) override;

    const SyntheticWaveform& waveform() const { return wave_; }

private:
    SyntheticWaveform wave_;
    std::vector<ChannelId> channels_;
    std::mt19937_64 rng_;
};

} // namespace powermeter

#include "powermeter/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "powermeter/errors.hpp"
#include "powermeter/table.hpp"

namespace powermeter {

void validate(const SyntheticWaveform& w) {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(w.base) || !finite(w.amplitude) || !finite(w.period) || !finite(w.jitter))
        throw ConfigError("synthetic waveform parameters must be finite");
    if (w.channel_count < 1) throw ConfigError("synthetic waveform needs at least one channel");
    if (w.jitter < 0) throw ConfigError("synthetic jitter must be >= 0");
    if (w.kind != WaveKind::constant && !(w.period > 0)) throw ConfigError("synthetic period must be > 0");

    double lowest = w.base;
    switch (w.kind) {
    case WaveKind::constant: break;
    case WaveKind::ramp: lowest = std::min(w.base, w.base + w.amplitude); break;
    case WaveKind::sinusoid: lowest = w.base - std::abs(w.amplitude); break;
    }
    if (lowest - w.jitter < 0)
        throw ConfigError("synthetic waveform would emit negative power (minimum " +
                          std::to_string(lowest - w.jitter) + " W)");
}

double synthetic_poll(const SyntheticWaveform& w, double t) {
    switch (w.kind) {
    case WaveKind::constant: return w.base;
    case WaveKind::ramp: return w.base + w.amplitude * std::min(t / w.period, 1.0);
    case WaveKind::sinusoid: return w.base + w.amplitude * std::sin(2.0 * std::numbers::pi * t / w.period);
    }
    return w.base;
}

SyntheticWaveform parse_waveform(std::string_view args) {
    SyntheticWaveform w;
    while (!args.empty()) {
        const auto comma = args.find(',');
        const auto item = args.substr(0, comma);
        args = comma == std::string_view::npos ? std::string_view{} : args.substr(comma + 1);
        if (item.empty()) continue;

        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError("synthetic option without '=': " + std::string(item));
        const auto key = item.substr(0, eq);
        const auto value = item.substr(eq + 1);

        auto number = [&] {
            try {
                return csv::parse_double(value);
            } catch (const ParseError&) {
                throw ConfigError("synthetic option " + std::string(key) + ": not a number: " + std::string(value));
            }
        };

        if (key == "kind") {
            if (value == "constant") w.kind = WaveKind::constant;
            else if (value == "ramp") w.kind = WaveKind::ramp;
            else if (value == "sinusoid") w.kind = WaveKind::sinusoid;
            else throw ConfigError("unknown synthetic kind: " + std::string(value));
        } else if (key == "base") {
            w.base = number();
        } else if (key == "amplitude") {
            w.amplitude = number();
        } else if (key == "period") {
            w.period = number();
        } else if (key == "channels") {
            w.channel_count = static_cast<int>(number());
        } else if (key == "seed") {
            w.seed = static_cast<std::uint64_t>(number());
        } else if (key == "jitter") {
            w.jitter = number();
        } else {
            throw ConfigError("unknown synthetic option: " + std::string(key));
        }
    }
    validate(w);
    return w;
}

SyntheticMethod::SyntheticMethod(SyntheticWaveform wave) : wave_(wave), rng_(wave.seed) {
    validate(wave_);
    for (int c = 0; c < wave_.channel_count; ++c) channels_.push_back({"synthetic", std::to_string(c)});
}

std::vector<Reading> SyntheticMethod::poll(double t) {
    const double clean = synthetic_poll(wave_, std::max(t, 0.0));
    std::vector<Reading> out;
    out.reserve(channels_.size());
    std::uniform_real_distribution<double> noise(-wave_.jitter, wave_.jitter);
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        const double w = wave_.jitter > 0 ? clean + noise(rng_) : clean;
        out.push_back({std::max(w, 0.0), std::nullopt});
    }
    return out;
}

} // namespace powermeter

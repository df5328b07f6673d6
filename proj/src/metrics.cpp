#include "powermeter/metrics.hpp"

#include <cmath>
#include <string>

#include "powermeter/errors.hpp"

namespace powermeter {

Convention parse_convention(std::string_view s) {
    if (s == "gpu-tokens") return Convention::gpu_tokens;
    if (s == "ipu-tokens") return Convention::ipu_tokens;
    if (s == "images") return Convention::images;
    throw DomainError("unknown throughput convention '" + std::string(s) +
                      "' (expected gpu-tokens, ipu-tokens or images)");
}

std::string_view to_string(Convention c) {
    switch (c) {
    case Convention::gpu_tokens: return "gpu-tokens";
    case Convention::ipu_tokens: return "ipu-tokens";
    case Convention::images: return "images";
    }
    return "?";
}

void validate(const RunMetricsInput& in) {
    if (in.global_batch_size <= 0) throw DomainError("global batch size must be positive");
    if (in.sequence_length <= 0) throw DomainError("sequence length must be positive");
    if (!(in.elapsed_per_iteration_s > 0) || !std::isfinite(in.elapsed_per_iteration_s))
        throw DomainError("elapsed time per iteration must be positive");
    if (in.micro_batch_size <= 0 || in.dp_degree <= 0) throw DomainError("micro batch size and dp degree must be positive");
    if (in.device_count <= 0) throw DomainError("device count must be positive");
    if (in.dataset_size < 0) throw DomainError("dataset size must be non-negative");
    if (in.convention == Convention::gpu_tokens && in.global_batch_size % (in.micro_batch_size * in.dp_degree) != 0)
        throw DomainError("global batch size " + std::to_string(in.global_batch_size) +
                          " is not divisible by micro batch size x data parallel (" +
                          std::to_string(in.micro_batch_size) + " x " + std::to_string(in.dp_degree) + ")");
}

double tokens_per_second(const RunMetricsInput& in) {
    validate(in);
    switch (in.convention) {
    case Convention::gpu_tokens:
        return static_cast<double>(in.global_batch_size * in.sequence_length) / in.elapsed_per_iteration_s;
    case Convention::ipu_tokens:
        return static_cast<double>(in.global_batch_size) / in.elapsed_per_iteration_s;
    case Convention::images: break;
    }
    throw DomainError("tokens_per_second needs a token convention");
}

double images_per_second(const RunMetricsInput& in) {
    if (in.convention != Convention::images) throw DomainError("images_per_second needs the images convention");
    validate(in);
    return static_cast<double>(in.global_batch_size) / in.elapsed_per_iteration_s;
}

double throughput(const RunMetricsInput& in) {
    return in.convention == Convention::images ? images_per_second(in) : tokens_per_second(in);
}

double tokens_per_energy(double tokens, double energy_wh) {
    if (!(energy_wh > 0) || !std::isfinite(energy_wh)) throw DomainError("energy must be positive");
    if (!(tokens >= 0)) throw DomainError("token count must be non-negative");
    return tokens / energy_wh;
}

double images_per_energy(double images, double energy_wh) {
    if (!(energy_wh > 0) || !std::isfinite(energy_wh)) throw DomainError("energy must be positive");
    if (!(images >= 0)) throw DomainError("image count must be non-negative");
    return images / energy_wh;
}

double per_device(double value, std::int64_t device_count) {
    if (device_count < 1) throw DomainError("device count must be >= 1");
    return value / static_cast<double>(device_count);
}

namespace {

EfficiencyRow make_row(const RunMetricsInput& in, double units, double energy) {
    EfficiencyRow row;
    row.throughput = throughput(in);
    row.per_device_throughput = per_device(row.throughput, in.device_count);
    row.energy_wh = energy;
    row.efficiency = in.convention == Convention::images ? images_per_energy(units, energy)
                                                         : tokens_per_energy(units, energy);
    return row;
}

} // namespace

EfficiencyRow efficiency_row(const RunMetricsInput& in, double units_processed) {
    return make_row(in, units_processed, in.energy_per_device_wh);
}

EfficiencyRow efficiency_row_aggregate(const RunMetricsInput& in, double units_processed) {
    return make_row(in, units_processed, in.energy_per_device_wh * static_cast<double>(in.device_count));
}

} // namespace powermeter

#pragma once

#include <cstdint>
#include <string_view>

namespace powermeter {

/// How a run's global batch size is counted.
///   gpu_tokens: samples; tokens = samples * sequence_length
///   ipu_tokens: already tokens
///   images:     images
enum class Convention { gpu_tokens, ipu_tokens, images };

Convention parse_convention(std::string_view s);   // "gpu-tokens" | "ipu-tokens" | "images"
std::string_view to_string(Convention c);

struct RunMetricsInput {
    Convention convention = Convention::gpu_tokens;
    std::int64_t global_batch_size = 0;
    std::int64_t sequence_length = 1;
    double elapsed_per_iteration_s = 0.0;
    std::int64_t micro_batch_size = 1;
    std::int64_t dp_degree = 1;
    std::int64_t device_count = 1;
    double energy_per_device_wh = 0.0;
    std::int64_t dataset_size = 0;   // samples per epoch; 0 = unknown
};

/// Throws DomainError on non-positive counts or elapsed time, and for
/// gpu_tokens when global_batch_size is not a multiple of
/// micro_batch_size * dp_degree.
void validate(const RunMetricsInput& in);

/// gpu_tokens: gbs * seq / elapsed; ipu_tokens: gbs / elapsed.
double tokens_per_second(const RunMetricsInput& in);
/// gbs / elapsed.
double images_per_second(const RunMetricsInput& in);
/// Dispatches on the convention.
double throughput(const RunMetricsInput& in);

double tokens_per_energy(double tokens, double energy_wh);
double images_per_energy(double images, double energy_wh);
double per_device(double value, std::int64_t device_count);

struct EfficiencyRow {
    double throughput = 0.0;
    double per_device_throughput = 0.0;
    double energy_wh = 0.0;
    double efficiency = 0.0;   // units per Wh
};

/// Efficiency against per-device energy, the convention of the IPU tables.
EfficiencyRow efficiency_row(const RunMetricsInput& in, double units_processed);
/// Same, but against the energy of all devices together.
EfficiencyRow efficiency_row_aggregate(const RunMetricsInput& in, double units_processed);

} // namespace powermeter

#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "powermeter/sampler.hpp"
#include "powermeter/series.hpp"
#include "powermeter/table.hpp"

namespace powermeter {

struct SessionMetadata {
    std::string start_time;   // ISO-8601 local wall time
    long interval_ms = 0;
    std::vector<std::string> methods;
    std::string host;
};

struct PowerRow {
    std::uint64_t round = 0;
    ChannelId channel;
    double t = 0.0;
    double watts = 0.0;
};

/// Everything the wrapper writes for one session.
struct SessionExport {
    SessionMetadata meta;
    std::vector<PowerRow> power;   // grouped by channel in enumeration order
    EnergyReport energy;
};

/// Snapshot of a stopped session. Throws InvalidState otherwise.
SessionExport make_export(const Session& session, std::string host);

/// Groups power rows back into per-channel series, first-seen channel order.
std::vector<PowerSeries> to_series(std::span<const PowerRow> rows);

inline const std::vector<std::string> kPowerColumns = {"round", "method", "device", "t", "watts"};
inline const std::vector<std::string> kEnergyColumns = {"method",     "device",  "energy_wh", "mean_w",
                                                        "max_w",      "duration_s", "samples", "gaps"};

std::string power_table_csv(const SessionExport& ex);
std::string energy_table_csv(const SessionExport& ex);

/// Writes power<suffix>.csv and energy<suffix>.csv into `dir` (created if
/// needed). Only "csv" is built; "h5" is a known but unbuilt format.
/// Throws UsageError for the filetype, IoError when the directory cannot be
/// written and CollisionError if a target exists and `force` is false.
std::vector<std::filesystem::path> export_tables(const SessionExport& ex, const std::filesystem::path& dir,
                                                 std::string_view filetype, std::string_view suffix,
                                                 bool force = false);

struct PowerTable {
    SessionMetadata meta;
    std::vector<PowerRow> rows;
};

struct EnergyTable {
    SessionMetadata meta;
    EnergyReport rows;
};

PowerTable read_power_table(const std::filesystem::path& path);
EnergyTable read_energy_table(const std::filesystem::path& path);

struct SuffixContext {
    std::string hostname;
    long pid = 0;
    std::chrono::system_clock::time_point start;
};

/// Expands %h (hostname), %p (pid), %t (start time, YYYYmmdd-HHMMSS local)
/// and %% in a file-suffix template. Throws UsageError on anything else.
std::string render_suffix(std::string_view tpl, const SuffixContext& ctx);

/// Concatenates energy tables and prepends a `source` column (file suffix,
/// else the host recorded in the header, else the file stem). Throws
/// MergeError on schema mismatch or a repeated (source, channel) pair.
ResultTable merge_energy_tables(std::span<const std::filesystem::path> files);

std::string local_hostname();

} // namespace powermeter

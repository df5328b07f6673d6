#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "powermeter/registry.hpp"
#include "powermeter/series.hpp"

namespace powermeter {

// Wrapper-owned exit codes. Everything else is the child's.
inline constexpr int kExitWrapperFailure = 125;
inline constexpr int kExitCannotExecute = 126;
inline constexpr int kExitNotFound = 127;

/// Arguments of a wrapped run.
struct WrapOptions {
    std::vector<std::string> methods;
    long interval_ms = 100;
    std::optional<std::filesystem::path> df_out;
    std::string df_filetype = "csv";
    std::string df_suffix;   // template, see render_suffix()
    bool force = false;
    std::vector<std::string> command;

    // Runner extensions used by the sweep.
    std::optional<std::filesystem::path> workdir;      // child cwd
    std::optional<std::filesystem::path> stdout_path;  // child stdout+stderr
    bool print_summary = true;
    bool forward_signals = true;
};

struct WrapResult {
    int exit_code = 0;
    bool child_started = false;
    std::string error;   // set when the wrapper itself failed
    EnergyReport energy;
    std::vector<std::filesystem::path> exports;
};

/// Resolves methods, starts a session, runs the child to completion, stops
/// the session and writes exports. The returned exit code is the child's
/// (128+N when killed by signal N) or one of the kExit* codes when the
/// wrapper could not get the child running.
WrapResult run_wrapped(const WrapOptions& options, const MethodRegistry& registry);
WrapResult run_wrapped(const WrapOptions& options);

/// Human-readable per-channel energy summary.
std::string format_summary(const EnergyReport& report);

} // namespace powermeter

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "powermeter/metrics.hpp"
#include "powermeter/table.hpp"
#include "powermeter/wrap.hpp"

namespace powermeter {

using ValueList = std::vector<std::string>;
using NamedLists = std::vector<std::pair<std::string, ValueList>>;
using Bindings = std::map<std::string, std::string, std::less<>>;

struct ExtractRule {
    std::string metric;
    std::string pattern;
    std::regex re;

    /// Throws SpecError unless the pattern compiles with exactly one group.
    ExtractRule(std::string metric, std::string pattern);
};

/// Which binding or captured metric feeds each metric input. Each field holds
/// a parameter / platform constant / captured metric name, or a literal.
struct MetricsMapping {
    Convention convention = Convention::gpu_tokens;
    std::string global_batch_size;
    std::string sequence_length = "1";
    std::string elapsed_ms;   // per-iteration time, milliseconds
    std::string devices = "1";
    std::string micro_batch_size = "1";
    std::string dp_degree = "1";
    std::string processed;    // samples processed; empty = one global batch
};

struct SweepSpec {
    std::string name;
    NamedLists parameters;                                       // declaration order
    std::vector<std::pair<std::string, NamedLists>> tags;        // tag -> overrides
    std::string job_template;
    std::vector<ExtractRule> extract;
    std::vector<std::pair<std::string, std::string>> platform;   // constants
    std::optional<MetricsMapping> metrics;
};

/// Parses the YAML sweep format. Throws SpecError.
SweepSpec parse_sweep_spec(std::string_view text);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

enum class RunStatus { pending, running, done, failed };
std::string_view to_string(RunStatus s);

struct RunInstance {
    int id = 0;
    Bindings bindings;   // parameters only
    std::vector<std::string> parameter_order;
    std::filesystem::path workdir;
    RunStatus status = RunStatus::pending;
    std::map<std::string, double> captured;
    std::filesystem::path energy_file;
    int exit_code = 0;
    std::string reason;
};

/// Cartesian product of the active parameter lists. The first parameter
/// varies slowest. Throws UnknownTag and EmptySweep.
std::vector<RunInstance> expand_permutations(const SweepSpec& spec, std::span<const std::string> tags);

/// Substitutes every ${name}; substituted text is not expanded again.
/// Throws MissingBinding naming the placeholder and its line.
std::string render_template(std::string_view tpl, const Bindings& bindings);

/// Parameters merged with platform constants.
Bindings template_bindings(const SweepSpec& spec, const RunInstance& run);

/// Renders run_<id>.sh into <root>/run_<id>/ for every instance and sets
/// each workdir. Returns the script paths.
std::vector<std::filesystem::path> write_scripts(const SweepSpec& spec, std::vector<RunInstance>& runs,
                                                 const std::filesystem::path& root);

/// Renders and runs every instance sequentially under the wrapper, each in
/// its own workdir with stdout captured to run.log. A failing run is marked
/// failed and the sweep continues.
std::vector<RunInstance> execute_local(const SweepSpec& spec, std::vector<RunInstance> runs,
                                       const WrapOptions& prototype, const std::filesystem::path& root,
                                       const MethodRegistry& registry);
std::vector<RunInstance> execute_local(const SweepSpec& spec, std::vector<RunInstance> runs,
                                       const WrapOptions& prototype, const std::filesystem::path& root);

/// Last match wins per metric; unmatched metrics are absent. Throws
/// ParseError (with the 1-based line) when a capture is not a number.
std::map<std::string, double> parse_run_log(std::string_view log, std::span<const ExtractRule> rules);

/// id, parameters, status, captured metrics, then derived columns
/// (throughput, throughput_per_device, energy_wh, energy_per_device_wh,
/// efficiency) when the spec has a metrics mapping.
ResultTable tabulate(const SweepSpec& spec, std::span<const RunInstance> runs);

} // namespace powermeter

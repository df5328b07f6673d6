// powermeter: run a command under power measurement, merge per-node energy
// tables, or drive a parameter sweep.
//
//   powermeter --methods synthetic,gh [--interval MS] [--df-out DIR]
//              [--df-filetype csv] [--df-suffix TPL] [--force] -- CMD ARGS...
//   powermeter merge FILE... -o OUT.csv
//   powermeter sweep SPEC.yaml [--tag T]... [--workdir DIR] [--submit-only]

#include <CLI11.hpp>

#include <algorithm>
#include <cstring>
#include <iostream>

#include "powermeter/errors.hpp"
#include "powermeter/export.hpp"
#include "powermeter/sweep.hpp"
#include "powermeter/wrap.hpp"

namespace fs = std::filesystem;
using namespace powermeter;

namespace {

int run_merge(int argc, char** argv) {
    CLI::App app{"Merge per-node energy tables into one CSV", "powermeter merge"};
    std::vector<fs::path> files;
    fs::path output;
    app.add_option("files", files, "energy<suffix>.csv files")->required()->check(CLI::ExistingFile);
    app.add_option("-o,--output", output, "merged CSV")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        const auto table = merge_energy_tables(files);
        table.write_csv(output);
        std::cout << table.to_text();
    } catch (const Error& e) {
        std::cerr << "powermeter merge: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_sweep(int argc, char** argv) {
    CLI::App app{"Expand, run and tabulate a benchmark sweep", "powermeter sweep"};
    fs::path spec_path;
    std::vector<std::string> tags;
    fs::path workdir = "sweep_runs";
    bool submit_only = false;
    std::vector<std::string> methods{"synthetic"};
    long interval = 100;
    std::string csv_out;
    std::vector<std::string> overrides;
    app.add_option("spec", spec_path, "sweep spec (YAML)")->required()->check(CLI::ExistingFile);
    app.add_option("-t,--tag", tags, "enable a tag (repeatable)");
    app.add_option("-w,--workdir", workdir, "root directory for run workdirs")->capture_default_str();
    app.add_flag("--submit-only", submit_only, "write run scripts, do not execute");
    app.add_option("--methods", methods, "measurement methods for each run")
        ->allow_extra_args(false)
        ->capture_default_str();
    app.add_option("--interval", interval, "sampling interval in ms")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--csv", csv_out, "also write the result table as CSV");
    app.add_option("--set", overrides, "override a platform constant, KEY=VALUE (repeatable)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        auto spec = load_sweep_spec(spec_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got " + kv);
            const auto key = kv.substr(0, eq);
            auto it = std::find_if(spec.platform.begin(), spec.platform.end(),
                                   [&](const auto& p) { return p.first == key; });
            if (it == spec.platform.end()) throw UsageError("--set: no platform constant " + key);
            it->second = kv.substr(eq + 1);
        }

        auto runs = expand_permutations(spec, tags);
        if (submit_only) {
            for (const auto& p : write_scripts(spec, runs, workdir)) std::cout << p.string() << "\n";
            return 0;
        }

        WrapOptions proto;
        for (const auto& m : methods)
            for (auto& name : split_method_list(m)) proto.methods.push_back(std::move(name));
        proto.interval_ms = interval;
        proto.print_summary = false;
        runs = execute_local(spec, std::move(runs), proto, workdir);
        const auto table = tabulate(spec, runs);
        std::cout << table.to_text();
        if (!csv_out.empty()) table.write_csv(csv_out);
        for (const auto& r : runs)
            if (r.status == RunStatus::failed)
                std::cerr << "powermeter sweep: run " << r.id << " failed: " << r.reason << "\n";
    } catch (const Error& e) {
        std::cerr << "powermeter sweep: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_wrap(int argc, char** argv) {
    CLI::App app{"Run a command while sampling power; write power and energy tables", "powermeter"};
    WrapOptions opts;
    std::string df_out;
    std::vector<std::string> method_args;
    app.add_option("-m,--methods", method_args, "measurement methods (comma-separated or repeated)")
        ->required()
        ->allow_extra_args(false);
    app.add_option("-i,--interval", opts.interval_ms, "sampling interval in ms")->capture_default_str();
    app.add_option("--df-out", df_out, "output directory for power/energy tables");
    app.add_option("--df-filetype", opts.df_filetype, "table format")->capture_default_str();
    app.add_option("--df-suffix", opts.df_suffix, "file suffix template: %h host, %p pid, %t start time, %% literal");
    app.add_flag("--force", opts.force, "overwrite existing tables");

    // Everything after "--" is the child command. Without "--", the first
    // positional argument starts it.
    int split = argc;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--") == 0) {
            split = i;
            break;
        }
    try {
        if (split < argc) {
            app.parse(split, argv);
            opts.command.assign(argv + split + 1, argv + argc);
        } else {
            app.prefix_command();
            app.parse(argc, argv);
            opts.command = app.remaining();
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitWrapperFailure;
    }
    for (const auto& m : method_args)
        for (auto& name : split_method_list(m)) opts.methods.push_back(std::move(name));
    if (!df_out.empty()) opts.df_out = df_out;
    if (opts.command.empty()) {
        std::cerr << "powermeter: no command given (usage: powermeter --methods M -- CMD ARGS...)\n";
        return kExitWrapperFailure;
    }
    if (opts.interval_ms < 1) {
        std::cerr << "powermeter: --interval must be >= 1 ms\n";
        return kExitWrapperFailure;
    }
    return run_wrapped(opts).exit_code;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::strcmp(argv[1], "merge") == 0) return run_merge(argc - 1, argv + 1);
    if (argc > 1 && std::strcmp(argv[1], "sweep") == 0) return run_sweep(argc - 1, argv + 1);
    return run_wrap(argc, argv);
}

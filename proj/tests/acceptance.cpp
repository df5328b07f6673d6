// Acceptance runner: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "powermeter/errors.hpp"
#include "powermeter/export.hpp"
#include "powermeter/hwmon.hpp"
#include "powermeter/metrics.hpp"
#include "powermeter/registry.hpp"
#include "powermeter/replay.hpp"
#include "powermeter/sampler.hpp"
#include "powermeter/sweep.hpp"
#include "powermeter/synthetic.hpp"
#include "powermeter/wrap.hpp"
#include "reference_tables.hpp"
#include "test_support.hpp"

using namespace powermeter;
using namespace std::chrono_literals;
using testsupport::rel_err;
using testsupport::TempDir;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void integration_accuracy(Outcome& o) {
    const auto t0 = Clock::now();
    const double k = 2.0 * std::numbers::pi / 60.0;
    auto power = [&](double t) { return 200.0 + 100.0 * std::sin(k * t); };
    auto antiderivative = [&](double t) { return 200.0 * t - 100.0 / k * std::cos(k * t); };
    const double oracle = (antiderivative(600.0) - antiderivative(0.0)) / 3600.0;

    const double sinus = integrate_energy(testsupport::sample_fn(power, 0.1, 6000));
    const double ramp = integrate_energy(testsupport::sample_fn([](double t) { return 100.0 * t / 7200.0; }, 1.0, 7200));
    const double constant = integrate_energy(testsupport::sample_fn([](double) { return 100.0; }, 1.0, 3600));
    const double runtime = seconds_since(t0);

    o.require(rel_err(sinus, oracle) < 1e-3, "sinusoid within 0.1 %");
    o.require(rel_err(sinus, 33.333) < 1e-3, "sinusoid near 33.333 Wh");
    o.require(rel_err(ramp, 100.0) <= 1e-12, "ramp exact");
    o.require(rel_err(constant, 100.0) <= 1e-12, "constant exact");
    o.require(runtime < 1.0, "runtime < 1 s");
    o.detail << "sinusoid " << sinus << " Wh (oracle " << oracle << ", rel err " << rel_err(sinus, oracle)
             << "), ramp " << ramp << ", constant " << constant << ", " << runtime << " s";
}

void table_llm(Outcome& o) {
    double worst = 0.0;
    for (const auto& row : reference::kLlmIpu) {
        const double err = rel_err(tokens_per_energy(row.batch_size, row.energy_per_epoch_per_ipu_wh), row.tokens_per_wh);
        worst = std::max(worst, err);
        o.require(err < reference::kTableTolerance, "batch " + std::to_string(row.batch_size));
    }
    o.detail << "9 rows, worst relative error " << worst << " (tolerance " << reference::kTableTolerance << ")";
}

void table_resnet(Outcome& o) {
    double worst = 0.0;
    for (const auto& row : reference::kResnetIpu) {
        const double err =
            rel_err(images_per_energy(reference::kImageNetTrainImages, row.energy_per_epoch_wh), row.images_per_wh);
        worst = std::max(worst, err);
        o.require(err < reference::kTableTolerance, "batch " + std::to_string(row.batch_size));
    }
    o.detail << "9 rows, worst relative error " << worst << " (tolerance " << reference::kTableTolerance << ")";
}

void per_device_normalization(Outcome& o) {
    const double v = per_device(190020.0, 4);
    o.require(v == 47505.0, "190020 / 4 == 47505 exactly");
    o.detail << "190020 tokens/s over 4 devices -> " << v << " tokens/s/device";
}

void sampler_timing(Outcome& o) {
    const std::vector<std::string> names{"synthetic:channels=2"};
    auto s = session_start({registry_resolve(names), 100ms});
    std::this_thread::sleep_for(10s);
    const auto report = s->stop();
    for (const auto& row : report) {
        o.require(row.samples >= 95 && row.samples <= 110, row.channel.str() + " sample count in [95, 110]");
        const double mean_interval = *row.duration_s / static_cast<double>(row.samples - 1);
        o.require(std::abs(mean_interval - 0.1) <= 0.01, row.channel.str() + " mean interval within 10 %");
        o.detail << row.channel.str() << ": " << row.samples << " samples, mean interval " << mean_interval * 1000
                 << " ms; ";
    }
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(POWERMETER_BIN) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void wrapper_behavior(Outcome& o) {
    TempDir dir;
    // Exit-code propagation, exports on failure.
    for (int code : {0, 1, 3, 97}) {
        const std::string sfx = "_c" + std::to_string(code);
        const int got = run_cli("--methods synthetic --interval 20 --df-out " + dir.path().string() +
                                " --df-suffix " + sfx + " -- sh -c 'sleep 0.1; exit " + std::to_string(code) + "'");
        o.require(got == code, "exit code " + std::to_string(code) + " propagated (got " + std::to_string(got) + ")");
        o.require(std::filesystem::exists(dir / ("energy" + sfx + ".csv")) &&
                      std::filesystem::exists(dir / ("power" + sfx + ".csv")),
                  "exports written for exit " + std::to_string(code));
    }

    // %h differentiates two simulated hosts.
    const auto now = std::chrono::system_clock::now();
    const auto sa = render_suffix("_%h", {"nodeA", 1000, now});
    const auto sb = render_suffix("_%h", {"nodeB", 1000, now});
    const std::vector<std::string> names{"synthetic"};
    auto s = session_start({registry_resolve(names), 10ms});
    std::this_thread::sleep_for(50ms);
    s->stop();
    const auto ex = make_export(*s, "sim");
    const auto fa = export_tables(ex, dir / "hosts", "csv", sa);
    const auto fb = export_tables(ex, dir / "hosts", "csv", sb);
    std::set<std::filesystem::path> all(fa.begin(), fa.end());
    all.insert(fb.begin(), fb.end());
    o.require(all.size() == 4, "suffixed files disjoint across hosts");

    // CSV round-trip of the power table.
    const auto back = read_power_table(fa[0]);
    bool lossless = back.rows.size() == ex.power.size();
    for (std::size_t i = 0; lossless && i < back.rows.size(); ++i)
        lossless = back.rows[i].t == ex.power[i].t && back.rows[i].watts == ex.power[i].watts &&
                   back.rows[i].channel == ex.power[i].channel && back.rows[i].round == ex.power[i].round;
    o.require(lossless, "CSV round-trip lossless");

    // Replay backend reproduces the original energy exactly.
    const std::vector<std::string> live_names{"synthetic:kind=sinusoid,base=200,amplitude=100,period=0.4,jitter=5,channels=2"};
    auto live = session_start({registry_resolve(live_names), 5ms});
    std::this_thread::sleep_for(200ms);
    live->stop();
    const auto live_files = export_tables(make_export(*live, "sim"), dir / "replay", "csv", "");
    const std::vector<std::string> replay_names{"replay:" + live_files[0].string()};
    auto replay = session_start({registry_resolve(replay_names), 1ms});
    replay->wait_exhausted(30s);
    const auto replayed = replay->stop();
    const auto original = read_energy_table(live_files[1]);
    bool identical = replayed.size() == original.rows.size();
    for (std::size_t i = 0; identical && i < replayed.size(); ++i)
        identical = replayed[i].energy_wh && original.rows[i].energy_wh &&
                    *replayed[i].energy_wh == *original.rows[i].energy_wh;
    o.require(identical, "replay energy equals original");

    o.detail << "exit codes {0,1,3,97} propagated with exports; host suffixes " << sa << "/" << sb
             << " disjoint; " << back.rows.size() << " power rows round-tripped; replay of "
             << replayed.size() << " channels bit-identical";
}

std::string sweep_yaml() {
    return std::string(R"(name: acceptance
parameters:
  batch: [16, 32, 64]
  devices: [1, 2]
platform:
  mockwork: )") + MOCKWORK_BIN + R"(
  seq: 64
template: |
  ${mockwork} --kind llm --global-batch-size ${batch} --seq-len ${seq} --iters 5
extract:
  - metric: elapsed_ms
    pattern: 'elapsed ms/iter: (\S+)'
  - metric: samples
    pattern: 'samples processed: (\d+)'
metrics:
  convention: gpu-tokens
  global_batch_size: batch
  sequence_length: seq
  elapsed_ms: elapsed_ms
  devices: devices
  processed: samples
)";
}

void sweep_determinism(Outcome& o) {
    TempDir a, b, run_root;
    const auto spec = parse_sweep_spec(sweep_yaml());
    auto runs_a = expand_permutations(spec, {});
    auto runs_b = expand_permutations(spec, {});
    o.require(runs_a.size() == 6, "6 instances");

    const std::vector<std::pair<std::string, std::string>> expected{{"16", "1"}, {"16", "2"}, {"32", "1"},
                                                                    {"32", "2"}, {"64", "1"}, {"64", "2"}};
    for (std::size_t i = 0; i < std::min(runs_a.size(), expected.size()); ++i)
        o.require(runs_a[i].bindings.at("batch") == expected[i].first &&
                      runs_a[i].bindings.at("devices") == expected[i].second,
                  "declaration order at instance " + std::to_string(i));

    const auto pa = write_scripts(spec, runs_a, a.path());
    const auto pb = write_scripts(spec, runs_b, b.path());
    bool identical = pa.size() == pb.size();
    for (std::size_t i = 0; identical && i < pa.size(); ++i)
        identical = testsupport::read_file(pa[i]) == testsupport::read_file(pb[i]);
    o.require(identical, "rendered scripts byte-identical");

    const auto t0 = Clock::now();
    WrapOptions proto;
    proto.methods = {"synthetic"};
    proto.interval_ms = 10;
    proto.print_summary = false;
    const auto runs = execute_local(spec, expand_permutations(spec, {}), proto, run_root.path());
    const auto table = tabulate(spec, runs);
    const double elapsed = seconds_since(t0);

    o.require(table.rows.size() == 6, "6-row result table");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        o.require(table.at(i, "status") == "done", "run " + std::to_string(i) + " done");
        for (const char* col : {"throughput", "energy_wh", "efficiency"})
            o.require(!table.at(i, col).empty(), std::string(col) + " populated in row " + std::to_string(i));
    }
    o.require(elapsed < 60.0, "end-to-end < 60 s");
    o.detail << "6 instances in declaration order, scripts identical, end-to-end " << elapsed << " s\n"
             << table.to_text();
}

void hwmon_backend(Outcome& o) {
    TempDir root;
    testsupport::write_file(root / "hwmon0/power1_average", "65000000\n");
    testsupport::write_file(root / "hwmon0/power1_oem_info", "Module Power\n");
    testsupport::write_file(root / "hwmon1/power1_oem_info", "Grace Power Socket 0\n");

    HwmonScan scan;
    try {
        scan = hwmon_enumerate(root.path());
    } catch (const Error& e) {
        o.require(false, std::string("enumerate threw: ") + e.what());
        return;
    }
    o.require(scan.sensors.size() == 1, "one sensor");
    o.require(scan.warnings.size() == 1, "one warning for the missing value file");
    HwmonMethod gh(root.path());
    const auto reading = gh.poll(0.0);
    o.require(!reading.empty() && reading[0].watts && *reading[0].watts == 65.0, "polls 65.0 W exactly");
    o.detail << scan.sensors.size() << " sensor ('" << (scan.sensors.empty() ? "" : scan.sensors[0].label) << "') at "
             << (reading.empty() || !reading[0].watts ? -1.0 : *reading[0].watts) << " W; warning: "
             << (scan.warnings.empty() ? "none" : scan.warnings[0]);
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"integration accuracy", integration_accuracy},
        {"LLM IPU table reproduction", table_llm},
        {"ResNet IPU table reproduction", table_resnet},
        {"per-device normalization", per_device_normalization},
        {"sampler timing", sampler_timing},
        {"wrapper behavior", wrapper_behavior},
        {"sweep determinism", sweep_determinism},
        {"hwmon backend", hwmon_backend},
    };

    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            check(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed;
}

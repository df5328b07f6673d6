// mockwork: stand-in training job. Burns CPU in proportion to the batch
// size and prints Megatron-style iteration lines.
//
//   mockwork --kind {llm|resnet} --global-batch-size N --seq-len N --iters N

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>

namespace {

// Integer mixing loop the optimizer cannot drop.
std::uint64_t burn(std::uint64_t steps, std::uint64_t seed) {
    std::uint64_t x = seed | 1;
    for (std::uint64_t i = 0; i < steps; ++i) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
    }
    return x;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mock training workload"};
    std::string kind = "llm";
    long long gbs = 16;
    long long seq = 128;
    int iters = 5;
    double work = 1.0;
    int exit_code = 0;
    app.add_option("--kind", kind)->check(CLI::IsMember({"llm", "resnet"}))->capture_default_str();
    app.add_option("--global-batch-size", gbs)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seq-len", seq)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--iters", iters)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--work", work, "work multiplier")->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--exit-code", exit_code, "exit status to return after the run");
    CLI11_PARSE(app, argc, argv);

    // One "sample" is worth seq-len units for LLMs and a fixed 256 for images.
    const double units_per_sample = kind == "llm" ? static_cast<double>(seq) : 256.0;
    const auto steps = static_cast<std::uint64_t>(work * static_cast<double>(gbs) * units_per_sample * 2000.0);

    std::uint64_t sink = 0;
    for (int i = 0; i < iters; ++i) {
        const auto start = std::chrono::steady_clock::now();
        sink += burn(steps, static_cast<std::uint64_t>(i) + 1);
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
        std::cout << " iteration " << (i + 1) << "/" << iters << " | elapsed ms/iter: " << ms.count()
                  << " | global batch size: " << gbs << "\n";
    }
    std::cout << "samples processed: " << gbs * iters << "\n";
    if (sink == 42) std::cout << "\n";
    return exit_code;
}

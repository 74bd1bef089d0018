// Hot-path benchmarks: sampler-log parsing (the largest input volume),
// synthetic run generation (the test-suite workhorse), and the full
// analysis pipeline over an in-memory run.

#include <benchmark/benchmark.h>

#include <cstdio>
#include <string>

#include "phiprof/analyze.hpp"
#include "phiprof/synth.hpp"

namespace {

using namespace phiprof;

Scenario bench_scenario() {
    Scenario sc;
    sc.name = "bench";
    sc.seed = 99;
    sc.config.nodes = 2;
    sc.config.mics_per_node = 2;
    sc.iterations = 3;
    sc.pre_run_s = 10.5;
    sc.post_run_s = 2.0;
    return sc;
}

const SynthRun& bench_run() {
    static const SynthRun run = generate(bench_scenario());
    return run;
}

ParsedRun parse_bench_run() {
    ParsedRun parsed;
    for (const auto& [name, text] : bench_run().files) {
        int node = 0, device = 0;
        if (name == "app.out") {
            parsed.app = parse_app_output(text);
        } else if (name == "offload.rpt") {
            parsed.offloads = parse_offload_report(text);
        } else if (std::sscanf(name.c_str(), "host-%d.log", &node) == 1) {
            for (auto& [power, perf] : parse_host_sampler(text)) {
                parsed.host_power[node].push_back(power);
                parsed.host_perf[node].push_back(perf);
            }
        } else if (std::sscanf(name.c_str(), "mic-%d-%d.log", &node,
                               &device) == 2) {
            parsed.mic_power[{node, device}] = parse_mic_sampler(text);
        }
    }
    return parsed;
}

void BM_ParseHostSampler(benchmark::State& state) {
    const std::string& text = bench_run().files.at("host-0.log");
    for (auto _ : state) {
        auto samples = parse_host_sampler(text);
        benchmark::DoNotOptimize(samples);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseHostSampler);

void BM_GenerateRun(benchmark::State& state) {
    const Scenario sc = bench_scenario();
    for (auto _ : state) {
        SynthRun run = generate(sc);
        benchmark::DoNotOptimize(run);
    }
}
BENCHMARK(BM_GenerateRun);

void BM_AnalyzeRun(benchmark::State& state) {
    const ParsedRun parsed = parse_bench_run();
    const RunConfig config = bench_run().truth.report.config;
    for (auto _ : state) {
        AnalyzedRun analyzed = analyze_run(parsed, config);
        benchmark::DoNotOptimize(analyzed);
    }
}
BENCHMARK(BM_AnalyzeRun);

}  // namespace

BENCHMARK_MAIN();

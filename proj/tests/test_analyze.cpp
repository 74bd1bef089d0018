#include <cmath>
#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "phiprof/analyze.hpp"
#include "phiprof/synth.hpp"

using namespace phiprof;
using testutil::any_contains;
using testutil::contains;
using testutil::message_of;
using testutil::TempDir;
using testutil::write_file;

namespace {

Scenario quick_scenario() {
    Scenario s;
    s.name = "analyze-unit";
    s.seed = 31;
    s.iterations = 2;
    s.pre_run_s = 12.0;
    s.post_run_s = 4.0;
    return s;
}

ParsedRun parse_run(const SynthRun& run) {
    ParsedRun parsed;
    parsed.app = parse_app_output(run.files.at("app.out"));
    parsed.offloads = parse_offload_report(run.files.at("offload.rpt"));
    for (const auto& [name, text] : run.files) {
        int node = 0, device = 0;
        if (std::sscanf(name.c_str(), "host-%d.log", &node) == 1 &&
            name.find("host-") == 0) {
            for (auto& [p, c] : parse_host_sampler(text)) {
                parsed.host_power[node].push_back(p);
                parsed.host_perf[node].push_back(c);
            }
        } else if (std::sscanf(name.c_str(), "mic-%d-%d.log", &node,
                               &device) == 2) {
            parsed.mic_power[{node, device}] = parse_mic_sampler(text);
        }
    }
    return parsed;
}

void write_run(const TempDir& dir, const SynthRun& run, bool with_truth) {
    for (const auto& [name, text] : run.files)
        write_file(dir / name, text);
    if (with_truth) write_file(dir / "truth.json", truth_to_json(run.truth));
}

}  // namespace

TEST_CASE("analysis recovers the generated truth within budget") {
    Scenario s = quick_scenario();
    // Power recovery needs the full-length run: the second-quantized wall
    // stamps only pin the app clock once enough event anchors spread across
    // the wall second, which takes a handful of iterations.
    s.iterations = 10;
    s.host_power.noise_sigma_watts = 2.0;
    s.mic_power.noise_sigma_watts = 2.0;
    const SynthRun run = generate(s);
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);

    const RunReport& got = out.report;
    const RunReport& want = run.truth.report;
    const double phase_budget = std::max(s.host_period_s, 0.020);
    CHECK(std::fabs(got.phases.host_compute_s - want.phases.host_compute_s) <=
          phase_budget);
    CHECK(std::fabs(got.phases.mic_compute_s - want.phases.mic_compute_s) <=
          phase_budget);
    CHECK(std::fabs(got.phases.pci_transfer_s - want.phases.pci_transfer_s) <=
          phase_budget);

    REQUIRE(got.device_states.size() == want.device_states.size());
    for (std::size_t i = 0; i < got.device_states.size(); ++i) {
        const DeviceStateReport& g = got.device_states[i];
        const DeviceStateReport& w = want.device_states[i];
        CHECK(g.device.label() == w.device.label());
        if (g.idle_samples >= 100 && w.idle_samples >= 100)
            CHECK(std::fabs(g.idle_watts_avg - w.idle_watts_avg) <=
                  0.01 * w.idle_watts_avg);
        if (g.active_samples >= 100 && w.active_samples >= 100)
            CHECK(std::fabs(g.active_watts_avg - w.active_watts_avg) <=
                  0.01 * w.active_watts_avg);
        CHECK(std::fabs(g.energy_j - w.energy_j) <= 0.015 * w.energy_j);
    }
    CHECK(std::fabs(got.total_energy_j - want.total_energy_j) <=
          0.015 * want.total_energy_j);

    // Counter-derived figures have no noise, so they match exactly.
    CHECK(got.mic_mem_bytes == want.mic_mem_bytes);
    CHECK(got.pci_mem_bytes == want.pci_mem_bytes);
    CHECK(got.vector_intensity == doctest::Approx(want.vector_intensity));
    CHECK(got.throughput_flops ==
          doctest::Approx(want.throughput_flops).epsilon(1e-12));
}

TEST_CASE("cpu time without device time hints at a host fallback") {
    const SynthRun run = generate(quick_scenario());
    ParsedRun parsed = parse_run(run);
    parsed.offloads.front().mic_time_s = 0.0;
    const AnalyzedRun out = analyze_run(parsed, run.truth.report.config);
    CHECK(any_contains(out.warnings,
                       "offload records report cpu time without device time"));
}

TEST_CASE("a missing host log is a warning, not a failure") {
    const SynthRun run = generate(quick_scenario());
    ParsedRun parsed = parse_run(run);
    parsed.host_power.erase(0);
    parsed.host_perf.erase(0);
    const AnalyzedRun out = analyze_run(parsed, run.truth.report.config);
    CHECK(any_contains(out.warnings, "no host sampler log for node 0"));
}

TEST_CASE("thin device states carry a low-sample warning") {
    Scenario s = quick_scenario();
    s.iterations = 1;  // ~2.7 s of offload: far under 100 mic samples
    const SynthRun run = generate(s);
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);
    CHECK(any_contains(out.warnings, "device mic-0-0 has a state under 100"));
}

TEST_CASE("a short idle lead is flagged against the baseline rule") {
    Scenario s = quick_scenario();
    s.pre_run_s = 5.0;
    const SynthRun run = generate(s);
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);
    CHECK(any_contains(out.warnings,
                       "idle baseline before the run is under 10 s for host-0"));
}

TEST_CASE("out-of-bounds vector intensity is reported, not clamped") {
    Scenario s = quick_scenario();
    s.offload.vpu_instructions = 1000000;
    s.offload.vpu_elements = 9500000;  // ratio 9.5 vs double-lane bound 8
    const SynthRun run = generate(s);
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);
    CHECK(out.report.vector_intensity == doctest::Approx(9.5));
    CHECK(any_contains(
        out.warnings,
        "vectorization intensity 9.5 outside [1, 8] for double precision"));
}

TEST_CASE("absent vpu counters fall back to the configured intensity") {
    const SynthRun run = generate(quick_scenario());
    AnalyzeOptions opt;
    opt.counters.mic_vpu_elements = "NOT_A_COUNTER";
    opt.counters.mic_vpu_instructions = "ALSO_NOT";
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config, opt);
    CHECK(out.report.vector_intensity ==
          run.truth.report.config.vector_intensity);
    CHECK(any_contains(
        out.warnings,
        "vpu counters absent; using the configured vector intensity"));
}

TEST_CASE("absent cycle counters degrade bandwidths to warnings") {
    const SynthRun run = generate(quick_scenario());
    AnalyzeOptions opt;
    opt.counters.mic_unhalted_cycles = "MISSING";
    opt.counters.host_unhalted_cycles = "MISSING_TOO";
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config, opt);
    CHECK(out.report.mic_bandwidth_bps == 0.0);
    CHECK(out.report.host_comm_bandwidth_bps == 0.0);
    CHECK(any_contains(
        out.warnings,
        "device cycle counter absent; device bandwidth not computed"));
    CHECK(any_contains(
        out.warnings,
        "host cycle counter absent; host comm bandwidth not computed"));
}

TEST_CASE("zero transfer time degrades pci bandwidth to a warning") {
    Scenario s = quick_scenario();
    s.offload.pci_to_s = 0.0;
    s.offload.pci_from_s = 0.0;
    const SynthRun run = generate(s);
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);
    CHECK(out.report.pci_bandwidth_bps == 0.0);
    CHECK(any_contains(out.warnings,
                       "pci transfer time is zero; pci bandwidth not computed"));
}

TEST_CASE("a run directory loads every stream by file name") {
    Scenario s = quick_scenario();
    s.config.nodes = 1;
    const SynthRun run = generate(s);
    TempDir dir;
    write_run(dir, run, true);
    const ParsedRun parsed = load_run_dir(dir.path());
    CHECK(parsed.app.size() == 1);
    CHECK(parsed.host_power.count(0) == 1);
    CHECK(parsed.mic_power.count({0, 0}) == 1);
    CHECK_FALSE(parsed.offloads.empty());
}

TEST_CASE("missing artifacts name the absent file") {
    TempDir dir;
    CHECK(contains(
        message_of<AnalyzeError>([&] { load_run_dir(dir.path()); }),
        "missing app.out in"));
    write_file(dir / "app.out", "TIMER loop 1.000000\n");
    CHECK(contains(
        message_of<AnalyzeError>([&] { load_run_dir(dir.path()); }),
        "missing offload.rpt in"));
    CHECK(contains(message_of<AnalyzeError>(
                       [&] { load_run_dir(dir.path() / "nope"); }),
                   "is not a run directory"));
}

TEST_CASE("parse failures carry the file name as context") {
    TempDir dir;
    write_file(dir / "app.out", "[0] BANANA 3\n");
    write_file(dir / "offload.rpt", "");
    const std::string msg =
        message_of<AnalyzeError>([&] { load_run_dir(dir.path()); });
    CHECK(contains(msg, "app.out:"));
    CHECK(contains(msg, "unknown app line keyword 'BANANA'"));
}

TEST_CASE("run configuration prefers the manifest over the truth file") {
    const SynthRun run = generate(quick_scenario());
    TempDir dir;
    write_run(dir, run, true);
    write_file(dir / "manifest",
               "{\n"
               "  \"run_id\": \"run-000\",\n"
               "  \"config\": {\n"
               "    \"system_name\": \"manifested\",\n"
               "    \"nodes\": 1,\n"
               "    \"mics_per_node\": 1,\n"
               "    \"problem_size\": 40,\n"
               "    \"host_frequency_hz\": 2.5e9,\n"
               "    \"mic_cores\": 57,\n"
               "    \"mic_frequency_hz\": 1.05e9,\n"
               "    \"vector_intensity\": 2.0,\n"
               "    \"ops_per_cycle\": 1.2,\n"
               "    \"precision\": \"double\"\n"
               "  }\n"
               "}\n");
    std::vector<std::string> warnings;
    const RunConfig c = load_run_config(dir.path(), &warnings);
    CHECK(c.system_name == "manifested");
    CHECK(c.mic_cores == 57);
    CHECK(warnings.empty());
}

TEST_CASE("without a manifest the truth file supplies the configuration") {
    Scenario s = quick_scenario();
    s.config.system_name = "from-truth";
    const SynthRun run = generate(s);
    TempDir dir;
    write_run(dir, run, true);
    std::vector<std::string> warnings;
    const RunConfig c = load_run_config(dir.path(), &warnings);
    CHECK(c.system_name == "from-truth");
    CHECK(warnings.empty());
}

TEST_CASE("a bare directory analyzes with defaults and a warning") {
    const SynthRun run = generate(quick_scenario());
    TempDir dir;
    write_run(dir, run, false);
    std::vector<std::string> warnings;
    const RunConfig c = load_run_config(dir.path(), &warnings);
    CHECK(c.nodes == RunConfig{}.nodes);
    CHECK(any_contains(warnings, "no manifest or truth.json in"));
    CHECK(any_contains(warnings, "analyzing with the default configuration"));

    const AnalyzedRun out = analyze_run_dir(dir.path());
    CHECK(any_contains(out.warnings, "no manifest or truth.json in"));
}

TEST_CASE("a corrupt manifest fails loudly instead of falling through") {
    const SynthRun run = generate(quick_scenario());
    TempDir dir;
    write_run(dir, run, true);
    write_file(dir / "manifest", "{broken");
    CHECK(contains(message_of<AnalyzeError>(
                       [&] { load_run_config(dir.path(), nullptr); }),
                   "bad manifest in"));
}

TEST_CASE("analyzing a directory end to end matches in-memory analysis") {
    const SynthRun run = generate(quick_scenario());
    TempDir dir;
    write_run(dir, run, true);
    const AnalyzedRun from_dir = analyze_run_dir(dir.path());
    const AnalyzedRun in_memory =
        analyze_run(parse_run(run), run.truth.report.config);
    CHECK(from_dir.report.total_energy_j ==
          doctest::Approx(in_memory.report.total_energy_j));
    CHECK(from_dir.report.phases.mic_compute_s ==
          doctest::Approx(in_memory.report.phases.mic_compute_s));
}

TEST_CASE("the json report document carries offsets and warnings") {
    const SynthRun run = generate(quick_scenario());
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);
    const std::string text = report_to_json_text(out);
    CHECK(contains(text, "\"report\""));
    CHECK(contains(text, "\"stream_offsets\""));
    CHECK(contains(text, "\"warnings\""));
    CHECK(contains(text, "\"host-0\""));
}

TEST_CASE("the csv row is one flat line under a 33-column header") {
    const std::string header = csv_header();
    const auto count_fields = [](const std::string& line) {
        std::size_t n = 1;
        for (char c : line)
            if (c == ',') ++n;
        return n;
    };
    CHECK(count_fields(header) == 33);
    CHECK(header.rfind("run_id,", 0) == 0);
    CHECK(header.find(",warnings") == header.size() - 9);

    const SynthRun run = generate(quick_scenario());
    const AnalyzedRun out =
        analyze_run(parse_run(run), run.truth.report.config);
    const std::string row = csv_row("run-007", out);
    CHECK(count_fields(row) == 33);
    CHECK(row.rfind("run-007,", 0) == 0);
    CHECK(contains(row, ",offload_difference,"));
    // The row ends with the warning count.
    CHECK(row.substr(row.rfind(',') + 1) ==
          std::to_string(out.warnings.size()));
}

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "phiprof/metrics.hpp"
#include "phiprof/model.hpp"

namespace phiprof {

struct SynthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PowerLevels {
    double idle_watts = 62.0;
    double active_watts = 148.0;
    double noise_sigma_watts = 0.0;
};

// Per-iteration host phase durations (seconds). Deliberately non-round
// defaults: event times then cover the sub-second range densely, which is
// what keeps wall-clock quantization from hiding the true offsets.
struct PhaseShape {
    double position_s = 0.357;
    double velocity_s = 0.243;
    double redistribute_compute_s = 0.311;
    double halo_exchange_s = 0.403;
    double reduce_s = 0.337;
};

// One offload template, repeated per_iteration times each iteration.
// The host-side window is cpu_overhead + pci_to + mic + pci_from; the
// device is active for the whole window.
struct OffloadShape {
    int per_iteration = 2;
    double mic_s = 1.073;
    double pci_to_s = 0.161;
    double pci_from_s = 0.127;
    double cpu_overhead_s = 0.0;
    bool cpu_time_reported = true;
    std::uint64_t bytes_to = 900000000;
    std::uint64_t bytes_from = 500000000;
    std::uint64_t llc_fill_misses = 30000000;
    std::uint64_t unhalted_cycles = 1200000000;
    std::uint64_t vpu_elements = 5200000000;
    std::uint64_t vpu_instructions = 2000000000;
};

// Host counter activity as per-second rates, split comm vs. everything
// else; sample deltas are rate x period.
struct HostCounterShape {
    std::uint64_t llc_miss_per_s_comm = 400000000;
    std::uint64_t llc_miss_per_s_other = 90000000;
    std::uint64_t cycles_per_s_comm = 2600000000;
    std::uint64_t cycles_per_s_other = 2600000000;
};

struct Scenario {
    std::string name = "default";
    std::uint64_t seed = 1;
    RunConfig config;
    int iterations = 10;
    double startup_s = 1.53;   // app time before the main loop
    double shutdown_s = 0.81;  // app time after the main loop
    PhaseShape phases;
    OffloadShape offload;
    PowerLevels host_power{62.0, 148.0, 0.0};
    PowerLevels mic_power{98.0, 162.0, 0.0};
    HostCounterShape host_counters;
    // Trace cadences. Slightly off-grid periods make the sub-second parts
    // of the anchors sweep the whole second, so offset recovery stays well
    // inside tolerance; the real-sampler defaults remain 10/50 ms.
    double host_period_s = 0.0101;
    double mic_period_s = 0.0503;
    double pre_run_s = 20.0;   // sampler lead before app start
    double post_run_s = 10.0;  // sampler tail after app end
    double rank_skew_s = 0.101;  // rank r's app starts at r x skew
    int wall_start_seconds = 47102;      // seconds of day at app start
    double wall_start_fraction = 0.37;   // sub-second part of the above
    std::map<std::string, double> explicit_offsets;  // per-stream overrides
    CounterNames counter_names;
};

// Everything the analyzer should recover from the generated artifacts.
// Power figures are realized sample statistics under the true offsets,
// not nominal levels, so recovery error isolates attribution arithmetic
// from noise.
struct GroundTruth {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::map<std::string, double> stream_offsets;  // true offsets, seconds
    RunReport report;
};

struct SynthRun {
    // File name -> content: host-<n>.log, mic-<n>-<d>.log, app.out,
    // offload.rpt.
    std::map<std::string, std::string> files;
    GroundTruth truth;
};

// Deterministic generation: identical scenario (seed included) produces
// byte-identical files. Throws SynthError on infeasible scenarios.
SynthRun generate(const Scenario& scenario);

// Scenario and truth documents (JSON).
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
std::string truth_to_json(const GroundTruth& t);
GroundTruth truth_from_json(const std::string& text);

// Seeded deterministic RNG used by the generator: splitmix64 stream with
// a Box-Muller transform for the Gaussian noise. Hand-rolled so outputs
// are identical across standard libraries.
class SynthRng {
  public:
    explicit SynthRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double next_unit();   // uniform [0, 1)
    double next_gauss();  // standard normal

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace phiprof

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace phiprof {

// One sampler/event anchor: a 1-second wall-clock stamp plus the stream's
// own time-from-start with millisecond precision. Wall clock carries no
// date; cross-midnight streams are handled by mod-24h differencing.
struct TimeAnchor {
    int hour = 0;    // 0..23
    int minute = 0;  // 0..59
    int second = 0;  // 0..59
    double tfs = 0.0;

    int wall_seconds() const { return hour * 3600 + minute * 60 + second; }
};

constexpr int kSecondsPerDay = 86400;

struct HostPowerSample {
    TimeAnchor anchor;
    double core_watts = 0.0;
    double dram_watts = 0.0;
    double total_watts = 0.0;  // core + dram; uncore is excluded
};

struct MicPowerSample {
    TimeAnchor anchor;
    double pcie_watts = 0.0;
    double c2x3_watts = 0.0;
    double c2x4_watts = 0.0;
    double total_watts = 0.0;  // connector sum
    // Window-average readings if the line carried them; stored, never used
    // in place of the connector sum.
    std::optional<double> win0_watts;
    std::optional<double> win1_watts;
};

// Counter names are opaque configuration strings; values are deltas
// accumulated since the previous sample, not running totals.
struct PerfSample {
    TimeAnchor anchor;
    std::map<std::string, std::uint64_t> counters;
};

struct OffloadRecord {
    int rank = 0;
    int device_id = 0;
    int tag = 0;
    double cpu_time_s = 0.0;  // 0.0 encodes "undefined"
    double mic_time_s = 0.0;
    std::uint64_t bytes_to_device = 0;
    std::uint64_t bytes_from_device = 0;
    std::map<std::string, std::uint64_t> counters;  // offload-scoped totals

    bool cpu_time_defined() const { return cpu_time_s > 0.0; }
};

// Timer names every application timeline must expose.
inline const std::vector<std::string>& required_timers() {
    static const std::vector<std::string> names = {
        "position", "velocity",       "redistribute", "force",
        "halo_exchange", "reduce",    "inner_transfer", "loop"};
    return names;
}

struct AppTimeline {
    int rank = 0;
    std::map<std::string, double> named_timers;
    std::vector<std::pair<std::string, TimeAnchor>> event_anchors;

    double timer(const std::string& name) const;
    bool has_timer(const std::string& name) const {
        return named_timers.count(name) != 0;
    }
};

enum class Precision { kSingle, kDouble };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

struct RunConfig {
    std::string system_name = "unknown";
    int nodes = 1;
    int mics_per_node = 1;
    int problem_size = 50;
    double host_frequency_hz = 2.6e9;
    int mic_cores = 60;
    double mic_frequency_hz = 1.1e9;
    double vector_intensity = 2.6;  // measured default
    double ops_per_cycle = 1.15;    // estimated default
    Precision precision = Precision::kDouble;
};

enum class PciMethod { kOffloadDifference, kResidual };

std::string to_string(PciMethod m);

// Fraction of loop time that may remain unattributed before the
// accounting invariant trips.
constexpr double kPhaseSlackFraction = 0.02;

struct PhaseTimings {
    double host_compute_s = 0.0;
    double halo_exchange_s = 0.0;
    double reduce_s = 0.0;
    double mic_compute_s = 0.0;
    double pci_transfer_s = 0.0;
    double loop_total_s = 0.0;
    PciMethod pci_method = PciMethod::kOffloadDifference;
};

// Identifies one measured device: a host package (per node) or one MIC.
struct DeviceKey {
    enum class Kind { kHost, kMic };
    Kind kind = Kind::kHost;
    int node = 0;
    int device = -1;  // meaningful for kMic only

    static DeviceKey host(int node) { return {Kind::kHost, node, -1}; }
    static DeviceKey mic(int node, int device) {
        return {Kind::kMic, node, device};
    }
    std::string label() const;

    friend bool operator<(const DeviceKey& a, const DeviceKey& b) {
        return std::tie(a.kind, a.node, a.device) <
               std::tie(b.kind, b.node, b.device);
    }
    friend bool operator==(const DeviceKey& a, const DeviceKey& b) {
        return a.kind == b.kind && a.node == b.node && a.device == b.device;
    }
};

constexpr std::size_t kMinStateSamples = 100;

struct DeviceStateReport {
    DeviceKey device;
    double idle_watts_avg = 0.0;
    double active_watts_avg = 0.0;
    std::size_t idle_samples = 0;
    std::size_t active_samples = 0;
    double idle_time_s = 0.0;
    double active_time_s = 0.0;
    double energy_j = 0.0;
    bool low_sample_warning = false;
};

struct RunReport {
    RunConfig config;
    PhaseTimings phases;
    std::vector<DeviceStateReport> device_states;
    std::uint64_t mic_mem_bytes = 0;
    std::uint64_t host_comm_mem_bytes = 0;
    std::uint64_t pci_mem_bytes = 0;
    double mic_bandwidth_bps = 0.0;
    double host_comm_bandwidth_bps = 0.0;
    double pci_bandwidth_bps = 0.0;
    double vector_intensity = 0.0;
    double throughput_flops = 0.0;
    double work_flop = 0.0;
    double total_energy_j = 0.0;
};

// ----------------------------------------------------------------------
// Validation. Violations are data, not failures: constructing an
// inconsistent value is allowed, validate() names what is wrong.

struct Violation {
    std::string field;
    std::string rule;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool has(const std::string& field) const;
    std::string describe() const;
};

ValidationResult validate(const TimeAnchor& a);
ValidationResult validate(const HostPowerSample& s);
ValidationResult validate(const MicPowerSample& s);
ValidationResult validate(const PerfSample& s);
ValidationResult validate(const OffloadRecord& r);
ValidationResult validate(const AppTimeline& t);
ValidationResult validate(const RunConfig& c);
ValidationResult validate(const PhaseTimings& p);
ValidationResult validate(const DeviceStateReport& r);
ValidationResult validate(const RunReport& r);

// Stream-level anchor checks: tfs strictly increasing, and wall-clock
// deltas (mod 24h) consistent with tfs deltas to 1 s + tolerance.
ValidationResult validate_anchor_stream(const std::vector<TimeAnchor>& anchors,
                                        double tolerance_s);

}  // namespace phiprof

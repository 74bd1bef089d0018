#include "phiprof/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace phiprof {

namespace {

bool nearly_equal(double a, double b, double rel = 1e-9) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= rel * scale;
}

}  // namespace

double AppTimeline::timer(const std::string& name) const {
    auto it = named_timers.find(name);
    if (it == named_timers.end())
        throw std::out_of_range("rank " + std::to_string(rank) +
                                " missing timer " + name);
    return it->second;
}

std::string to_string(Precision p) {
    return p == Precision::kSingle ? "single" : "double";
}

Precision precision_from_string(const std::string& s) {
    if (s == "single") return Precision::kSingle;
    if (s == "double") return Precision::kDouble;
    throw std::invalid_argument("unknown precision '" + s + "'");
}

std::string to_string(PciMethod m) {
    return m == PciMethod::kOffloadDifference ? "offload_difference"
                                              : "residual";
}

std::string DeviceKey::label() const {
    if (kind == Kind::kHost) return "host-" + std::to_string(node);
    return "mic-" + std::to_string(node) + "-" + std::to_string(device);
}

bool ValidationResult::has(const std::string& field) const {
    for (const auto& v : violations)
        if (v.field == field) return true;
    return false;
}

std::string ValidationResult::describe() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.field << ": " << v.rule << "\n";
    return os.str();
}

ValidationResult validate(const TimeAnchor& a) {
    ValidationResult r;
    if (a.hour < 0 || a.hour > 23)
        r.violations.push_back({"hour", "hour in [0,23]"});
    if (a.minute < 0 || a.minute > 59)
        r.violations.push_back({"minute", "minute in [0,59]"});
    if (a.second < 0 || a.second > 59)
        r.violations.push_back({"second", "second in [0,59]"});
    if (!(a.tfs >= 0.0)) r.violations.push_back({"tfs", "tfs >= 0"});
    return r;
}

ValidationResult validate(const HostPowerSample& s) {
    ValidationResult r = validate(s.anchor);
    if (s.core_watts < 0.0)
        r.violations.push_back({"core_watts", "core_watts >= 0"});
    if (s.dram_watts < 0.0)
        r.violations.push_back({"dram_watts", "dram_watts >= 0"});
    if (s.total_watts != s.core_watts + s.dram_watts)
        r.violations.push_back(
            {"total_watts", "total_watts == core_watts + dram_watts"});
    return r;
}

ValidationResult validate(const MicPowerSample& s) {
    ValidationResult r = validate(s.anchor);
    if (s.pcie_watts < 0.0)
        r.violations.push_back({"pcie_watts", "pcie_watts >= 0"});
    if (s.c2x3_watts < 0.0)
        r.violations.push_back({"c2x3_watts", "c2x3_watts >= 0"});
    if (s.c2x4_watts < 0.0)
        r.violations.push_back({"c2x4_watts", "c2x4_watts >= 0"});
    if (s.total_watts != s.pcie_watts + s.c2x3_watts + s.c2x4_watts)
        r.violations.push_back(
            {"total_watts", "total_watts == pcie + c2x3 + c2x4"});
    return r;
}

ValidationResult validate(const PerfSample& s) {
    // Deltas are unsigned by type; only the anchor can be out of range.
    return validate(s.anchor);
}

ValidationResult validate(const OffloadRecord& rec) {
    ValidationResult r;
    if (rec.rank < 0) r.violations.push_back({"rank", "rank >= 0"});
    if (rec.device_id < 0)
        r.violations.push_back({"device_id", "device_id >= 0"});
    if (rec.cpu_time_s < 0.0)
        r.violations.push_back({"cpu_time_s", "cpu_time_s >= 0"});
    if (rec.mic_time_s < 0.0)
        r.violations.push_back({"mic_time_s", "mic_time_s >= 0"});
    if (rec.cpu_time_s > 0.0 && rec.cpu_time_s < rec.mic_time_s)
        r.violations.push_back(
            {"cpu_time_s", "cpu_time >= mic_time when defined"});
    return r;
}

ValidationResult validate(const AppTimeline& t) {
    ValidationResult r;
    for (const auto& name : required_timers()) {
        if (!t.has_timer(name)) {
            r.violations.push_back({name, "required timer present"});
        }
    }
    for (const auto& [name, value] : t.named_timers) {
        if (value < 0.0) r.violations.push_back({name, "timer >= 0"});
    }
    if (t.has_timer("loop")) {
        double loop = t.named_timers.at("loop");
        for (const auto& [name, value] : t.named_timers) {
            if (name == "loop") continue;
            if (value > loop + 1e-9)
                r.violations.push_back({name, "loop >= " + name});
        }
    }
    return r;
}

ValidationResult validate(const RunConfig& c) {
    ValidationResult r;
    if (c.nodes < 1) r.violations.push_back({"nodes", "nodes >= 1"});
    if (c.mics_per_node < 0)
        r.violations.push_back({"mics_per_node", "mics_per_node >= 0"});
    if (c.problem_size < 1)
        r.violations.push_back({"problem_size", "problem_size >= 1"});
    if (c.host_frequency_hz <= 0.0)
        r.violations.push_back({"host_frequency_hz", "frequency > 0"});
    if (c.mic_cores < 1) r.violations.push_back({"mic_cores", "mic_cores >= 1"});
    if (c.mic_frequency_hz <= 0.0)
        r.violations.push_back({"mic_frequency_hz", "frequency > 0"});
    if (c.ops_per_cycle <= 0.0)
        r.violations.push_back({"ops_per_cycle", "ops_per_cycle > 0"});
    double vi_max = c.precision == Precision::kSingle ? 16.0 : 8.0;
    if (c.vector_intensity < 1.0 || c.vector_intensity > vi_max) {
        r.violations.push_back(
            {"vector_intensity",
             "VI in [1," + std::to_string(static_cast<int>(vi_max)) + "] for " +
                 to_string(c.precision)});
    }
    return r;
}

ValidationResult validate(const PhaseTimings& p) {
    ValidationResult r;
    auto check = [&r](const char* field, double v) {
        if (v < 0.0) r.violations.push_back({field, "time >= 0"});
    };
    check("host_compute_s", p.host_compute_s);
    check("halo_exchange_s", p.halo_exchange_s);
    check("reduce_s", p.reduce_s);
    check("mic_compute_s", p.mic_compute_s);
    check("pci_transfer_s", p.pci_transfer_s);
    check("loop_total_s", p.loop_total_s);
    double parts = p.host_compute_s + p.halo_exchange_s + p.reduce_s +
                   p.mic_compute_s + p.pci_transfer_s;
    if (parts > p.loop_total_s * (1.0 + kPhaseSlackFraction) + 1e-9) {
        r.violations.push_back(
            {"loop_total_s", "phase sum <= loop * (1 + 2% slack)"});
    }
    return r;
}

ValidationResult validate(const DeviceStateReport& rep) {
    ValidationResult r;
    if (rep.idle_time_s < 0.0)
        r.violations.push_back({"idle_time_s", "time >= 0"});
    if (rep.active_time_s < 0.0)
        r.violations.push_back({"active_time_s", "time >= 0"});
    double expected = rep.idle_watts_avg * rep.idle_time_s +
                      rep.active_watts_avg * rep.active_time_s;
    if (!nearly_equal(rep.energy_j, expected))
        r.violations.push_back(
            {"energy_j", "energy == idle_avg*idle_time + active_avg*active_time"});
    bool low = rep.idle_samples < kMinStateSamples ||
               rep.active_samples < kMinStateSamples;
    if (low && !rep.low_sample_warning)
        r.violations.push_back(
            {"low_sample_warning", "warning flag set when a state count < 100"});
    return r;
}

ValidationResult validate(const RunReport& rep) {
    ValidationResult r = validate(rep.config);
    ValidationResult phases = validate(rep.phases);
    r.violations.insert(r.violations.end(), phases.violations.begin(),
                        phases.violations.end());
    double sum = 0.0;
    for (const auto& d : rep.device_states) {
        ValidationResult dv = validate(d);
        r.violations.insert(r.violations.end(), dv.violations.begin(),
                            dv.violations.end());
        sum += d.energy_j;
    }
    if (!nearly_equal(rep.total_energy_j, sum))
        r.violations.push_back(
            {"total_energy_j", "total energy == sum of device energies"});
    return r;
}

ValidationResult validate_anchor_stream(const std::vector<TimeAnchor>& anchors,
                                        double tolerance_s) {
    ValidationResult r;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        ValidationResult a = validate(anchors[i]);
        r.violations.insert(r.violations.end(), a.violations.begin(),
                            a.violations.end());
        if (i == 0) continue;
        const TimeAnchor& prev = anchors[i - 1];
        const TimeAnchor& cur = anchors[i];
        if (cur.tfs <= prev.tfs) {
            r.violations.push_back(
                {"tfs", "strictly increasing (" + std::to_string(prev.tfs) +
                            " then " + std::to_string(cur.tfs) + ")"});
            continue;
        }
        double wall_delta = cur.wall_seconds() - prev.wall_seconds();
        if (wall_delta < 0) wall_delta += kSecondsPerDay;
        double tfs_delta = std::fmod(cur.tfs - prev.tfs, kSecondsPerDay);
        if (std::fabs(wall_delta - tfs_delta) > 1.0 + tolerance_s) {
            r.violations.push_back(
                {"wall_clock",
                 "wall delta and tfs delta agree to 1 s + tolerance"});
        }
    }
    return r;
}

}  // namespace phiprof

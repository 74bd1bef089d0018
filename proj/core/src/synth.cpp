#include "phiprof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "json_codec.hpp"
#include "phiprof/grammar.hpp"
#include "phiprof/parsers.hpp"
#include "phiprof/phase.hpp"
#include "phiprof/power.hpp"
#include "phiprof/timeline.hpp"

namespace phiprof {

std::uint64_t SynthRng::next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double SynthRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SynthRng::next_gauss() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = next_unit();
    while (u1 == 0.0) u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

namespace {

using Span = std::pair<double, double>;
using SpanList = std::vector<Span>;

double round_ms(double s) {
    return std::round(s * 1000.0) / 1000.0;
}

// Sorted, non-overlapping span membership with half-open [begin, end)
// semantics, matching the attribution boundary rule.
bool inside(const SpanList& spans, double t) {
    auto it = std::upper_bound(
        spans.begin(), spans.end(), t,
        [](double v, const Span& s) { return v < s.first; });
    if (it == spans.begin()) return false;
    --it;
    return t < it->second;
}

// State at a global instant under the analyzer's window semantics:
// half-open windows, idle outside the covered span.
bool active_at(const std::vector<StateWindow>& windows, double t) {
    auto it = std::upper_bound(
        windows.begin(), windows.end(), t,
        [](double v, const StateWindow& w) { return v < w.begin_s; });
    if (it == windows.begin()) return false;
    --it;
    if (t >= it->end_s) return false;
    return it->active;
}

SpanList merged(SpanList spans) {
    std::sort(spans.begin(), spans.end());
    SpanList out;
    for (const Span& s : spans) {
        if (s.second <= s.first) continue;
        if (!out.empty() && s.first <= out.back().second)
            out.back().second = std::max(out.back().second, s.second);
        else
            out.push_back(s);
    }
    return out;
}

// Global-time schedule of one rank (= one node).
struct RankSchedule {
    double app_begin = 0.0;
    double app_end = 0.0;
    SpanList comm;         // halo + reduce windows, ms-rounded like events
    AppTimeline timeline;  // rounded anchors, exact timers
};

void check_feasible(const Scenario& s) {
    auto fail = [](const std::string& what) { throw SynthError(what); };
    if (s.iterations < 1) fail("infeasible scenario: iterations < 1");
    if (s.config.nodes < 1) fail("infeasible scenario: nodes < 1");
    if (s.config.mics_per_node < 1)
        fail("infeasible scenario: mics_per_node < 1");
    if (s.startup_s < 0 || s.shutdown_s < 0)
        fail("infeasible scenario: negative startup/shutdown");
    const PhaseShape& p = s.phases;
    if (p.position_s < 0 || p.velocity_s < 0 || p.redistribute_compute_s < 0 ||
        p.halo_exchange_s < 0 || p.reduce_s < 0)
        fail("infeasible scenario: negative phase duration");
    const OffloadShape& o = s.offload;
    if (o.per_iteration < 0)
        fail("infeasible scenario: negative offloads per iteration");
    if (o.per_iteration > 0) {
        if (o.mic_s <= 0) fail("infeasible scenario: offload mic time <= 0");
        if (o.pci_to_s < 0 || o.pci_from_s < 0 || o.cpu_overhead_s < 0)
            fail("infeasible scenario: negative offload component");
    }
    if (s.host_power.idle_watts < 0 || s.host_power.active_watts < 0 ||
        s.mic_power.idle_watts < 0 || s.mic_power.active_watts < 0)
        fail("infeasible scenario: negative power level");
    if (s.host_power.noise_sigma_watts < 0 || s.mic_power.noise_sigma_watts < 0)
        fail("infeasible scenario: negative noise sigma");
    if (s.host_period_s <= 0) fail("infeasible scenario: host period <= 0");
    if (s.mic_period_s < 0.050 - 1e-12)
        fail("infeasible scenario: mic period below the 50 ms update floor");
    if (s.pre_run_s < 0 || s.post_run_s < 0)
        fail("infeasible scenario: negative sampler lead/tail");
    if (s.rank_skew_s < 0) fail("infeasible scenario: negative rank skew");
    if (s.wall_start_seconds < 0 || s.wall_start_seconds >= kSecondsPerDay)
        fail("infeasible scenario: wall start outside a day");
    if (s.wall_start_fraction < 0 || s.wall_start_fraction >= 1.0)
        fail("infeasible scenario: wall start fraction outside [0,1)");
    const double iteration = p.position_s + p.velocity_s +
                             p.redistribute_compute_s + p.halo_exchange_s +
                             p.reduce_s +
                             o.per_iteration * (o.cpu_overhead_s + o.pci_to_s +
                                                o.mic_s + o.pci_from_s);
    if (iteration <= 0) fail("infeasible scenario: empty iteration");
    for (const auto& [stream, offset] : s.explicit_offsets) {
        (void)offset;
        if (stream.rfind("host-", 0) != 0 && stream.rfind("mic-", 0) != 0)
            fail("infeasible scenario: explicit offset for unknown stream " +
                 stream);
    }
}

// Wall-clock anchor for a stream sample: the stream's own tfs rounded to
// the grammar's millisecond precision, plus the floor-quantized wall
// stamp at the true global instant.
TimeAnchor make_anchor(const Scenario& s, double global, double tfs) {
    const double wall = s.wall_start_seconds + s.wall_start_fraction + global;
    long long whole = static_cast<long long>(std::floor(wall));
    whole %= kSecondsPerDay;
    if (whole < 0) whole += kSecondsPerDay;
    TimeAnchor a;
    a.hour = static_cast<int>(whole / 3600);
    a.minute = static_cast<int>((whole / 60) % 60);
    a.second = static_cast<int>(whole % 60);
    a.tfs = round_ms(tfs);
    return a;
}

RankSchedule build_rank_schedule(const Scenario& s, int rank) {
    const PhaseShape& p = s.phases;
    const OffloadShape& o = s.offload;
    const double window =
        o.cpu_overhead_s + o.pci_to_s + o.mic_s + o.pci_from_s;
    const double iteration = p.position_s + p.velocity_s +
                             p.redistribute_compute_s + p.halo_exchange_s +
                             o.per_iteration * window + p.reduce_s;
    const int n = s.iterations;

    RankSchedule sched;
    sched.app_begin = rank * s.rank_skew_s;
    const double loop_begin = sched.app_begin + s.startup_s;

    sched.timeline.rank = rank;
    auto& timers = sched.timeline.named_timers;
    timers["position"] = n * p.position_s;
    timers["velocity"] = n * p.velocity_s;
    timers["redistribute"] = n * (p.redistribute_compute_s + p.halo_exchange_s);
    timers["halo_exchange"] = n * p.halo_exchange_s;
    timers["force"] = n * o.per_iteration * window;
    timers["reduce"] = n * p.reduce_s;
    timers["inner_transfer"] =
        n * o.per_iteration * (o.pci_to_s + o.pci_from_s);
    timers["loop"] = n * iteration;

    auto& events = sched.timeline.event_anchors;
    auto emit = [&](const std::string& name, double global) {
        events.emplace_back(name,
                            make_anchor(s, global, global - sched.app_begin));
    };
    emit("app_begin", sched.app_begin);
    emit("loop_begin", loop_begin);
    // One running clock across iterations so coincident boundaries stay
    // byte-identical and event order survives float accumulation.
    double t = loop_begin;
    for (int i = 0; i < n; ++i) {
        emit("position_begin", t);
        t += p.position_s;
        emit("position_end", t);
        emit("velocity_begin", t);
        t += p.velocity_s;
        emit("velocity_end", t);
        emit("redistribute_begin", t);
        t += p.redistribute_compute_s;
        emit("halo_exchange_begin", t);
        t += p.halo_exchange_s;
        emit("halo_exchange_end", t);
        emit("redistribute_end", t);
        sched.comm.push_back({round_ms(t - p.halo_exchange_s), round_ms(t)});
        emit("force_begin", t);
        for (int j = 0; j < o.per_iteration; ++j) {
            emit("offload_begin", t);
            t += window;
            emit("offload_end", t);
        }
        emit("force_end", t);
        emit("reduce_begin", t);
        sched.comm.push_back({round_ms(t), round_ms(t + p.reduce_s)});
        t += p.reduce_s;
        emit("reduce_end", t);
    }
    emit("loop_end", t);
    t += s.shutdown_s;
    emit("app_end", t);
    sched.app_end = t;
    sched.comm = merged(std::move(sched.comm));
    return sched;
}

std::vector<OffloadRecord> build_offloads(const Scenario& s, int rank) {
    const OffloadShape& o = s.offload;
    const double window =
        o.cpu_overhead_s + o.pci_to_s + o.mic_s + o.pci_from_s;
    std::vector<OffloadRecord> records;
    const int total = s.iterations * o.per_iteration;
    records.reserve(total);
    for (int g = 0; g < total; ++g) {
        OffloadRecord r;
        r.rank = rank;
        r.device_id = g % s.config.mics_per_node;
        r.tag = g;
        r.cpu_time_s = o.cpu_time_reported ? window : 0.0;
        r.mic_time_s = o.mic_s;
        r.bytes_to_device = o.bytes_to;
        r.bytes_from_device = o.bytes_from;
        r.counters[s.counter_names.mic_llc_fill_miss] = o.llc_fill_misses;
        r.counters[s.counter_names.mic_unhalted_cycles] = o.unhalted_cycles;
        r.counters[s.counter_names.mic_vpu_elements] = o.vpu_elements;
        r.counters[s.counter_names.mic_vpu_instructions] = o.vpu_instructions;
        records.push_back(r);
    }
    return records;
}

double clamp0(double w) {
    return w < 0.0 ? 0.0 : w;
}

// Splits a total wattage across domains at the grammar's printed
// precision so re-parsing reproduces the sum exactly.
std::pair<double, double> split_host_watts(double total) {
    const double core = round_ms(0.82 * total);
    const double dram = round_ms(clamp0(total - core));
    return {core, dram};
}

struct MicSplit {
    double pcie, c2x3, c2x4;
};

MicSplit split_mic_watts(double total) {
    const double pcie = round_ms(0.45 * total);
    const double c2x3 = round_ms(0.30 * total);
    const double c2x4 = round_ms(clamp0(total - pcie - c2x3));
    return {pcie, c2x3, c2x4};
}

}  // namespace

SynthRun generate(const Scenario& s) {
    check_feasible(s);
    SynthRng rng(s.seed);

    const int nodes = s.config.nodes;
    const int mics = s.config.mics_per_node;

    std::vector<RankSchedule> schedule;
    schedule.reserve(nodes);
    for (int n = 0; n < nodes; ++n)
        schedule.push_back(build_rank_schedule(s, n));

    // True stream offsets, drawn in a fixed order for determinism. Host
    // samplers start pre_run before the app; MIC samplers follow them by
    // a couple of seconds, mirroring the run-process step order. The rng
    // draw happens even when an explicit override wins, so adding one
    // override never shifts every other stream's noise.
    std::map<std::string, double> offsets;
    for (int n = 0; n < nodes; ++n) {
        const std::string id = host_stream_id(n);
        const double jitter = 0.311 * n + 0.4 * rng.next_unit();
        double start = schedule[n].app_begin - s.pre_run_s - jitter;
        if (auto it = s.explicit_offsets.find(id);
            it != s.explicit_offsets.end())
            start = it->second;
        offsets[id] = start;
    }
    for (int n = 0; n < nodes; ++n)
        for (int d = 0; d < mics; ++d) {
            const std::string id = mic_stream_id(n, d);
            const double lag = 1.7 + 0.23 * d + 0.5 * rng.next_unit();
            double start = schedule[n].app_begin - s.pre_run_s + lag;
            if (auto it = s.explicit_offsets.find(id);
                it != s.explicit_offsets.end())
                start = it->second;
            offsets[id] = start;
        }
    for (int r = 0; r < nodes; ++r)
        offsets[app_stream_id(r)] = schedule[r].app_begin;

    std::map<int, AppTimeline> app;
    std::vector<OffloadRecord> records;
    for (int r = 0; r < nodes; ++r) {
        app[r] = schedule[r].timeline;
        auto own = build_offloads(s, r);
        records.insert(records.end(), own.begin(), own.end());
    }

    SynthRun out;
    out.files["app.out"] = serialize_app_output(app);
    out.files["offload.rpt"] = serialize_offload_report(records);

    // Truth runs the analyzer's own arithmetic under the true offsets, so
    // later recovery error isolates offset estimation and nothing else.
    SyncedTimeline true_tl;
    true_tl.origin_stream = app_stream_id(0);
    true_tl.origin = schedule[0].timeline.event_anchors.front().second;
    true_tl.offsets = offsets;

    PhaseOptions phase_opt;
    std::map<int, PhaseTimings> true_phases;
    std::map<int, StateWindows> true_windows;
    for (int r = 0; r < nodes; ++r) {
        true_phases[r] =
            phases_for_rank(schedule[r].timeline, records, phase_opt, nullptr);
        true_windows[r] =
            build_state_windows(true_phases[r], true_tl, schedule[r].timeline);
    }

    GroundTruth& truth = out.truth;
    truth.scenario_name = s.name;
    truth.seed = s.seed;
    truth.stream_offsets = offsets;
    truth.report.config = s.config;
    truth.report.phases = true_phases.at(0);

    std::uint64_t comm_llc = 0;
    std::uint64_t comm_cycles = 0;
    for (int n = 0; n < nodes; ++n) {
        const std::string id = host_stream_id(n);
        const double start = offsets.at(id);
        const double end = schedule[n].app_end + s.post_run_s;
        const StateWindows& w = true_windows.at(n);

        std::ostringstream log;
        log << "# host power/counter sampler, node " << n << ", period "
            << s.host_period_s << " s, counters package-aggregated\n";
        std::vector<PlacedSample> placed;
        for (std::size_t j = 0;; ++j) {
            const double tfs = round_ms(static_cast<double>(j) * s.host_period_s);
            const double global = start + tfs;
            if (global > end) break;
            const bool active = active_at(w.host, global);
            const double level =
                active ? s.host_power.active_watts : s.host_power.idle_watts;
            const double noisy = clamp0(
                level + s.host_power.noise_sigma_watts * rng.next_gauss());
            const auto [core, dram] = split_host_watts(noisy);

            HostPowerSample power;
            power.anchor = make_anchor(s, global, tfs);
            power.core_watts = core;
            power.dram_watts = dram;
            power.total_watts = core + dram;

            const bool comm = inside(schedule[n].comm, global);
            PerfSample perf;
            perf.anchor = power.anchor;
            perf.counters[s.counter_names.host_llc_miss] =
                static_cast<std::uint64_t>(std::llround(
                    static_cast<double>(comm
                                            ? s.host_counters.llc_miss_per_s_comm
                                            : s.host_counters.llc_miss_per_s_other) *
                    s.host_period_s));
            perf.counters[s.counter_names.host_unhalted_cycles] =
                static_cast<std::uint64_t>(std::llround(
                    static_cast<double>(comm ? s.host_counters.cycles_per_s_comm
                                             : s.host_counters.cycles_per_s_other) *
                    s.host_period_s));
            log << grammar::host_line(power, perf) << '\n';

            placed.push_back({global, power.total_watts});
            if (comm) {
                comm_llc += perf.counters.at(s.counter_names.host_llc_miss);
                comm_cycles +=
                    perf.counters.at(s.counter_names.host_unhalted_cycles);
            }
        }
        out.files[id + ".log"] = log.str();
        truth.report.device_states.push_back(attribute_power(
            DeviceKey::host(n), placed, w.host, w.run_begin_s, w.run_end_s));
    }

    // MIC sampler streams: every device of a node follows the node's
    // offload-window union, the same schedule attribution assumes.
    for (int n = 0; n < nodes; ++n)
        for (int d = 0; d < mics; ++d) {
            const std::string id = mic_stream_id(n, d);
            const double start = offsets.at(id);
            const double end = schedule[n].app_end + s.post_run_s;
            const StateWindows& w = true_windows.at(n);

            std::ostringstream log;
            log << "# mic power sampler, node " << n << ", device " << d
                << ", period " << s.mic_period_s << " s\n";
            std::vector<PlacedSample> placed;
            for (std::size_t j = 0;; ++j) {
                const double tfs =
                    round_ms(static_cast<double>(j) * s.mic_period_s);
                const double global = start + tfs;
                if (global > end) break;
                const bool active = active_at(w.mic, global);
                const double level =
                    active ? s.mic_power.active_watts : s.mic_power.idle_watts;
                const double noisy = clamp0(
                    level + s.mic_power.noise_sigma_watts * rng.next_gauss());
                const MicSplit split = split_mic_watts(noisy);

                MicPowerSample sample;
                sample.anchor = make_anchor(s, global, tfs);
                sample.pcie_watts = split.pcie;
                sample.c2x3_watts = split.c2x3;
                sample.c2x4_watts = split.c2x4;
                sample.total_watts = split.pcie + split.c2x3 + split.c2x4;
                log << grammar::mic_line(sample) << '\n';
                placed.push_back({global, sample.total_watts});
            }
            out.files[id + ".log"] = log.str();
            truth.report.device_states.push_back(
                attribute_power(DeviceKey::mic(n, d), placed, w.mic,
                                w.run_begin_s, w.run_end_s));
        }

    std::sort(truth.report.device_states.begin(),
              truth.report.device_states.end(),
              [](const DeviceStateReport& a, const DeviceStateReport& b) {
                  return a.device < b.device;
              });

    // Derived metrics, mirroring the analyzer's aggregation choices:
    // device metrics aggregate every rank's offloads, PCI bandwidth uses
    // the root rank, host comm metrics aggregate all nodes.
    RunReport& rep = truth.report;
    std::uint64_t llc_fill = 0;
    std::uint64_t mic_cycles = 0;
    std::uint64_t vpu_elem = 0;
    std::uint64_t vpu_instr = 0;
    double mic_aggregate_s = 0.0;
    for (const OffloadRecord& r : records) {
        llc_fill += r.counters.at(s.counter_names.mic_llc_fill_miss);
        mic_cycles += r.counters.at(s.counter_names.mic_unhalted_cycles);
        vpu_elem += r.counters.at(s.counter_names.mic_vpu_elements);
        vpu_instr += r.counters.at(s.counter_names.mic_vpu_instructions);
        mic_aggregate_s += r.mic_time_s;
        rep.pci_mem_bytes += r.bytes_to_device + r.bytes_from_device;
    }
    rep.mic_mem_bytes = memory_bytes(llc_fill);
    if (mic_cycles > 0)
        rep.mic_bandwidth_bps = bandwidth_bps(
            rep.mic_mem_bytes, s.config.mic_frequency_hz, mic_cycles);
    if (vpu_instr > 0)
        rep.vector_intensity =
            vectorization_intensity(vpu_elem, vpu_instr, s.config.precision)
                .value;
    else
        rep.vector_intensity = s.config.vector_intensity;

    std::vector<OffloadRecord> root_records;
    std::uint64_t root_bytes = 0;
    for (const OffloadRecord& r : records)
        if (r.rank == 0) {
            root_records.push_back(r);
            root_bytes += r.bytes_to_device + r.bytes_from_device;
        }
    // Mirror the analyzer: bytes moved in zero transfer time degrade the
    // bandwidth to zero rather than rejecting the scenario.
    if (root_bytes > 0 && truth.report.phases.pci_transfer_s <= 0.0) {
        rep.pci_bandwidth_bps = 0.0;
    } else {
        const PciMetrics pci =
            pci_metrics(root_records, truth.report.phases.pci_transfer_s);
        rep.pci_bandwidth_bps = pci.bandwidth_bps;
    }

    rep.host_comm_mem_bytes = memory_bytes(comm_llc);
    if (comm_cycles > 0)
        rep.host_comm_bandwidth_bps = bandwidth_bps(
            rep.host_comm_mem_bytes, s.config.host_frequency_hz, comm_cycles);

    rep.throughput_flops =
        throughput_flops(s.config.mic_cores, rep.vector_intensity,
                         s.config.ops_per_cycle, s.config.mic_frequency_hz);
    rep.work_flop = work_flop(rep.throughput_flops, mic_aggregate_s);
    for (const DeviceStateReport& d : rep.device_states)
        rep.total_energy_j += d.energy_j;
    return out;
}

}  // namespace phiprof

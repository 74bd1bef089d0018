#include "phiprof/analyze.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "phiprof/grammar.hpp"
#include "phiprof/power.hpp"
#include "phiprof/synth.hpp"

namespace phiprof {
namespace {

using Span = std::pair<double, double>;
using SpanList = std::vector<Span>;

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

bool inside(const SpanList& spans, double t) {
    auto it = std::upper_bound(
        spans.begin(), spans.end(), t,
        [](double v, const Span& s) { return v < s.first; });
    if (it == spans.begin()) return false;
    --it;
    return t < it->second;
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AnalyzeError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Sample-weighted per-kind collapse used by the flat CSV row.
struct KindSummary {
    double idle_w = 0.0, active_w = 0.0, energy_j = 0.0;
    std::size_t idle_n = 0, active_n = 0;

    void add(const DeviceStateReport& d) {
        idle_w += d.idle_watts_avg * static_cast<double>(d.idle_samples);
        active_w += d.active_watts_avg * static_cast<double>(d.active_samples);
        idle_n += d.idle_samples;
        active_n += d.active_samples;
        energy_j += d.energy_j;
    }
    double idle_avg() const {
        return idle_n ? idle_w / static_cast<double>(idle_n) : 0.0;
    }
    double active_avg() const {
        return active_n ? active_w / static_cast<double>(active_n) : 0.0;
    }
};

}  // namespace

AnalyzedRun analyze_run(const ParsedRun& parsed, const RunConfig& config,
                        const AnalyzeOptions& opt) {
    AnalyzedRun out;
    out.report.config = config;
    out.timeline = synchronize(parsed, opt.sync);
    out.phases = profile_phases(parsed, opt.phase);
    out.report.phases = out.phases.root;
    out.warnings = out.phases.warnings;

    bool fallback_suspected = false;
    for (const OffloadRecord& r : parsed.offloads)
        if (r.cpu_time_defined() && r.mic_time_s == 0.0)
            fallback_suspected = true;
    if (fallback_suspected)
        out.warnings.push_back(
            "offload records report cpu time without device time; the force "
            "phase may have fallen back to the host");

    std::uint64_t comm_llc = 0;
    std::uint64_t comm_cycles = 0;
    for (const auto& [rank, app_tl] : parsed.app) {
        const StateWindows windows = build_state_windows(
            out.phases.per_rank.at(rank), out.timeline, app_tl);

        auto low_sample_note = [&](const DeviceStateReport& d) {
            if (!d.low_sample_warning) return;
            out.warnings.push_back(
                "device " + d.device.label() + " has a state under " +
                std::to_string(kMinStateSamples) + " samples (idle " +
                std::to_string(d.idle_samples) + ", active " +
                std::to_string(d.active_samples) + ")");
        };

        auto host_it = parsed.host_power.find(rank);
        if (host_it == parsed.host_power.end()) {
            out.warnings.push_back("no host sampler log for node " +
                                   std::to_string(rank));
        } else {
            const std::string stream = host_stream_id(rank);
            std::vector<PlacedSample> placed;
            placed.reserve(host_it->second.size());
            for (const HostPowerSample& s : host_it->second)
                placed.push_back({to_global(out.timeline, stream, s.anchor.tfs),
                                  s.total_watts});
            DeviceStateReport d =
                attribute_power(DeviceKey::host(rank), placed, windows.host,
                                windows.run_begin_s, windows.run_end_s);
            low_sample_note(d);
            if (!placed.empty() &&
                windows.run_begin_s - placed.front().global_s < 10.0)
                out.warnings.push_back(
                    "idle baseline before the run is under 10 s for " +
                    d.device.label());
            out.report.device_states.push_back(d);
        }

        for (const auto& [key, samples] : parsed.mic_power) {
            if (key.first != rank) continue;
            const std::string stream = mic_stream_id(key.first, key.second);
            std::vector<PlacedSample> placed;
            placed.reserve(samples.size());
            for (const MicPowerSample& s : samples)
                placed.push_back({to_global(out.timeline, stream, s.anchor.tfs),
                                  s.total_watts});
            DeviceStateReport d = attribute_power(
                DeviceKey::mic(key.first, key.second), placed, windows.mic,
                windows.run_begin_s, windows.run_end_s);
            low_sample_note(d);
            out.report.device_states.push_back(d);
        }

        // Host communication counters accumulate only inside comm windows.
        auto named = phase_windows(out.timeline, app_tl);
        SpanList comm;
        for (const char* phase : {"halo_exchange", "reduce"}) {
            auto it = named.find(phase);
            if (it != named.end())
                comm.insert(comm.end(), it->second.begin(), it->second.end());
        }
        comm = merged(std::move(comm));
        auto perf_it = parsed.host_perf.find(rank);
        if (perf_it != parsed.host_perf.end()) {
            const std::string stream = host_stream_id(rank);
            for (const PerfSample& s : perf_it->second) {
                if (!inside(comm, to_global(out.timeline, stream, s.anchor.tfs)))
                    continue;
                if (auto c = s.counters.find(opt.counters.host_llc_miss);
                    c != s.counters.end())
                    comm_llc += c->second;
                if (auto c = s.counters.find(opt.counters.host_unhalted_cycles);
                    c != s.counters.end())
                    comm_cycles += c->second;
            }
        }
    }

    std::sort(out.report.device_states.begin(), out.report.device_states.end(),
              [](const DeviceStateReport& a, const DeviceStateReport& b) {
                  return a.device < b.device;
              });

    // Offload-scoped metrics: aggregates over every rank's records; PCI
    // bandwidth follows the root rank, whose phase accounting it matches.
    RunReport& rep = out.report;
    std::uint64_t llc_fill = 0, mic_cycles = 0, vpu_elem = 0, vpu_instr = 0;
    double mic_aggregate_s = 0.0;
    for (const OffloadRecord& r : parsed.offloads) {
        auto grab = [&](const std::string& name) -> std::uint64_t {
            auto it = r.counters.find(name);
            return it == r.counters.end() ? 0 : it->second;
        };
        llc_fill += grab(opt.counters.mic_llc_fill_miss);
        mic_cycles += grab(opt.counters.mic_unhalted_cycles);
        vpu_elem += grab(opt.counters.mic_vpu_elements);
        vpu_instr += grab(opt.counters.mic_vpu_instructions);
        mic_aggregate_s += r.mic_time_s;
        rep.pci_mem_bytes += r.bytes_to_device + r.bytes_from_device;
    }

    rep.mic_mem_bytes = memory_bytes(llc_fill, opt.cache_line_bytes);
    if (mic_cycles > 0)
        rep.mic_bandwidth_bps = bandwidth_bps(
            rep.mic_mem_bytes, config.mic_frequency_hz, mic_cycles);
    else if (rep.mic_mem_bytes > 0)
        out.warnings.push_back(
            "device cycle counter absent; device bandwidth not computed");

    if (vpu_instr > 0) {
        const VectorIntensity vi =
            vectorization_intensity(vpu_elem, vpu_instr, config.precision);
        rep.vector_intensity = vi.value;
        if (!vi.in_bounds) {
            std::ostringstream msg;
            msg << "vectorization intensity " << vi.value << " outside ["
                << vi.lower_bound << ", " << vi.upper_bound << "] for "
                << to_string(config.precision) << " precision";
            out.warnings.push_back(msg.str());
        }
    } else {
        rep.vector_intensity = config.vector_intensity;
        if (!parsed.offloads.empty())
            out.warnings.push_back(
                "vpu counters absent; using the configured vector intensity");
    }

    const int root = parsed.app.begin()->first;
    std::vector<OffloadRecord> root_records;
    for (const OffloadRecord& r : parsed.offloads)
        if (r.rank == root) root_records.push_back(r);
    std::uint64_t root_bytes = 0;
    for (const OffloadRecord& r : root_records)
        root_bytes += r.bytes_to_device + r.bytes_from_device;
    if (root_bytes > 0 && rep.phases.pci_transfer_s <= 0.0) {
        out.warnings.push_back(
            "pci transfer time is zero; pci bandwidth not computed");
    } else {
        const PciMetrics pci =
            pci_metrics(root_records, rep.phases.pci_transfer_s);
        rep.pci_bandwidth_bps = pci.bandwidth_bps;
    }

    rep.host_comm_mem_bytes = memory_bytes(comm_llc, opt.cache_line_bytes);
    if (comm_cycles > 0)
        rep.host_comm_bandwidth_bps = bandwidth_bps(
            rep.host_comm_mem_bytes, config.host_frequency_hz, comm_cycles);
    else if (rep.host_comm_mem_bytes > 0)
        out.warnings.push_back(
            "host cycle counter absent; host comm bandwidth not computed");

    rep.throughput_flops =
        throughput_flops(config.mic_cores, rep.vector_intensity,
                         config.ops_per_cycle, config.mic_frequency_hz);
    rep.work_flop = work_flop(rep.throughput_flops, mic_aggregate_s);
    for (const DeviceStateReport& d : rep.device_states)
        rep.total_energy_j += d.energy_j;
    return out;
}

ParsedRun load_run_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw AnalyzeError(dir.string() + " is not a run directory");

    ParsedRun parsed;
    const fs::path app_path = dir / "app.out";
    const fs::path rpt_path = dir / "offload.rpt";
    if (!fs::exists(app_path))
        throw AnalyzeError("missing app.out in " + dir.string());
    if (!fs::exists(rpt_path))
        throw AnalyzeError("missing offload.rpt in " + dir.string());

    auto with_context = [](const fs::path& p, auto fn) {
        try {
            return fn();
        } catch (const ParseError& e) {
            throw AnalyzeError(p.filename().string() + ": " + e.what());
        }
    };

    parsed.app = with_context(
        app_path, [&] { return parse_app_output(read_file(app_path)); });
    parsed.offloads = with_context(
        rpt_path, [&] { return parse_offload_report(read_file(rpt_path)); });

    std::vector<fs::path> entries;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) entries.push_back(entry.path());
    std::sort(entries.begin(), entries.end());

    for (const fs::path& path : entries) {
        const std::string name = path.filename().string();
        int node = 0, device = 0;
        char tail = 0;
        if (std::sscanf(name.c_str(), "host-%d.lo%c", &node, &tail) == 2 &&
            tail == 'g' && name == "host-" + std::to_string(node) + ".log") {
            auto samples = with_context(
                path, [&] { return parse_host_sampler(read_file(path)); });
            auto& power = parsed.host_power[node];
            auto& perf = parsed.host_perf[node];
            for (auto& [p, c] : samples) {
                power.push_back(p);
                perf.push_back(c);
            }
        } else if (std::sscanf(name.c_str(), "mic-%d-%d.lo%c", &node, &device,
                               &tail) == 3 &&
                   tail == 'g' &&
                   name == "mic-" + std::to_string(node) + "-" +
                               std::to_string(device) + ".log") {
            auto samples = with_context(
                path, [&] { return parse_mic_sampler(read_file(path)); });
            parsed.mic_power[{node, device}] = std::move(samples);
        }
    }
    return parsed;
}

RunConfig load_run_config(const std::filesystem::path& dir,
                          std::vector<std::string>* warnings) {
    namespace fs = std::filesystem;
    const fs::path manifest = dir / "manifest";
    if (fs::exists(manifest)) {
        try {
            const auto doc = nlohmann::json::parse(read_file(manifest));
            if (doc.contains("config")) return config_from_json(doc.at("config"));
        } catch (const std::exception& e) {
            throw AnalyzeError("bad manifest in " + dir.string() + ": " +
                               e.what());
        }
    }
    const fs::path truth = dir / "truth.json";
    if (fs::exists(truth)) {
        try {
            return truth_from_json(read_file(truth)).report.config;
        } catch (const std::exception& e) {
            throw AnalyzeError("bad truth.json in " + dir.string() + ": " +
                               e.what());
        }
    }
    if (warnings)
        warnings->push_back(
            "no manifest or truth.json in " + dir.string() +
            "; analyzing with the default configuration");
    return RunConfig{};
}

AnalyzedRun analyze_run_dir(const std::filesystem::path& dir,
                            const AnalyzeOptions& opt) {
    std::vector<std::string> config_warnings;
    const RunConfig config = load_run_config(dir, &config_warnings);
    const ParsedRun parsed = load_run_dir(dir);
    AnalyzedRun run = analyze_run(parsed, config, opt);
    run.warnings.insert(run.warnings.begin(), config_warnings.begin(),
                        config_warnings.end());
    return run;
}

std::string report_to_json_text(const AnalyzedRun& run) {
    nlohmann::json j;
    j["report"] = report_to_json(run.report);
    j["stream_offsets"] = run.timeline.offsets;
    j["warnings"] = run.warnings;
    return j.dump(2) + "\n";
}

std::string csv_header() {
    return "run_id,system_name,nodes,mics_per_node,problem_size,"
           "host_frequency_hz,mic_cores,mic_frequency_hz,precision,"
           "host_compute_s,halo_exchange_s,reduce_s,mic_compute_s,"
           "pci_transfer_s,loop_total_s,pci_method,"
           "host_idle_w,host_active_w,host_energy_j,"
           "mic_idle_w,mic_active_w,mic_energy_j,total_energy_j,"
           "mic_mem_bytes,mic_bandwidth_bps,"
           "host_comm_mem_bytes,host_comm_bandwidth_bps,"
           "pci_mem_bytes,pci_bandwidth_bps,"
           "vector_intensity,throughput_flops,work_flop,warnings";
}

std::string csv_row(const std::string& run_id, const AnalyzedRun& run) {
    const RunReport& r = run.report;
    KindSummary host, mic;
    for (const DeviceStateReport& d : r.device_states)
        (d.device.kind == DeviceKey::Kind::kHost ? host : mic).add(d);

    std::ostringstream row;
    row << run_id << ',' << r.config.system_name << ',' << r.config.nodes
        << ',' << r.config.mics_per_node << ',' << r.config.problem_size << ','
        << format_g(r.config.host_frequency_hz) << ',' << r.config.mic_cores
        << ',' << format_g(r.config.mic_frequency_hz) << ','
        << to_string(r.config.precision) << ','
        << format_g(r.phases.host_compute_s) << ','
        << format_g(r.phases.halo_exchange_s) << ','
        << format_g(r.phases.reduce_s) << ','
        << format_g(r.phases.mic_compute_s) << ','
        << format_g(r.phases.pci_transfer_s) << ','
        << format_g(r.phases.loop_total_s) << ','
        << to_string(r.phases.pci_method) << ',' << format_g(host.idle_avg())
        << ',' << format_g(host.active_avg()) << ','
        << format_g(host.energy_j) << ',' << format_g(mic.idle_avg()) << ','
        << format_g(mic.active_avg()) << ',' << format_g(mic.energy_j) << ','
        << format_g(r.total_energy_j) << ',' << r.mic_mem_bytes << ','
        << format_g(r.mic_bandwidth_bps) << ',' << r.host_comm_mem_bytes << ','
        << format_g(r.host_comm_bandwidth_bps) << ',' << r.pci_mem_bytes << ','
        << format_g(r.pci_bandwidth_bps) << ','
        << format_g(r.vector_intensity) << ','
        << format_g(r.throughput_flops) << ',' << format_g(r.work_flop) << ','
        << run.warnings.size();
    return row.str();
}

}  // namespace phiprof

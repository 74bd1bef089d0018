#include <cstdio>

#include "json_codec.hpp"
#include "phiprof/synth.hpp"

namespace phiprof {
namespace {

using nlohmann::json;

json power_to_json(const PowerLevels& p) {
    return {{"idle_watts", p.idle_watts},
            {"active_watts", p.active_watts},
            {"noise_sigma_watts", p.noise_sigma_watts}};
}

PowerLevels power_from_json(const json& j, const std::string& context,
                            PowerLevels defaults) {
    reject_unknown_keys(j, {"idle_watts", "active_watts", "noise_sigma_watts"},
                        context);
    PowerLevels p = defaults;
    p.idle_watts = get_or<double>(j, "idle_watts", p.idle_watts);
    p.active_watts = get_or<double>(j, "active_watts", p.active_watts);
    p.noise_sigma_watts =
        get_or<double>(j, "noise_sigma_watts", p.noise_sigma_watts);
    return p;
}

std::string wall_to_string(int seconds_of_day) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", seconds_of_day / 3600,
                  (seconds_of_day / 60) % 60, seconds_of_day % 60);
    return buf;
}

int wall_from_string(const std::string& text) {
    int h = 0, m = 0, s = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%2d:%2d:%2d%c", &h, &m, &s, &tail) != 3 ||
        h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59)
        throw SynthError("bad wall_start '" + text + "', expected HH:MM:SS");
    return h * 3600 + m * 60 + s;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["config"] = config_to_json(s.config);
    j["iterations"] = s.iterations;
    j["startup_s"] = s.startup_s;
    j["shutdown_s"] = s.shutdown_s;
    j["phases"] = {{"position_s", s.phases.position_s},
                   {"velocity_s", s.phases.velocity_s},
                   {"redistribute_compute_s", s.phases.redistribute_compute_s},
                   {"halo_exchange_s", s.phases.halo_exchange_s},
                   {"reduce_s", s.phases.reduce_s}};
    j["offload"] = {{"per_iteration", s.offload.per_iteration},
                    {"mic_s", s.offload.mic_s},
                    {"pci_to_s", s.offload.pci_to_s},
                    {"pci_from_s", s.offload.pci_from_s},
                    {"cpu_overhead_s", s.offload.cpu_overhead_s},
                    {"cpu_time_reported", s.offload.cpu_time_reported},
                    {"bytes_to", s.offload.bytes_to},
                    {"bytes_from", s.offload.bytes_from},
                    {"llc_fill_misses", s.offload.llc_fill_misses},
                    {"unhalted_cycles", s.offload.unhalted_cycles},
                    {"vpu_elements", s.offload.vpu_elements},
                    {"vpu_instructions", s.offload.vpu_instructions}};
    j["host_power"] = power_to_json(s.host_power);
    j["mic_power"] = power_to_json(s.mic_power);
    j["host_counters"] = {
        {"llc_miss_per_s_comm", s.host_counters.llc_miss_per_s_comm},
        {"llc_miss_per_s_other", s.host_counters.llc_miss_per_s_other},
        {"cycles_per_s_comm", s.host_counters.cycles_per_s_comm},
        {"cycles_per_s_other", s.host_counters.cycles_per_s_other}};
    j["host_period_s"] = s.host_period_s;
    j["mic_period_s"] = s.mic_period_s;
    j["pre_run_s"] = s.pre_run_s;
    j["post_run_s"] = s.post_run_s;
    j["rank_skew_s"] = s.rank_skew_s;
    j["wall_start"] = wall_to_string(s.wall_start_seconds);
    j["wall_start_fraction"] = s.wall_start_fraction;
    if (!s.explicit_offsets.empty()) j["stream_offsets"] = s.explicit_offsets;
    j["counter_names"] = counter_names_to_json(s.counter_names);
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SynthError(std::string("bad scenario document: ") + e.what());
    }
    try {
        reject_unknown_keys(
            j,
            {"name", "seed", "config", "iterations", "startup_s", "shutdown_s",
             "phases", "offload", "host_power", "mic_power", "host_counters",
             "host_period_s", "mic_period_s", "pre_run_s", "post_run_s",
             "rank_skew_s", "wall_start", "wall_start_fraction",
             "stream_offsets", "counter_names"},
            "scenario");
        Scenario s;
        s.name = get_or<std::string>(j, "name", s.name);
        s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
        if (j.contains("config")) s.config = config_from_json(j.at("config"));
        s.iterations = get_or<int>(j, "iterations", s.iterations);
        s.startup_s = get_or<double>(j, "startup_s", s.startup_s);
        s.shutdown_s = get_or<double>(j, "shutdown_s", s.shutdown_s);
        if (j.contains("phases")) {
            const json& p = j.at("phases");
            reject_unknown_keys(p,
                                {"position_s", "velocity_s",
                                 "redistribute_compute_s", "halo_exchange_s",
                                 "reduce_s"},
                                "scenario phases");
            s.phases.position_s =
                get_or<double>(p, "position_s", s.phases.position_s);
            s.phases.velocity_s =
                get_or<double>(p, "velocity_s", s.phases.velocity_s);
            s.phases.redistribute_compute_s = get_or<double>(
                p, "redistribute_compute_s", s.phases.redistribute_compute_s);
            s.phases.halo_exchange_s =
                get_or<double>(p, "halo_exchange_s", s.phases.halo_exchange_s);
            s.phases.reduce_s =
                get_or<double>(p, "reduce_s", s.phases.reduce_s);
        }
        if (j.contains("offload")) {
            const json& o = j.at("offload");
            reject_unknown_keys(
                o,
                {"per_iteration", "mic_s", "pci_to_s", "pci_from_s",
                 "cpu_overhead_s", "cpu_time_reported", "bytes_to",
                 "bytes_from", "llc_fill_misses", "unhalted_cycles",
                 "vpu_elements", "vpu_instructions"},
                "scenario offload");
            auto& of = s.offload;
            of.per_iteration = get_or<int>(o, "per_iteration", of.per_iteration);
            of.mic_s = get_or<double>(o, "mic_s", of.mic_s);
            of.pci_to_s = get_or<double>(o, "pci_to_s", of.pci_to_s);
            of.pci_from_s = get_or<double>(o, "pci_from_s", of.pci_from_s);
            of.cpu_overhead_s =
                get_or<double>(o, "cpu_overhead_s", of.cpu_overhead_s);
            of.cpu_time_reported =
                get_or<bool>(o, "cpu_time_reported", of.cpu_time_reported);
            of.bytes_to = get_or<std::uint64_t>(o, "bytes_to", of.bytes_to);
            of.bytes_from =
                get_or<std::uint64_t>(o, "bytes_from", of.bytes_from);
            of.llc_fill_misses =
                get_or<std::uint64_t>(o, "llc_fill_misses", of.llc_fill_misses);
            of.unhalted_cycles =
                get_or<std::uint64_t>(o, "unhalted_cycles", of.unhalted_cycles);
            of.vpu_elements =
                get_or<std::uint64_t>(o, "vpu_elements", of.vpu_elements);
            of.vpu_instructions = get_or<std::uint64_t>(o, "vpu_instructions",
                                                        of.vpu_instructions);
        }
        if (j.contains("host_power"))
            s.host_power = power_from_json(j.at("host_power"),
                                           "scenario host_power", s.host_power);
        if (j.contains("mic_power"))
            s.mic_power = power_from_json(j.at("mic_power"),
                                          "scenario mic_power", s.mic_power);
        if (j.contains("host_counters")) {
            const json& h = j.at("host_counters");
            reject_unknown_keys(h,
                                {"llc_miss_per_s_comm", "llc_miss_per_s_other",
                                 "cycles_per_s_comm", "cycles_per_s_other"},
                                "scenario host_counters");
            auto& c = s.host_counters;
            c.llc_miss_per_s_comm = get_or<std::uint64_t>(
                h, "llc_miss_per_s_comm", c.llc_miss_per_s_comm);
            c.llc_miss_per_s_other = get_or<std::uint64_t>(
                h, "llc_miss_per_s_other", c.llc_miss_per_s_other);
            c.cycles_per_s_comm = get_or<std::uint64_t>(h, "cycles_per_s_comm",
                                                        c.cycles_per_s_comm);
            c.cycles_per_s_other = get_or<std::uint64_t>(
                h, "cycles_per_s_other", c.cycles_per_s_other);
        }
        s.host_period_s = get_or<double>(j, "host_period_s", s.host_period_s);
        s.mic_period_s = get_or<double>(j, "mic_period_s", s.mic_period_s);
        s.pre_run_s = get_or<double>(j, "pre_run_s", s.pre_run_s);
        s.post_run_s = get_or<double>(j, "post_run_s", s.post_run_s);
        s.rank_skew_s = get_or<double>(j, "rank_skew_s", s.rank_skew_s);
        if (j.contains("wall_start"))
            s.wall_start_seconds =
                wall_from_string(j.at("wall_start").get<std::string>());
        s.wall_start_fraction =
            get_or<double>(j, "wall_start_fraction", s.wall_start_fraction);
        if (j.contains("stream_offsets"))
            s.explicit_offsets =
                j.at("stream_offsets").get<std::map<std::string, double>>();
        if (j.contains("counter_names"))
            s.counter_names = counter_names_from_json(j.at("counter_names"));
        return s;
    } catch (const json::exception& e) {
        throw SynthError(std::string("bad scenario document: ") + e.what());
    } catch (const std::runtime_error& e) {
        throw SynthError(e.what());
    }
}

std::string truth_to_json(const GroundTruth& t) {
    json j;
    j["scenario_name"] = t.scenario_name;
    j["seed"] = t.seed;
    j["stream_offsets"] = t.stream_offsets;
    j["report"] = report_to_json(t.report);
    return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SynthError(std::string("bad truth document: ") + e.what());
    }
    try {
        GroundTruth t;
        t.scenario_name = get_or<std::string>(j, "scenario_name", "");
        t.seed = get_or<std::uint64_t>(j, "seed", 0);
        if (j.contains("stream_offsets"))
            t.stream_offsets =
                j.at("stream_offsets").get<std::map<std::string, double>>();
        t.report = report_from_json(require_field(j, "report", "truth"));
        return t;
    } catch (const json::exception& e) {
        throw SynthError(std::string("bad truth document: ") + e.what());
    } catch (const std::runtime_error& e) {
        throw SynthError(e.what());
    }
}

}  // namespace phiprof

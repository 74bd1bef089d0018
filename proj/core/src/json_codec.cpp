#include "json_codec.hpp"

#include <stdexcept>

namespace phiprof {

const nlohmann::json& require_field(const nlohmann::json& obj,
                                    const std::string& key,
                                    const std::string& context) {
    if (!obj.is_object())
        throw std::runtime_error(context + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw std::runtime_error(context + ": missing field '" + key + "'");
    return *it;
}

void reject_unknown_keys(const nlohmann::json& obj,
                         const std::vector<std::string>& known,
                         const std::string& context) {
    if (!obj.is_object()) return;
    for (const auto& [key, value] : obj.items()) {
        bool found = false;
        for (const std::string& k : known)
            if (k == key) {
                found = true;
                break;
            }
        if (!found)
            throw std::runtime_error(context + ": unknown field '" + key + "'");
    }
}

nlohmann::json config_to_json(const RunConfig& c) {
    return {{"system_name", c.system_name},
            {"nodes", c.nodes},
            {"mics_per_node", c.mics_per_node},
            {"problem_size", c.problem_size},
            {"host_frequency_hz", c.host_frequency_hz},
            {"mic_cores", c.mic_cores},
            {"mic_frequency_hz", c.mic_frequency_hz},
            {"vector_intensity", c.vector_intensity},
            {"ops_per_cycle", c.ops_per_cycle},
            {"precision", to_string(c.precision)}};
}

RunConfig config_from_json(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"system_name", "nodes", "mics_per_node",
                         "problem_size", "host_frequency_hz", "mic_cores",
                         "mic_frequency_hz", "vector_intensity",
                         "ops_per_cycle", "precision"},
                        "config");
    RunConfig c;
    c.system_name = get_or<std::string>(j, "system_name", c.system_name);
    c.nodes = get_or<int>(j, "nodes", c.nodes);
    c.mics_per_node = get_or<int>(j, "mics_per_node", c.mics_per_node);
    c.problem_size = get_or<int>(j, "problem_size", c.problem_size);
    c.host_frequency_hz =
        get_or<double>(j, "host_frequency_hz", c.host_frequency_hz);
    c.mic_cores = get_or<int>(j, "mic_cores", c.mic_cores);
    c.mic_frequency_hz =
        get_or<double>(j, "mic_frequency_hz", c.mic_frequency_hz);
    c.vector_intensity =
        get_or<double>(j, "vector_intensity", c.vector_intensity);
    c.ops_per_cycle = get_or<double>(j, "ops_per_cycle", c.ops_per_cycle);
    c.precision = precision_from_string(
        get_or<std::string>(j, "precision", to_string(c.precision)));
    return c;
}

nlohmann::json phases_to_json(const PhaseTimings& p) {
    return {{"host_compute_s", p.host_compute_s},
            {"halo_exchange_s", p.halo_exchange_s},
            {"reduce_s", p.reduce_s},
            {"mic_compute_s", p.mic_compute_s},
            {"pci_transfer_s", p.pci_transfer_s},
            {"loop_total_s", p.loop_total_s},
            {"pci_method", to_string(p.pci_method)}};
}

PhaseTimings phases_from_json(const nlohmann::json& j) {
    PhaseTimings p;
    p.host_compute_s = require_field(j, "host_compute_s", "phases").get<double>();
    p.halo_exchange_s =
        require_field(j, "halo_exchange_s", "phases").get<double>();
    p.reduce_s = require_field(j, "reduce_s", "phases").get<double>();
    p.mic_compute_s = require_field(j, "mic_compute_s", "phases").get<double>();
    p.pci_transfer_s =
        require_field(j, "pci_transfer_s", "phases").get<double>();
    p.loop_total_s = require_field(j, "loop_total_s", "phases").get<double>();
    const std::string method =
        get_or<std::string>(j, "pci_method", "offload_difference");
    if (method == "offload_difference")
        p.pci_method = PciMethod::kOffloadDifference;
    else if (method == "residual")
        p.pci_method = PciMethod::kResidual;
    else
        throw std::runtime_error("phases: unknown pci_method '" + method + "'");
    return p;
}

DeviceKey device_key_from_label(const std::string& label) {
    auto bad = [&] {
        return std::runtime_error("bad device label '" + label + "'");
    };
    if (label.rfind("host-", 0) == 0) {
        try {
            return DeviceKey::host(std::stoi(label.substr(5)));
        } catch (const std::exception&) {
            throw bad();
        }
    }
    if (label.rfind("mic-", 0) == 0) {
        const auto dash = label.find('-', 4);
        if (dash == std::string::npos) throw bad();
        try {
            return DeviceKey::mic(std::stoi(label.substr(4, dash - 4)),
                                  std::stoi(label.substr(dash + 1)));
        } catch (const std::exception&) {
            throw bad();
        }
    }
    throw bad();
}

nlohmann::json device_state_to_json(const DeviceStateReport& r) {
    return {{"device", r.device.label()},
            {"idle_watts_avg", r.idle_watts_avg},
            {"active_watts_avg", r.active_watts_avg},
            {"idle_samples", r.idle_samples},
            {"active_samples", r.active_samples},
            {"idle_time_s", r.idle_time_s},
            {"active_time_s", r.active_time_s},
            {"energy_j", r.energy_j},
            {"low_sample_warning", r.low_sample_warning}};
}

DeviceStateReport device_state_from_json(const nlohmann::json& j) {
    DeviceStateReport r;
    r.device = device_key_from_label(
        require_field(j, "device", "device state").get<std::string>());
    r.idle_watts_avg =
        require_field(j, "idle_watts_avg", "device state").get<double>();
    r.active_watts_avg =
        require_field(j, "active_watts_avg", "device state").get<double>();
    r.idle_samples =
        require_field(j, "idle_samples", "device state").get<std::size_t>();
    r.active_samples =
        require_field(j, "active_samples", "device state").get<std::size_t>();
    r.idle_time_s =
        require_field(j, "idle_time_s", "device state").get<double>();
    r.active_time_s =
        require_field(j, "active_time_s", "device state").get<double>();
    r.energy_j = require_field(j, "energy_j", "device state").get<double>();
    r.low_sample_warning = get_or<bool>(j, "low_sample_warning", false);
    return r;
}

nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json devices = nlohmann::json::array();
    for (const DeviceStateReport& d : r.device_states)
        devices.push_back(device_state_to_json(d));
    return {{"config", config_to_json(r.config)},
            {"phases", phases_to_json(r.phases)},
            {"device_states", devices},
            {"mic_mem_bytes", r.mic_mem_bytes},
            {"host_comm_mem_bytes", r.host_comm_mem_bytes},
            {"pci_mem_bytes", r.pci_mem_bytes},
            {"mic_bandwidth_bps", r.mic_bandwidth_bps},
            {"host_comm_bandwidth_bps", r.host_comm_bandwidth_bps},
            {"pci_bandwidth_bps", r.pci_bandwidth_bps},
            {"vector_intensity", r.vector_intensity},
            {"throughput_flops", r.throughput_flops},
            {"work_flop", r.work_flop},
            {"total_energy_j", r.total_energy_j}};
}

RunReport report_from_json(const nlohmann::json& j) {
    RunReport r;
    r.config = config_from_json(require_field(j, "config", "report"));
    r.phases = phases_from_json(require_field(j, "phases", "report"));
    for (const nlohmann::json& d :
         require_field(j, "device_states", "report"))
        r.device_states.push_back(device_state_from_json(d));
    r.mic_mem_bytes =
        require_field(j, "mic_mem_bytes", "report").get<std::uint64_t>();
    r.host_comm_mem_bytes =
        require_field(j, "host_comm_mem_bytes", "report").get<std::uint64_t>();
    r.pci_mem_bytes =
        require_field(j, "pci_mem_bytes", "report").get<std::uint64_t>();
    r.mic_bandwidth_bps =
        require_field(j, "mic_bandwidth_bps", "report").get<double>();
    r.host_comm_bandwidth_bps =
        require_field(j, "host_comm_bandwidth_bps", "report").get<double>();
    r.pci_bandwidth_bps =
        require_field(j, "pci_bandwidth_bps", "report").get<double>();
    r.vector_intensity =
        require_field(j, "vector_intensity", "report").get<double>();
    r.throughput_flops =
        require_field(j, "throughput_flops", "report").get<double>();
    r.work_flop = require_field(j, "work_flop", "report").get<double>();
    r.total_energy_j =
        require_field(j, "total_energy_j", "report").get<double>();
    return r;
}

nlohmann::json counter_names_to_json(const CounterNames& n) {
    return {{"host_llc_miss", n.host_llc_miss},
            {"host_unhalted_cycles", n.host_unhalted_cycles},
            {"mic_llc_fill_miss", n.mic_llc_fill_miss},
            {"mic_unhalted_cycles", n.mic_unhalted_cycles},
            {"mic_vpu_elements", n.mic_vpu_elements},
            {"mic_vpu_instructions", n.mic_vpu_instructions}};
}

CounterNames counter_names_from_json(const nlohmann::json& j) {
    CounterNames n;
    n.host_llc_miss = get_or<std::string>(j, "host_llc_miss", n.host_llc_miss);
    n.host_unhalted_cycles =
        get_or<std::string>(j, "host_unhalted_cycles", n.host_unhalted_cycles);
    n.mic_llc_fill_miss =
        get_or<std::string>(j, "mic_llc_fill_miss", n.mic_llc_fill_miss);
    n.mic_unhalted_cycles =
        get_or<std::string>(j, "mic_unhalted_cycles", n.mic_unhalted_cycles);
    n.mic_vpu_elements =
        get_or<std::string>(j, "mic_vpu_elements", n.mic_vpu_elements);
    n.mic_vpu_instructions =
        get_or<std::string>(j, "mic_vpu_instructions", n.mic_vpu_instructions);
    return n;
}

}  // namespace phiprof

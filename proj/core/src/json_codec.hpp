#pragma once

// Internal JSON mappings for the document formats (plans, scenarios,
// ground truth, reports). Not installed; document layouts are part of the
// tool's file formats, not the library API.

#include <nlohmann/json.hpp>
#include <string>

#include "phiprof/metrics.hpp"
#include "phiprof/model.hpp"

namespace phiprof {

// Strict readers: missing or wrongly typed fields throw
// std::runtime_error naming the field; `get_or` supplies a default.
const nlohmann::json& require_field(const nlohmann::json& obj,
                                    const std::string& key,
                                    const std::string& context);

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

void reject_unknown_keys(const nlohmann::json& obj,
                         const std::vector<std::string>& known,
                         const std::string& context);

nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

nlohmann::json phases_to_json(const PhaseTimings& p);
PhaseTimings phases_from_json(const nlohmann::json& j);

DeviceKey device_key_from_label(const std::string& label);

nlohmann::json device_state_to_json(const DeviceStateReport& r);
DeviceStateReport device_state_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

nlohmann::json counter_names_to_json(const CounterNames& n);
CounterNames counter_names_from_json(const nlohmann::json& j);

}  // namespace phiprof

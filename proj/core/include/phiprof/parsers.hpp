#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "phiprof/grammar.hpp"
#include "phiprof/model.hpp"

namespace phiprof {

// Everything parsed out of one run's artifact files. Sample lists are
// anchor-ordered (strictly increasing tfs), enforced at parse time.
struct ParsedRun {
    std::map<int, std::vector<HostPowerSample>> host_power;  // by node
    std::map<int, std::vector<PerfSample>> host_perf;        // by node
    std::map<std::pair<int, int>, std::vector<MicPowerSample>>
        mic_power;  // by (node, device)
    std::vector<OffloadRecord> offloads;
    std::map<int, AppTimeline> app;  // by rank
};

std::vector<std::pair<HostPowerSample, PerfSample>> parse_host_sampler(
    std::istream& stream);
std::vector<MicPowerSample> parse_mic_sampler(std::istream& stream);
// Lines may interleave across ranks; records are grouped by (rank, tag)
// and returned sorted by (rank, tag).
std::vector<OffloadRecord> parse_offload_report(std::istream& stream);
std::map<int, AppTimeline> parse_app_output(std::istream& stream);

std::vector<std::pair<HostPowerSample, PerfSample>> parse_host_sampler(
    const std::string& text);
std::vector<MicPowerSample> parse_mic_sampler(const std::string& text);
std::vector<OffloadRecord> parse_offload_report(const std::string& text);
std::map<int, AppTimeline> parse_app_output(const std::string& text);

// Canonical serializations. serialize(parse(text)) is a fixed point of
// parse -> serialize for any well-formed input whose numbers fit the
// canonical precision.
std::string serialize_host_sampler(
    const std::vector<std::pair<HostPowerSample, PerfSample>>& samples);
std::string serialize_mic_sampler(const std::vector<MicPowerSample>& samples);
std::string serialize_offload_report(const std::vector<OffloadRecord>& records);
std::string serialize_app_output(const std::map<int, AppTimeline>& timelines);

}  // namespace phiprof

#pragma once

// One definition of the sampler/report line formats, shared by the
// emitters and the parsers so a stream written here always parses here.
//
//   host:    [HH:MM:SS] <tfs:%.3f> core=<W> dram=<W> <NAME>=<int> ...
//   mic:     [HH:MM:SS] <tfs:%.3f> pcie=<W> c2x3=<W> c2x4=<W> [win0=<W> win1=<W>]
//   offload: [<rank>] [Offload] [MIC <dev>] [Tag <n>] [<Field>] <value>(<unit>)
//   app:     [<rank>] TIMER <name> <seconds:%.6f>
//            [<rank>] EVENT <name> [HH:MM:SS] <tfs:%.3f>
//
// Lines starting with '#' are headers/comments and are skipped by parsers.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "phiprof/model.hpp"

namespace phiprof {

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

namespace grammar {

std::string format_wall(const TimeAnchor& a);          // "[HH:MM:SS]"
std::string format_anchor(const TimeAnchor& a);        // "[HH:MM:SS] <tfs>"
std::string format_watts(double w);                    // %.3f
std::string format_tfs(double tfs);                    // %.3f
std::string format_app_seconds(double s);              // %.6f

TimeAnchor parse_anchor(const std::string& wall_token,
                        const std::string& tfs_token, std::size_t line);

std::string host_line(const HostPowerSample& power, const PerfSample& perf);
std::string mic_line(const MicPowerSample& sample);
std::vector<std::string> offload_lines(const OffloadRecord& record);
std::string app_timer_line(int rank, const std::string& name, double seconds);
std::string app_event_line(int rank, const std::string& name,
                           const TimeAnchor& anchor);

// Token-level parses, each throwing ParseError with the line number and the
// offending token.
std::pair<HostPowerSample, PerfSample> parse_host_line(const std::string& line,
                                                       std::size_t line_no);
MicPowerSample parse_mic_line(const std::string& line, std::size_t line_no);

struct OffloadField {
    int rank = 0;
    int device = 0;
    int tag = 0;
    std::string field;   // "CPU Time", "MIC Time", "CPU->MIC Data",
                         // "MIC->CPU Data", or "Counter <NAME>"
    double value = 0.0;
    std::uint64_t uvalue = 0;
    std::string unit;
};

OffloadField parse_offload_line(const std::string& line, std::size_t line_no);

struct AppLine {
    enum class Kind { kTimer, kEvent } kind = Kind::kTimer;
    int rank = 0;
    std::string name;
    double seconds = 0.0;  // timer value
    TimeAnchor anchor;     // event anchor
};

AppLine parse_app_line(const std::string& line, std::size_t line_no);

bool is_comment_or_blank(const std::string& line);

}  // namespace grammar
}  // namespace phiprof

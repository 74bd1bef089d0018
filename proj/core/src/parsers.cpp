#include "phiprof/parsers.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

namespace phiprof {

namespace {

using grammar::is_comment_or_blank;

void check_monotonic(const TimeAnchor& prev, const TimeAnchor& cur,
                     std::size_t line_no) {
    if (cur.tfs <= prev.tfs) {
        throw ParseError(line_no, "non-monotonic tfs: " +
                                      grammar::format_tfs(prev.tfs) + " then " +
                                      grammar::format_tfs(cur.tfs));
    }
}

// Accumulates offload field lines for one (rank, tag) until complete.
struct PendingOffload {
    OffloadRecord record;
    bool have_cpu = false;
    bool have_mic = false;
    bool have_to = false;
    bool have_from = false;
    std::size_t first_line = 0;

    std::vector<std::string> missing() const {
        std::vector<std::string> m;
        if (!have_cpu) m.push_back("CPU Time");
        if (!have_mic) m.push_back("MIC Time");
        if (!have_to) m.push_back("CPU->MIC Data");
        if (!have_from) m.push_back("MIC->CPU Data");
        return m;
    }
};

}  // namespace

std::vector<std::pair<HostPowerSample, PerfSample>> parse_host_sampler(
    std::istream& stream) {
    std::vector<std::pair<HostPowerSample, PerfSample>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        auto pair = grammar::parse_host_line(line, line_no);
        if (!out.empty())
            check_monotonic(out.back().first.anchor, pair.first.anchor, line_no);
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<MicPowerSample> parse_mic_sampler(std::istream& stream) {
    std::vector<MicPowerSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        MicPowerSample s = grammar::parse_mic_line(line, line_no);
        if (!out.empty()) check_monotonic(out.back().anchor, s.anchor, line_no);
        out.push_back(s);
    }
    return out;
}

std::vector<OffloadRecord> parse_offload_report(std::istream& stream) {
    std::map<std::pair<int, int>, PendingOffload> pending;
    std::vector<std::pair<int, int>> order;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        grammar::OffloadField f = grammar::parse_offload_line(line, line_no);
        auto key = std::make_pair(f.rank, f.tag);
        auto [it, inserted] = pending.try_emplace(key);
        PendingOffload& p = it->second;
        if (inserted) {
            p.record.rank = f.rank;
            p.record.tag = f.tag;
            p.record.device_id = f.device;
            p.first_line = line_no;
            order.push_back(key);
        } else if (p.record.device_id != f.device) {
            throw ParseError(line_no,
                             "conflicting device id for rank " +
                                 std::to_string(f.rank) + " tag " +
                                 std::to_string(f.tag));
        }
        auto dup = [&](const char* name) {
            throw ParseError(line_no, "duplicate field [" + std::string(name) +
                                          "] for rank " +
                                          std::to_string(f.rank) + " tag " +
                                          std::to_string(f.tag));
        };
        if (f.field == "CPU Time") {
            if (p.have_cpu) dup("CPU Time");
            p.record.cpu_time_s = f.value;  // 0.0 stays 0.0 ("undefined")
            p.have_cpu = true;
        } else if (f.field == "MIC Time") {
            if (p.have_mic) dup("MIC Time");
            p.record.mic_time_s = f.value;
            p.have_mic = true;
        } else if (f.field == "CPU->MIC Data") {
            if (p.have_to) dup("CPU->MIC Data");
            p.record.bytes_to_device = f.uvalue;
            p.have_to = true;
        } else if (f.field == "MIC->CPU Data") {
            if (p.have_from) dup("MIC->CPU Data");
            p.record.bytes_from_device = f.uvalue;
            p.have_from = true;
        } else {  // "Counter <NAME>"
            std::string name = f.field.substr(8);
            if (p.record.counters.count(name)) dup(f.field.c_str());
            p.record.counters[name] = f.uvalue;
        }
    }

    std::vector<OffloadRecord> out;
    std::string incomplete;
    for (const auto& key : order) {
        const PendingOffload& p = pending.at(key);
        auto missing = p.missing();
        if (!missing.empty()) {
            incomplete += " rank " + std::to_string(key.first) + " tag " +
                          std::to_string(key.second) + " missing";
            for (const auto& m : missing) incomplete += " [" + m + "]";
            incomplete += ";";
            continue;
        }
        out.push_back(p.record);
    }
    if (!incomplete.empty())
        throw ParseError(line_no, "incomplete offload record(s):" + incomplete);
    std::sort(out.begin(), out.end(), [](const OffloadRecord& a,
                                         const OffloadRecord& b) {
        return std::tie(a.rank, a.tag) < std::tie(b.rank, b.tag);
    });
    return out;
}

std::map<int, AppTimeline> parse_app_output(std::istream& stream) {
    std::map<int, AppTimeline> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        grammar::AppLine al = grammar::parse_app_line(line, line_no);
        AppTimeline& tl = out.try_emplace(al.rank).first->second;
        tl.rank = al.rank;
        if (al.kind == grammar::AppLine::Kind::kTimer) {
            if (tl.named_timers.count(al.name))
                throw ParseError(line_no, "duplicate timer '" + al.name +
                                              "' for rank " +
                                              std::to_string(al.rank));
            tl.named_timers[al.name] = al.seconds;
        } else {
            if (!tl.event_anchors.empty() &&
                al.anchor.tfs < tl.event_anchors.back().second.tfs) {
                throw ParseError(line_no, "event tfs decreases for rank " +
                                              std::to_string(al.rank));
            }
            tl.event_anchors.emplace_back(al.name, al.anchor);
        }
    }
    for (const auto& [rank, tl] : out) {
        for (const auto& name : required_timers()) {
            if (!tl.has_timer(name))
                throw ParseError(line_no, "rank " + std::to_string(rank) +
                                              " missing timer " + name);
        }
    }
    return out;
}

namespace {

template <typename Fn>
auto parse_text(const std::string& text, Fn fn) {
    std::istringstream is(text);
    return fn(is);
}

}  // namespace

std::vector<std::pair<HostPowerSample, PerfSample>> parse_host_sampler(
    const std::string& text) {
    return parse_text(text, [](std::istream& s) { return parse_host_sampler(s); });
}

std::vector<MicPowerSample> parse_mic_sampler(const std::string& text) {
    return parse_text(text, [](std::istream& s) { return parse_mic_sampler(s); });
}

std::vector<OffloadRecord> parse_offload_report(const std::string& text) {
    return parse_text(text,
                      [](std::istream& s) { return parse_offload_report(s); });
}

std::map<int, AppTimeline> parse_app_output(const std::string& text) {
    return parse_text(text, [](std::istream& s) { return parse_app_output(s); });
}

std::string serialize_host_sampler(
    const std::vector<std::pair<HostPowerSample, PerfSample>>& samples) {
    std::string out;
    for (const auto& [power, perf] : samples) {
        out += grammar::host_line(power, perf);
        out += '\n';
    }
    return out;
}

std::string serialize_mic_sampler(const std::vector<MicPowerSample>& samples) {
    std::string out;
    for (const auto& s : samples) {
        out += grammar::mic_line(s);
        out += '\n';
    }
    return out;
}

std::string serialize_offload_report(const std::vector<OffloadRecord>& records) {
    std::vector<OffloadRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(),
              [](const OffloadRecord& a, const OffloadRecord& b) {
                  return std::tie(a.rank, a.tag) < std::tie(b.rank, b.tag);
              });
    std::string out;
    for (const auto& r : sorted) {
        for (const auto& line : grammar::offload_lines(r)) {
            out += line;
            out += '\n';
        }
    }
    return out;
}

std::string serialize_app_output(const std::map<int, AppTimeline>& timelines) {
    std::string out;
    for (const auto& [rank, tl] : timelines) {
        for (const auto& [name, anchor] : tl.event_anchors) {
            out += grammar::app_event_line(rank, name, anchor);
            out += '\n';
        }
        for (const auto& [name, seconds] : tl.named_timers) {
            out += grammar::app_timer_line(rank, name, seconds);
            out += '\n';
        }
    }
    return out;
}

}  // namespace phiprof

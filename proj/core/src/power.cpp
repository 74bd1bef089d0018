#include "phiprof/power.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace phiprof {

using Span = std::pair<double, double>;
using SpanList = std::vector<Span>;

std::map<std::string, SpanList> phase_windows(const SyncedTimeline& timeline,
                                              const AppTimeline& app) {
    const std::string stream = app_stream_id(app.rank);
    auto offset_it = timeline.offsets.find(stream);
    if (offset_it == timeline.offsets.end())
        throw PowerError("stream " + stream + " is not on the timeline");
    const double offset = offset_it->second;

    std::map<std::string, SpanList> windows;
    std::map<std::string, std::vector<double>> open;
    for (const auto& [name, anchor] : app.event_anchors) {
        const double global = anchor.tfs + offset;
        if (name.size() > 6 && name.ends_with("_begin")) {
            open[name.substr(0, name.size() - 6)].push_back(global);
        } else if (name.size() > 4 && name.ends_with("_end")) {
            const std::string base = name.substr(0, name.size() - 4);
            auto& stack = open[base];
            if (stack.empty())
                throw PowerError("unplaceable phase " + base +
                                 ": end event without a begin");
            windows[base].push_back({stack.back(), global});
            stack.pop_back();
        }
    }
    for (const auto& [base, stack] : open)
        if (!stack.empty())
            throw PowerError("unplaceable phase " + base +
                             ": begin event without an end");
    return windows;
}

namespace {

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

SpanList clipped(const SpanList& spans, double lo, double hi) {
    SpanList out;
    for (Span s : spans) {
        s.first = std::max(s.first, lo);
        s.second = std::min(s.second, hi);
        if (s.second > s.first) out.push_back(s);
    }
    return out;
}

// Covers [begin, end] with the marked spans in the given state and the
// gaps between them in the opposite state.
std::vector<StateWindow> alternation(const SpanList& marked, bool marked_state,
                                     double begin, double end) {
    std::vector<StateWindow> out;
    double cursor = begin;
    for (const Span& s : marked) {
        if (s.first > cursor) out.push_back({cursor, s.first, !marked_state});
        out.push_back({s.first, s.second, marked_state});
        cursor = s.second;
    }
    if (cursor < end || out.empty()) out.push_back({cursor, end, !marked_state});
    return out;
}

void require_placeable(const std::map<std::string, SpanList>& windows,
                       const AppTimeline& app, const std::string& phase) {
    if (windows.count(phase) && !windows.at(phase).empty()) return;
    if (app.has_timer(phase) && app.timer(phase) > 0.0) {
        std::ostringstream msg;
        msg << "unplaceable phase " << phase << ": timer is "
            << app.timer(phase) << " s but no events delimit it";
        throw PowerError(msg.str());
    }
}

}  // namespace

StateWindows build_state_windows(const PhaseTimings& phases,
                                 const SyncedTimeline& timeline,
                                 const AppTimeline& app) {
    auto windows = phase_windows(timeline, app);
    auto app_it = windows.find("app");
    if (app_it == windows.end() || app_it->second.empty())
        throw PowerError("unplaceable phase app: run has no start/end events");
    StateWindows out;
    out.run_begin_s = app_it->second.front().first;
    out.run_end_s = app_it->second.back().second;

    require_placeable(windows, app, "halo_exchange");
    require_placeable(windows, app, "reduce");
    require_placeable(windows, app, "force");

    SpanList host_idle;
    for (const char* phase : {"halo_exchange", "reduce", "force"}) {
        auto it = windows.find(phase);
        if (it != windows.end())
            host_idle.insert(host_idle.end(), it->second.begin(),
                             it->second.end());
    }
    host_idle = clipped(merged(std::move(host_idle)), out.run_begin_s,
                        out.run_end_s);
    out.host = alternation(host_idle, false, out.run_begin_s, out.run_end_s);

    // MIC activity follows explicit offload windows when the trace carries
    // them; otherwise the force phase is the offloaded region.
    SpanList mic_active;
    if (auto it = windows.find("offload");
        it != windows.end() && !it->second.empty()) {
        mic_active = it->second;
    } else if (phases.mic_compute_s > 0.0) {
        auto force = windows.find("force");
        if (force == windows.end() || force->second.empty())
            throw PowerError(
                "unplaceable phase offload: device time was reported but no "
                "offload or force events delimit it");
        mic_active = force->second;
    }
    mic_active = clipped(merged(std::move(mic_active)), out.run_begin_s,
                         out.run_end_s);
    out.mic = alternation(mic_active, true, out.run_begin_s, out.run_end_s);
    return out;
}

DeviceStateReport attribute_power(const DeviceKey& device,
                                  const std::vector<PlacedSample>& samples,
                                  const std::vector<StateWindow>& windows,
                                  double run_begin_s, double run_end_s) {
    double span_begin = run_begin_s;
    double span_end = run_end_s;
    for (const PlacedSample& s : samples) {
        span_begin = std::min(span_begin, s.global_s);
        span_end = std::max(span_end, s.global_s);
    }

    std::vector<StateWindow> cover;
    if (windows.empty()) {
        cover.push_back({span_begin, span_end, false});
    } else {
        if (span_begin < windows.front().begin_s)
            cover.push_back({span_begin, windows.front().begin_s, false});
        cover.insert(cover.end(), windows.begin(), windows.end());
        if (span_end > windows.back().end_s)
            cover.push_back({windows.back().end_s, span_end, false});
    }

    DeviceStateReport report;
    report.device = device;
    double idle_sum = 0.0;
    double active_sum = 0.0;
    for (const StateWindow& w : cover) {
        const double len = w.end_s - w.begin_s;
        if (w.active)
            report.active_time_s += len;
        else
            report.idle_time_s += len;
    }

    for (const PlacedSample& s : samples) {
        // First window beginning strictly after the sample; the one before
        // it holds the sample. A sample exactly on a shared edge lands in
        // the later window this way.
        auto it = std::upper_bound(
            cover.begin(), cover.end(), s.global_s,
            [](double g, const StateWindow& w) { return g < w.begin_s; });
        if (it == cover.begin())
            throw PowerError("sample at global " + std::to_string(s.global_s) +
                             " s falls before the state windows");
        --it;
        const bool last = (it + 1 == cover.end());
        if (s.global_s > it->end_s + 1e-9 ||
            (!last && s.global_s >= it->end_s + 1e-9))
            throw PowerError("sample at global " + std::to_string(s.global_s) +
                             " s falls outside the state windows");
        if (it->active) {
            ++report.active_samples;
            active_sum += s.watts;
        } else {
            ++report.idle_samples;
            idle_sum += s.watts;
        }
    }

    if (report.idle_samples > 0)
        report.idle_watts_avg = idle_sum / static_cast<double>(report.idle_samples);
    if (report.active_samples > 0)
        report.active_watts_avg =
            active_sum / static_cast<double>(report.active_samples);
    report.energy_j = report.idle_watts_avg * report.idle_time_s +
                      report.active_watts_avg * report.active_time_s;
    report.low_sample_warning = report.idle_samples < kMinStateSamples ||
                                report.active_samples < kMinStateSamples;
    return report;
}

}  // namespace phiprof

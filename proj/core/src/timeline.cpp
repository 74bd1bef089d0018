#include "phiprof/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phiprof {
namespace {

struct Interval {
    double lo;
    double hi;
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

// Feasible start epoch of a stream, on the day axis of its first anchor.
// Anchor k with wall stamp W_k (unwrapped) and elapsed t_k pins the start
// epoch into [W_k - t_k, W_k + 1 - t_k): the true wall time lies somewhere
// inside the stamped second. Later anchors are unwrapped by whole days so
// runs crossing midnight intersect correctly.
Interval feasible_start(const std::string& stream_id,
                        const std::vector<TimeAnchor>& anchors,
                        double tolerance_s) {
    Interval box{-std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
    const double w0 = anchors.front().wall_seconds();
    const double t0 = anchors.front().tfs;
    for (const TimeAnchor& a : anchors) {
        const double expected = w0 + (a.tfs - t0);
        const double days =
            std::round((expected - a.wall_seconds()) / kSecondsPerDay);
        const double wall = a.wall_seconds() + days * kSecondsPerDay;
        box.lo = std::max(box.lo, wall - a.tfs);
        box.hi = std::min(box.hi, wall + 1.0 - a.tfs);
    }
    const double shortfall = box.lo - box.hi;
    if (shortfall > tolerance_s + 1e-9) {
        std::ostringstream msg;
        msg << "unsynchronizable stream " << stream_id
            << ": wall clock disagrees with any feasible offset by "
            << shortfall << " s (tolerance " << tolerance_s << " s)";
        throw SyncError(msg.str());
    }
    return box;
}

// Shifts an interval by whole days so it lands next to the reference.
Interval align_days(Interval box, double reference) {
    const double days = std::round((reference - box.mid()) / kSecondsPerDay);
    box.lo += days * kSecondsPerDay;
    box.hi += days * kSecondsPerDay;
    return box;
}

std::vector<TimeAnchor> event_anchors_of(const AppTimeline& timeline) {
    std::vector<TimeAnchor> anchors;
    anchors.reserve(timeline.event_anchors.size());
    for (const auto& [name, anchor] : timeline.event_anchors)
        anchors.push_back(anchor);
    return anchors;
}

template <typename Sample>
std::vector<TimeAnchor> sample_anchors_of(const std::vector<Sample>& samples) {
    std::vector<TimeAnchor> anchors;
    anchors.reserve(samples.size());
    for (const Sample& s : samples) anchors.push_back(s.anchor);
    return anchors;
}

}  // namespace

std::string host_stream_id(int node) {
    return "host-" + std::to_string(node);
}

std::string mic_stream_id(int node, int device) {
    return "mic-" + std::to_string(node) + "-" + std::to_string(device);
}

std::string app_stream_id(int rank) {
    return "app-" + std::to_string(rank);
}

SyncedTimeline synchronize(const ParsedRun& parsed, const SyncOptions& opt) {
    if (parsed.app.empty())
        throw SyncError("cannot synchronize: no application timeline");
    const int origin_rank = parsed.app.begin()->first;
    const AppTimeline& origin_app = parsed.app.at(origin_rank);
    if (origin_app.event_anchors.empty())
        throw SyncError("cannot synchronize: application timeline of rank " +
                        std::to_string(origin_rank) + " has no events");

    SyncedTimeline out;
    out.origin_stream = app_stream_id(origin_rank);
    out.origin = origin_app.event_anchors.front().second;

    const Interval origin_box =
        feasible_start(out.origin_stream, event_anchors_of(origin_app),
                       opt.host_tolerance_s);
    const double origin_epoch = origin_box.mid();
    const double t_origin = out.origin.tfs;

    auto place = [&](const std::string& id,
                     const std::vector<TimeAnchor>& anchors, double tol) {
        if (anchors.empty()) return;
        Interval box = feasible_start(id, anchors, tol);
        box = align_days(box, origin_epoch);
        // offset maps stream tfs onto global time: global zero sits at
        // origin epoch + t_origin on the shared wall axis.
        out.offsets[id] = box.mid() - (origin_epoch + t_origin);
        out.tolerances[id] = tol;
    };

    for (const auto& [rank, timeline] : parsed.app)
        place(app_stream_id(rank), event_anchors_of(timeline),
              opt.host_tolerance_s);
    // The origin stream's own events define global zero: its first event is
    // at global 0 by construction, so the offset is exactly -t_origin
    // (+0.0 keeps a zero origin from printing as -0).
    out.offsets[out.origin_stream] = -t_origin + 0.0;

    for (const auto& [node, samples] : parsed.host_power)
        place(host_stream_id(node), sample_anchors_of(samples),
              opt.host_tolerance_s);
    for (const auto& [key, samples] : parsed.mic_power)
        place(mic_stream_id(key.first, key.second), sample_anchors_of(samples),
              opt.mic_tolerance_s);

    return out;
}

double to_global(const SyncedTimeline& timeline, const std::string& stream,
                 double tfs) {
    auto it = timeline.offsets.find(stream);
    if (it == timeline.offsets.end())
        throw SyncError("stream " + stream + " is not on the timeline");
    return tfs + it->second;
}

}  // namespace phiprof

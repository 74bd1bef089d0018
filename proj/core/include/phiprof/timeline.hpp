#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "phiprof/model.hpp"
#include "phiprof/parsers.hpp"

namespace phiprof {

struct SyncError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SyncOptions {
    double host_tolerance_s = 0.020;
    double mic_tolerance_s = 0.100;
};

// Stream-id conventions used across the toolkit.
std::string host_stream_id(int node);
std::string mic_stream_id(int node, int device);
std::string app_stream_id(int rank);

// Global clock for one run. Global zero is the application start anchor
// (the origin rank's earliest event); global time of a sample is its
// stream tfs plus that stream's offset.
struct SyncedTimeline {
    std::string origin_stream;
    TimeAnchor origin;
    std::map<std::string, double> offsets;
    std::map<std::string, double> tolerances;

    bool has_stream(const std::string& id) const {
        return offsets.count(id) != 0;
    }
};

// Places every stream of the run on the common clock. Each anchor's
// 1-second wall stamp bounds the stream's start epoch to a unit interval;
// the intersection over all anchors (unwrapped mod 24 h) gives the feasible
// start window, and its midpoint is the estimate. An intersection that
// comes up empty by more than the stream tolerance is an
// unsynchronizable-stream error.
SyncedTimeline synchronize(const ParsedRun& parsed, const SyncOptions& opt = {});

double to_global(const SyncedTimeline& timeline, const std::string& stream,
                 double tfs);

}  // namespace phiprof

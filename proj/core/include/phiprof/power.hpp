#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phiprof/model.hpp"
#include "phiprof/timeline.hpp"

namespace phiprof {

struct PowerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pairs <name>_begin / <name>_end event anchors of one rank's timeline
// into global-time windows, keyed by phase name. Unbalanced events raise
// an unplaceable-phase error.
std::map<std::string, std::vector<std::pair<double, double>>> phase_windows(
    const SyncedTimeline& timeline, const AppTimeline& app);

struct StateWindow {
    double begin_s = 0.0;  // global time
    double end_s = 0.0;
    bool active = false;
};

// Device-state schedule for one node, in global time. Windows are
// disjoint, ordered, and cover [run_begin_s, run_end_s]; everything
// outside the run span is idle for both devices.
struct StateWindows {
    double run_begin_s = 0.0;
    double run_end_s = 0.0;
    std::vector<StateWindow> host;
    std::vector<StateWindow> mic;
};

// Builds the idle/active schedule from one rank's event anchors. The host
// is idle during communication (halo exchange, reduce) and for the entire
// force phase, which contains device compute and PCI transfer; the MIC is
// active during offload intervals and idle otherwise. Phases whose timer
// is nonzero but which have no begin/end events cannot be placed and
// raise an error naming the phase.
StateWindows build_state_windows(const PhaseTimings& phases,
                                 const SyncedTimeline& timeline,
                                 const AppTimeline& app);

// One power sample placed on the global clock.
struct PlacedSample {
    double global_s = 0.0;
    double watts = 0.0;
};

// Assigns each sample to the window containing it (boundary samples belong
// to the later window), averages per state, and integrates energy as
// state average times state duration. Durations come from window lengths
// extended to the sampled span; samples before the first window or after
// the last extend the surrounding idle time. A state observed by fewer
// than 100 samples sets the low-sample flag.
DeviceStateReport attribute_power(const DeviceKey& device,
                                  const std::vector<PlacedSample>& samples,
                                  const std::vector<StateWindow>& windows,
                                  double run_begin_s, double run_end_s);

}  // namespace phiprof

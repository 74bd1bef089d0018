#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phiprof/model.hpp"
#include "phiprof/parsers.hpp"

namespace phiprof {

struct PhaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhaseOptions {
    // Negative PCI estimates within this slack are clamped to zero with a
    // warning; anything worse is an inconsistent-accounting error. Covers
    // the combined host and device timestamp tolerances.
    double combined_tolerance_s = 0.120;
};

// Pure host computation: the integration timers minus the halo exchange
// nested inside redistribution. Negative results mean the timers are
// inconsistent.
double host_compute_time(const AppTimeline& timeline);

// The two communication components, (halo_exchange, reduce).
std::pair<double, double> host_comm_times(const AppTimeline& timeline);

// Total device-side offload time over the given records.
double mic_compute_time(const std::vector<OffloadRecord>& offloads);

struct PciTime {
    double seconds = 0.0;
    PciMethod method = PciMethod::kOffloadDifference;
};

// PCI transfer time. When every offload reports a cpu time the per-offload
// cpu minus mic difference is summed; if any record lacks it the loop
// residual is used instead. Small negatives are clamped with a warning.
PciTime pci_transfer_time(const std::vector<OffloadRecord>& offloads,
                          const AppTimeline& timeline, double host_compute_s,
                          double halo_s, double reduce_s, double mic_compute_s,
                          const PhaseOptions& opt,
                          std::vector<std::string>* warnings);

// Phase breakdown for one rank's timeline and its offload records
// (records for other ranks are ignored).
PhaseTimings phases_for_rank(const AppTimeline& timeline,
                             const std::vector<OffloadRecord>& offloads,
                             const PhaseOptions& opt,
                             std::vector<std::string>* warnings);

struct PhaseProfile {
    PhaseTimings root;                     // phase breakdown of the root rank
    std::map<int, PhaseTimings> per_rank;  // same breakdown for every rank
    std::vector<std::string> warnings;
};

// Full profile of a parsed run: root rank first, then every rank.
PhaseProfile profile_phases(const ParsedRun& parsed,
                            const PhaseOptions& opt = {});

}  // namespace phiprof

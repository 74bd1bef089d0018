#include "phiprof/phase.hpp"

#include <sstream>

namespace phiprof {
namespace {

std::string format_seconds(double s) {
    std::ostringstream out;
    out << s;
    return out.str();
}

}  // namespace

double host_compute_time(const AppTimeline& timeline) {
    // The halo exchange runs nested inside redistribution, so it is
    // subtracted back out to leave pure host-side computation.
    const double halo = timeline.timer("halo_exchange");
    const double result = timeline.timer("position") +
                          timeline.timer("velocity") +
                          timeline.timer("redistribute") - halo;
    if (result < 0.0)
        throw PhaseError("rank " + std::to_string(timeline.rank) +
                         ": inconsistent timers: host compute came out " +
                         format_seconds(result) +
                         " s; halo exchange exceeds the integration timers");
    return result;
}

std::pair<double, double> host_comm_times(const AppTimeline& timeline) {
    return {timeline.timer("halo_exchange"), timeline.timer("reduce")};
}

double mic_compute_time(const std::vector<OffloadRecord>& offloads) {
    double total = 0.0;
    for (const OffloadRecord& r : offloads) total += r.mic_time_s;
    return total;
}

PciTime pci_transfer_time(const std::vector<OffloadRecord>& offloads,
                          const AppTimeline& timeline, double host_compute_s,
                          double halo_s, double reduce_s, double mic_compute_s,
                          const PhaseOptions& opt,
                          std::vector<std::string>* warnings) {
    bool all_cpu_defined = true;
    double difference = 0.0;
    for (const OffloadRecord& r : offloads) {
        if (!r.cpu_time_defined()) {
            all_cpu_defined = false;
            break;
        }
        difference += r.cpu_time_s - r.mic_time_s;
    }

    PciTime out;
    if (all_cpu_defined) {
        out.method = PciMethod::kOffloadDifference;
        out.seconds = difference;
    } else {
        out.method = PciMethod::kResidual;
        out.seconds = timeline.timer("loop") - host_compute_s - halo_s -
                      reduce_s - mic_compute_s;
    }

    if (out.seconds < 0.0) {
        if (-out.seconds > opt.combined_tolerance_s)
            throw PhaseError(
                "rank " + std::to_string(timeline.rank) +
                ": inconsistent accounting: pci transfer time came out " +
                format_seconds(out.seconds) + " s via " +
                to_string(out.method) + ", beyond the " +
                format_seconds(opt.combined_tolerance_s) + " s tolerance");
        if (warnings)
            warnings->push_back("rank " + std::to_string(timeline.rank) +
                                ": clamped negative pci transfer time (" +
                                format_seconds(out.seconds) + " s) to zero");
        out.seconds = 0.0;
    }
    return out;
}

PhaseTimings phases_for_rank(const AppTimeline& timeline,
                             const std::vector<OffloadRecord>& offloads,
                             const PhaseOptions& opt,
                             std::vector<std::string>* warnings) {
    std::vector<OffloadRecord> own;
    for (const OffloadRecord& r : offloads)
        if (r.rank == timeline.rank) own.push_back(r);

    PhaseTimings t;
    t.loop_total_s = timeline.timer("loop");
    t.host_compute_s = host_compute_time(timeline);
    std::tie(t.halo_exchange_s, t.reduce_s) = host_comm_times(timeline);
    t.mic_compute_s = mic_compute_time(own);
    const PciTime pci =
        pci_transfer_time(own, timeline, t.host_compute_s, t.halo_exchange_s,
                          t.reduce_s, t.mic_compute_s, opt, warnings);
    t.pci_transfer_s = pci.seconds;
    t.pci_method = pci.method;

    ValidationResult check = validate(t);
    if (!check.ok())
        throw PhaseError("rank " + std::to_string(timeline.rank) + ": " +
                         check.describe());
    return t;
}

PhaseProfile profile_phases(const ParsedRun& parsed, const PhaseOptions& opt) {
    if (parsed.app.empty())
        throw PhaseError("cannot profile phases: no application timeline");
    PhaseProfile profile;
    for (const auto& [rank, timeline] : parsed.app)
        profile.per_rank[rank] = phases_for_rank(timeline, parsed.offloads, opt,
                                                 &profile.warnings);
    profile.root = profile.per_rank.begin()->second;
    return profile;
}

}  // namespace phiprof

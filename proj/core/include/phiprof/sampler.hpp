#pragma once

// Single-threaded samplers that append one grammar line per period to their
// own output file: a live host power/counter sampler backed by the powercap
// energy interface, and replay samplers that re-emit a recorded stream's
// payload on schedule with fresh time anchors.

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "phiprof/metrics.hpp"

namespace phiprof {

struct SamplerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SamplerKind { kHostLive, kHostReplay, kMicReplay };

std::string to_string(SamplerKind kind);

constexpr double kDefaultHostPeriodS = 0.010;
constexpr double kDefaultMicPeriodS = 0.050;
// The MIC power file refreshes every 50 ms; polling faster only duplicates.
constexpr double kMicPeriodFloorS = 0.050;

struct SamplerSpec {
    SamplerKind kind = SamplerKind::kHostReplay;
    double period_s = 0.0;  // <= 0 selects the kind's default
    std::filesystem::path output_path;
    std::filesystem::path source_path;  // replay kinds
    CounterNames counter_names;        // host kinds
};

// Resolved period: spec value or kind default, then the
// PHIPROF_SAMPLER_PERIOD_MS override; enforces the MIC floor.
double effective_period_s(const SamplerSpec& spec);

// The only state shared between a sampler and its coordinator.
class StopSignal {
public:
    void request_stop() { flag_.store(true, std::memory_order_relaxed); }
    bool stop_requested() const {
        return flag_.load(std::memory_order_relaxed);
    }

private:
    std::atomic<bool> flag_{false};
};

// Blocks until the stop signal (or, for replay, source exhaustion) and
// returns the number of sample lines written. Startup failures (unreadable
// energy interface or source, unwritable output) throw before any line is
// emitted; there is no silent fallback.
std::size_t run_sampler(const SamplerSpec& spec, const StopSignal& stop);

}  // namespace phiprof

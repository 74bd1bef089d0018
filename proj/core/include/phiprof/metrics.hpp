#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "phiprof/model.hpp"

namespace phiprof {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default cache line size; overridable per system through configuration.
constexpr std::uint64_t kCacheLineBytes = 64;

// Counter names are data: defaults follow the Sandy Bridge host and the
// coprocessor event lists, swap per microarchitecture via configuration.
struct CounterNames {
    std::string host_llc_miss = "MEM_LOAD_UOPS_MISC_RETIRED:LLC_MISS";
    std::string host_unhalted_cycles = "CPU_CLK_UNHALTED:THREAD_P";
    std::string mic_llc_fill_miss = "L2_DATA_READ_MISS_MEM_FILL";
    std::string mic_unhalted_cycles = "CPU_CLK_UNHALTED";
    std::string mic_vpu_elements = "VPU_ELEMENTS_ACTIVE";
    std::string mic_vpu_instructions = "VPU_INSTRUCTIONS_EXECUTED";
};

// Memory traffic implied by last-level cache misses.
std::uint64_t memory_bytes(std::uint64_t llc_misses,
                           std::uint64_t cache_line_bytes = kCacheLineBytes);

// Average memory bandwidth over the cycles that accumulated the misses.
double bandwidth_bps(std::uint64_t mem_bytes, double frequency_hz,
                     std::uint64_t unhalted_cycles);

struct PciMetrics {
    std::uint64_t bytes = 0;
    double bandwidth_bps = 0.0;
    bool bandwidth_defined = false;  // false when nothing was transferred
};

// Total PCI payload across offloads and its average transfer rate.
PciMetrics pci_metrics(const std::vector<OffloadRecord>& offloads,
                       double pci_time_s);

struct VectorIntensity {
    double value = 0.0;
    bool in_bounds = false;
    double lower_bound = 1.0;
    double upper_bound = 8.0;
};

// Average vector elements processed per VPU instruction. Out-of-bounds
// ratios are reported as-is with the bounds flag cleared, never clamped.
VectorIntensity vectorization_intensity(std::uint64_t vpu_elements,
                                        std::uint64_t vpu_instructions,
                                        Precision precision);

// Peak-style throughput model: cores x intensity x ops/cycle x frequency.
double throughput_flops(int cores, double vector_intensity,
                        double ops_per_cycle, double frequency_hz);

double work_flop(double throughput_flops, double mic_compute_s);

// Average operations per vector instruction from a static-analysis count:
// fused multiply-adds do two operations, everything else one.
double ops_per_cycle_estimate(std::uint64_t vectorized_fma_ops,
                              std::uint64_t other_ops);

}  // namespace phiprof

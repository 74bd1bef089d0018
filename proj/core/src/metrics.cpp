#include "phiprof/metrics.hpp"

#include <sstream>

namespace phiprof {

std::uint64_t memory_bytes(std::uint64_t llc_misses,
                           std::uint64_t cache_line_bytes) {
    return llc_misses * cache_line_bytes;
}

double bandwidth_bps(std::uint64_t mem_bytes, double frequency_hz,
                     std::uint64_t unhalted_cycles) {
    if (unhalted_cycles == 0)
        throw MetricsError("bandwidth undefined: zero unhalted cycles");
    return static_cast<double>(mem_bytes) * frequency_hz /
           static_cast<double>(unhalted_cycles);
}

PciMetrics pci_metrics(const std::vector<OffloadRecord>& offloads,
                       double pci_time_s) {
    PciMetrics out;
    for (const OffloadRecord& r : offloads)
        out.bytes += r.bytes_to_device + r.bytes_from_device;
    if (out.bytes == 0) return out;
    if (pci_time_s <= 0.0) {
        std::ostringstream msg;
        msg << "pci bandwidth undefined: " << out.bytes
            << " bytes transferred in no pci time";
        throw MetricsError(msg.str());
    }
    out.bandwidth_bps = static_cast<double>(out.bytes) / pci_time_s;
    out.bandwidth_defined = true;
    return out;
}

VectorIntensity vectorization_intensity(std::uint64_t vpu_elements,
                                        std::uint64_t vpu_instructions,
                                        Precision precision) {
    if (vpu_instructions == 0)
        throw MetricsError(
            "vectorization intensity undefined: zero vpu instructions");
    VectorIntensity out;
    out.upper_bound = precision == Precision::kDouble ? 8.0 : 16.0;
    out.value = static_cast<double>(vpu_elements) /
                static_cast<double>(vpu_instructions);
    out.in_bounds = out.value >= out.lower_bound && out.value <= out.upper_bound;
    return out;
}

double throughput_flops(int cores, double vector_intensity,
                        double ops_per_cycle, double frequency_hz) {
    if (cores <= 0 || vector_intensity <= 0.0 || ops_per_cycle <= 0.0 ||
        frequency_hz <= 0.0)
        throw MetricsError("throughput undefined: all factors must be positive");
    return static_cast<double>(cores) * vector_intensity * ops_per_cycle *
           frequency_hz;
}

double work_flop(double throughput_flops, double mic_compute_s) {
    if (throughput_flops < 0.0 || mic_compute_s < 0.0)
        throw MetricsError("work undefined: negative input");
    return throughput_flops * mic_compute_s;
}

double ops_per_cycle_estimate(std::uint64_t vectorized_fma_ops,
                              std::uint64_t other_ops) {
    const std::uint64_t total = vectorized_fma_ops + other_ops;
    if (total == 0)
        throw MetricsError("ops-per-cycle estimate undefined: no operations");
    return static_cast<double>(2 * vectorized_fma_ops + other_ops) /
           static_cast<double>(total);
}

}  // namespace phiprof

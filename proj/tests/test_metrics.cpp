#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "phiprof/metrics.hpp"

using namespace phiprof;
using testutil::contains;
using testutil::message_of;
using testutil::offload;

TEST_CASE("cache misses convert to bytes at the line size") {
    CHECK(memory_bytes(1'000'000) == 64'000'000ull);
    CHECK(memory_bytes(0) == 0ull);
    CHECK(memory_bytes(3, 128) == 384ull);
    // Linearity in the miss count.
    CHECK(memory_bytes(2'000'000) == 2 * memory_bytes(1'000'000));
}

TEST_CASE("bandwidth is bytes over the unhalted-cycle interval") {
    // 64e6 bytes over 1.3e9 cycles at 2.6 GHz -> 0.5 s -> 1.28e8 B/s.
    CHECK(bandwidth_bps(64'000'000, 2.6e9, 1'300'000'000) ==
          doctest::Approx(1.28e8));
    CHECK(bandwidth_bps(0, 2.6e9, 1'300'000'000) == 0.0);
    // Same cycle count at twice the frequency is half the time.
    CHECK(bandwidth_bps(64'000'000, 5.2e9, 1'300'000'000) ==
          doctest::Approx(2.56e8));
    CHECK(contains(
        message_of<MetricsError>([] { bandwidth_bps(64, 2.6e9, 0); }),
        "bandwidth undefined: zero unhalted cycles"));
}

TEST_CASE("pci metrics sum payloads across offload records") {
    std::vector<OffloadRecord> records;
    records.push_back(offload(0, 0, 0, 1.0, 0.9, 4'000'000'000ull,
                              1'000'000'000ull));
    records.push_back(offload(0, 0, 1, 1.0, 0.9, 800'000'000ull,
                              200'000'000ull));
    const PciMetrics m = pci_metrics(records, 2.0);
    CHECK(m.bytes == 6'000'000'000ull);
    CHECK(m.bandwidth_defined);
    CHECK(m.bandwidth_bps == doctest::Approx(3e9));
}

TEST_CASE("no transfers leave pci bandwidth undefined but harmless") {
    const PciMetrics m = pci_metrics({}, 0.0);
    CHECK(m.bytes == 0ull);
    CHECK(m.bandwidth_bps == 0.0);
    CHECK_FALSE(m.bandwidth_defined);
}

TEST_CASE("bytes moved in zero transfer time is an accounting error") {
    std::vector<OffloadRecord> records;
    records.push_back(offload(0, 0, 0, 1.0, 0.9, 100, 100));
    CHECK(contains(
        message_of<MetricsError>([&] { pci_metrics(records, 0.0); }),
        "no pci time"));
}

TEST_CASE("vector intensity is elements per instruction with bounds") {
    const VectorIntensity vi = vectorization_intensity(
        5'200'000'000ull, 2'000'000'000ull, Precision::kDouble);
    CHECK(vi.value == doctest::Approx(2.6));
    CHECK(vi.in_bounds);
    CHECK(vi.lower_bound == 1.0);
    CHECK(vi.upper_bound == 8.0);

    // Ratio exactly 1 sits on the lower bound and is valid.
    const VectorIntensity one =
        vectorization_intensity(1000, 1000, Precision::kDouble);
    CHECK(one.value == doctest::Approx(1.0));
    CHECK(one.in_bounds);
}

TEST_CASE("out-of-bounds intensity is reported as-is, never clamped") {
    const VectorIntensity vi =
        vectorization_intensity(9500, 1000, Precision::kDouble);
    CHECK(vi.value == doctest::Approx(9.5));
    CHECK_FALSE(vi.in_bounds);

    // The same ratio fits comfortably within the single-precision lanes.
    const VectorIntensity single =
        vectorization_intensity(9500, 1000, Precision::kSingle);
    CHECK(single.value == doctest::Approx(9.5));
    CHECK(single.in_bounds);
    CHECK(single.upper_bound == 16.0);

    const VectorIntensity wide =
        vectorization_intensity(17000, 1000, Precision::kSingle);
    CHECK_FALSE(wide.in_bounds);
}

TEST_CASE("intensity with no instructions is undefined") {
    CHECK_FALSE(message_of<MetricsError>([] {
                    vectorization_intensity(100, 0, Precision::kDouble);
                }).empty());
}

TEST_CASE("throughput multiplies cores, intensity, ops, and frequency") {
    const double t = throughput_flops(60, 2.6, 1.15, 1.1e9);
    CHECK(std::fabs(t - 1.9734e11) <= 1e-12 * 1.9734e11);
    CHECK(throughput_flops(1, 1.0, 1.0, 1.0) == 1.0);
    CHECK(contains(
        message_of<MetricsError>([] { throughput_flops(0, 2.6, 1.15, 1e9); }),
        "throughput undefined: all factors must be positive"));
    CHECK_FALSE(message_of<MetricsError>([] {
                    throughput_flops(60, -2.6, 1.15, 1e9);
                }).empty());
}

TEST_CASE("work is throughput integrated over device compute time") {
    const double t = throughput_flops(60, 2.6, 1.15, 1.1e9);
    CHECK(work_flop(t, 100.0) == doctest::Approx(1.9734e13));
    CHECK(work_flop(t, 0.0) == 0.0);
    // Exactly linear in the time factor.
    CHECK(work_flop(t, 2.0 * 37.5) == 2.0 * work_flop(t, 37.5));
}

TEST_CASE("ops per cycle weighs fused multiply-adds twice") {
    CHECK(ops_per_cycle_estimate(3, 17) == 23.0 / 20.0);
    CHECK(ops_per_cycle_estimate(3, 17) == doctest::Approx(1.15));
    CHECK(ops_per_cycle_estimate(0, 17) == 1.0);
    CHECK(ops_per_cycle_estimate(5, 0) == 2.0);
    CHECK(contains(
        message_of<MetricsError>([] { ops_per_cycle_estimate(0, 0); }),
        "ops-per-cycle estimate undefined: no operations"));
}

TEST_CASE("estimate stays between one and two operations per instruction") {
    std::mt19937 rng(20260816u);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t fma = rng() % 1000;
        const std::uint64_t other = rng() % 1000;
        if (fma + other == 0) continue;
        const double e = ops_per_cycle_estimate(fma, other);
        CHECK(e >= 1.0);
        CHECK(e <= 2.0);
    }
}

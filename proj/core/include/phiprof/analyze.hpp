#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "phiprof/metrics.hpp"
#include "phiprof/model.hpp"
#include "phiprof/parsers.hpp"
#include "phiprof/phase.hpp"
#include "phiprof/timeline.hpp"

namespace phiprof {

struct AnalyzeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AnalyzeOptions {
    SyncOptions sync;
    PhaseOptions phase;
    CounterNames counters;
    std::uint64_t cache_line_bytes = kCacheLineBytes;
};

struct AnalyzedRun {
    RunReport report;
    SyncedTimeline timeline;
    PhaseProfile phases;
    std::vector<std::string> warnings;  // quality notes, never fatal
};

// Full pipeline over already-parsed artifacts.
AnalyzedRun analyze_run(const ParsedRun& parsed, const RunConfig& config,
                        const AnalyzeOptions& opt = {});

// Loads one run directory (host-<n>.log, mic-<n>-<d>.log, app.out,
// offload.rpt). Parse failures carry "<file>:<line>" context.
ParsedRun load_run_dir(const std::filesystem::path& dir);

// Run configuration, best source first: the run manifest, then a
// truth.json left by the generator, then defaults with a warning.
RunConfig load_run_config(const std::filesystem::path& dir,
                          std::vector<std::string>* warnings);

AnalyzedRun analyze_run_dir(const std::filesystem::path& dir,
                            const AnalyzeOptions& opt = {});

// Report documents.
std::string report_to_json_text(const AnalyzedRun& run);

// Flat per-run row for cross-run comparison. The column set is fixed;
// per-device figures are folded into sample-weighted per-kind averages.
std::string csv_header();
std::string csv_row(const std::string& run_id, const AnalyzedRun& run);

}  // namespace phiprof

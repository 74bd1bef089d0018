#pragma once

// Command implementations behind the phiprof binary, separated from
// argument parsing so tests can drive them in-process.
//
// Exit codes: 0 success, 1 runtime/analysis failure, 2 usage/config error.

#include <filesystem>
#include <iosfwd>
#include <string>

namespace phiprof::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::filesystem::path out;  // command-specific default when empty
    std::string executor;       // overrides plan + PHIPROF_EXECUTOR
    double tolerance_host_ms = 20.0;
    double tolerance_mic_ms = 100.0;
};

// Execute every run in the plan; per-run artifacts plus a top-level
// experiment manifest under the output directory. Exit 0 iff all runs ok.
int cmd_run(const std::filesystem::path& plan_path, const GlobalOptions& opt,
            std::ostream& out, std::ostream& err);

// Analyze one run directory or an experiment directory of runs: report.json
// per run, one CSV for the set, warnings listed but never fatal.
int cmd_analyze(const std::filesystem::path& target, const GlobalOptions& opt,
                std::ostream& out, std::ostream& err);

// Generate synthetic artifacts plus truth.json from a scenario document
// (built-in default scenario when the path is empty).
int cmd_synth(const std::filesystem::path& scenario_path,
              const GlobalOptions& opt, std::ostream& out, std::ostream& err);

// Parse artifacts and report model violations without computing metrics.
int cmd_validate(const std::filesystem::path& target, const GlobalOptions& opt,
                 std::ostream& out, std::ostream& err);

}  // namespace phiprof::cli

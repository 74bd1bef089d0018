#pragma once

// Experiment execution: enumerate the configuration grid, run the nine-step
// measured-execution sequence per configuration (samplers up, settle, run
// workload, settle, samplers down, collect, cool down), and collect run
// artifacts with a checksummed manifest.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "phiprof/model.hpp"
#include "phiprof/synth.hpp"

namespace phiprof {

struct OrchestratorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StaticConfig {
    std::string system_name = "node";
    int nodes = 1;
    int mics_per_node = 1;
    int problem_size = 50;
};

struct SpacePoint {
    double host_frequency_hz = 2.6e9;
    int mic_cores = 60;
};

struct PlanTiming {
    double pre_sleep_s = 20.0;   // idle baseline before the workload
    double post_sleep_s = 10.0;  // idle tail after the workload
    double cooldown_s = 60.0;    // thermal settle between runs
};

struct ShellOptions {
    std::string host_sampler = "live";  // "live" or "replay"
    std::filesystem::path host_replay_source;
    std::filesystem::path mic_replay_source;  // live MIC sampling retired
};

struct ExperimentPlan {
    std::vector<StaticConfig> static_configs;
    std::vector<SpacePoint> config_space;
    // Command template for the shell executor; {nodes}, {mics_per_node},
    // {problem_size}, {host_frequency_hz}, {mic_cores}, {precision},
    // {system_name}, and {run_dir} substitute per run.
    std::string workload;
    PlanTiming timing;
    std::string executor = "simulated";  // "shell" or "simulated"
    // Divides every sleep when actually waiting; configured durations are
    // validated unscaled. Lets tests run the full sequence in milliseconds.
    double time_divisor = 1.0;
    RunConfig defaults;            // fields the grid does not enumerate
    Scenario sim_scenario;  // shape used by the simulated executor
    ShellOptions shell;
};

ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json(const ExperimentPlan& plan);

// Throws OrchestratorError on an invalid plan (empty grid, negative sleeps,
// idle baseline under 10 s, unknown executor, shell specifics).
void validate_plan(const ExperimentPlan& plan);

// Deterministic grid order: static configs outer, config space inner.
std::vector<RunConfig> enumerate_runs(const ExperimentPlan& plan);

std::string run_id_for(const RunConfig& config, std::size_t index);

struct RunStatus {
    bool ok = true;
    int failed_step = 0;  // 1..9 when !ok
    std::string cause;
};

struct RunArtifacts {
    std::string run_id;
    RunConfig config;
    std::filesystem::path run_dir;
    std::vector<std::filesystem::path> host_logs;  // one per node
    std::vector<std::filesystem::path> mic_logs;   // one per device
    std::filesystem::path app_output;
    std::filesystem::path offload_report;
    RunStatus status;
};

// An executor supplies the externally-visible actions of a run: sampler
// lifecycles and the workload itself. The orchestrator owns ordering,
// sleeps, collection, and the step log.
class Executor {
public:
    virtual ~Executor() = default;
    virtual std::string name() const = 0;
    virtual void begin_run(const RunConfig& config,
                           const std::filesystem::path& run_dir,
                           const std::string& run_id) = 0;
    // Return an id for stop_sampler; the sampler appends to `output`.
    virtual int start_host_sampler(int node,
                                   const std::filesystem::path& output) = 0;
    virtual int start_mic_sampler(int node, int device,
                                  const std::filesystem::path& output) = 0;
    virtual void stop_sampler(int id) = 0;  // idempotent
    // Runs to completion; must leave app.out and offload.rpt in run_dir.
    virtual void run_workload(const RunConfig& config,
                              const std::filesystem::path& run_dir) = 0;
    virtual void finish_run() = 0;
    virtual int active_samplers() const = 0;  // orphan check
    // Optional per-run notes (e.g. frequency mismatch) for the step log.
    virtual std::vector<std::string> take_warnings() { return {}; }
};

// Fabricates a coherent run from the synthetic-trace generator: sampler
// files appear when samplers stop, workload output at workload completion,
// MIC files via the staging directory. Failure injection and an active
// sampler count support the orphan and failure-path contracts.
class SimulatedExecutor final : public Executor {
public:
    explicit SimulatedExecutor(Scenario scenario = {},
                               std::uint64_t seed_base = 1);

    // Executor call belonging to this step throws (1, 2, 4, 6, 7 supported).
    int fail_step = 0;
    std::string fail_cause = "injected failure";

    std::string name() const override { return "simulated"; }
    void begin_run(const RunConfig& config,
                   const std::filesystem::path& run_dir,
                   const std::string& run_id) override;
    int start_host_sampler(int node,
                           const std::filesystem::path& output) override;
    int start_mic_sampler(int node, int device,
                          const std::filesystem::path& output) override;
    void stop_sampler(int id) override;
    void run_workload(const RunConfig& config,
                      const std::filesystem::path& run_dir) override;
    void finish_run() override;
    int active_samplers() const override;

private:
    struct Pending {
        std::filesystem::path output;
        std::string content;
        bool is_mic = false;
        bool active = false;
    };
    Scenario scenario_;
    std::uint64_t seed_base_;
    SynthRun run_;
    bool run_ready_ = false;
    std::map<int, Pending> samplers_;
    int next_id_ = 1;
};

// Runs samplers as in-process tasks on the local node and the workload via
// the system shell with the offload-report environment prepared. Single-node
// only: multi-node launch mechanics are site configuration.
class ShellExecutor final : public Executor {
public:
    ShellExecutor(ShellOptions options, std::string workload_template);
    ~ShellExecutor() override;

    std::string name() const override { return "shell"; }
    void begin_run(const RunConfig& config,
                   const std::filesystem::path& run_dir,
                   const std::string& run_id) override;
    int start_host_sampler(int node,
                           const std::filesystem::path& output) override;
    int start_mic_sampler(int node, int device,
                          const std::filesystem::path& output) override;
    void stop_sampler(int id) override;
    void run_workload(const RunConfig& config,
                      const std::filesystem::path& run_dir) override;
    void finish_run() override;
    int active_samplers() const override;
    std::vector<std::string> take_warnings() override;

private:
    struct Task;
    int start_task(const std::string& label, bool is_mic,
                   const struct SamplerSpec& spec);
    ShellOptions options_;
    std::string workload_template_;
    std::map<int, std::unique_ptr<Task>> tasks_;
    std::vector<std::string> warnings_;
    int next_id_ = 1;
};

// Executor resolution: explicit override, else PHIPROF_EXECUTOR, else the
// plan's own setting.
std::unique_ptr<Executor> make_executor(const ExperimentPlan& plan,
                                        const std::string& override_name = "");

// The nine steps in order, a per-step wall-clock log in steps.log, sampler
// teardown on failure, and the cool-down honored on every path.
RunArtifacts execute_run(const RunConfig& config, const ExperimentPlan& plan,
                         Executor& executor,
                         const std::filesystem::path& out_dir,
                         const std::string& run_id);

// Writes `manifest` under the run directory: file names, sizes, crc32.
// Returns the manifest text. Idempotent; errors name any missing file.
std::string collect(const RunArtifacts& artifacts);

// enumerate, execute, collect for every run; failures are recorded and do
// not stop the sweep.
std::vector<RunArtifacts> execute_plan(const ExperimentPlan& plan,
                                       Executor& executor,
                                       const std::filesystem::path& out_dir);

}  // namespace phiprof

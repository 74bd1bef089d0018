#include "phiprof/orchestrator.hpp"

#include <sys/wait.h>
#include <zlib.h>

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include "json_codec.hpp"
#include "phiprof/sampler.hpp"

namespace phiprof {
namespace {

namespace fs = std::filesystem;
namespace chrono = std::chrono;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fmt3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OrchestratorError("cannot write " + path.string());
    out << content;
}

std::string read_file_or_empty(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void replace_all(std::string& text, const std::string& key,
                 const std::string& value) {
    for (std::size_t pos = 0; (pos = text.find(key, pos)) != std::string::npos;
         pos += value.size())
        text.replace(pos, key.size(), value);
}

std::string crc32_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OrchestratorError("cannot read " + path.string());
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                    static_cast<uInt>(in.gcount()));
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08lx", static_cast<unsigned long>(crc));
    return hex;
}

fs::path staging_dir(const fs::path& run_dir) {
    return run_dir / ".mic-staging";
}

std::string mic_log_name(int node, int device) {
    return "mic-" + std::to_string(node) + "-" + std::to_string(device) +
           ".log";
}

std::string host_log_name(int node) {
    return "host-" + std::to_string(node) + ".log";
}

}  // namespace

ExperimentPlan plan_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw OrchestratorError(std::string("bad plan document: ") + e.what());
    }
    try {
        reject_unknown_keys(doc,
                            {"static_configs", "config_space", "workload",
                             "timing", "executor", "time_divisor", "defaults",
                             "scenario", "shell"},
                            "plan");
        ExperimentPlan plan;
        for (const auto& j : require_field(doc, "static_configs", "plan")) {
            reject_unknown_keys(
                j, {"system_name", "nodes", "mics_per_node", "problem_size"},
                "static config");
            StaticConfig sc;
            sc.system_name = get_or<std::string>(j, "system_name", sc.system_name);
            sc.nodes = get_or<int>(j, "nodes", sc.nodes);
            sc.mics_per_node = get_or<int>(j, "mics_per_node", sc.mics_per_node);
            sc.problem_size = get_or<int>(j, "problem_size", sc.problem_size);
            plan.static_configs.push_back(sc);
        }
        for (const auto& j : require_field(doc, "config_space", "plan")) {
            reject_unknown_keys(j, {"host_frequency_hz", "mic_cores"},
                                "config space point");
            SpacePoint sp;
            sp.host_frequency_hz =
                get_or<double>(j, "host_frequency_hz", sp.host_frequency_hz);
            sp.mic_cores = get_or<int>(j, "mic_cores", sp.mic_cores);
            plan.config_space.push_back(sp);
        }
        plan.workload = get_or<std::string>(doc, "workload", "");
        if (doc.contains("timing")) {
            const auto& t = doc.at("timing");
            reject_unknown_keys(t, {"pre_sleep_s", "post_sleep_s", "cooldown_s"},
                                "plan timing");
            plan.timing.pre_sleep_s =
                get_or<double>(t, "pre_sleep_s", plan.timing.pre_sleep_s);
            plan.timing.post_sleep_s =
                get_or<double>(t, "post_sleep_s", plan.timing.post_sleep_s);
            plan.timing.cooldown_s =
                get_or<double>(t, "cooldown_s", plan.timing.cooldown_s);
        }
        plan.executor = get_or<std::string>(doc, "executor", plan.executor);
        plan.time_divisor = get_or<double>(doc, "time_divisor", 1.0);
        if (doc.contains("defaults"))
            plan.defaults = config_from_json(doc.at("defaults"));
        if (doc.contains("scenario"))
            plan.sim_scenario = scenario_from_json(doc.at("scenario").dump());
        if (doc.contains("shell")) {
            const auto& s = doc.at("shell");
            reject_unknown_keys(
                s, {"host_sampler", "host_replay_source", "mic_replay_source"},
                "shell options");
            plan.shell.host_sampler =
                get_or<std::string>(s, "host_sampler", plan.shell.host_sampler);
            plan.shell.host_replay_source =
                get_or<std::string>(s, "host_replay_source", "");
            plan.shell.mic_replay_source =
                get_or<std::string>(s, "mic_replay_source", "");
        }
        return plan;
    } catch (const OrchestratorError&) {
        throw;
    } catch (const std::exception& e) {
        throw OrchestratorError(std::string("bad plan document: ") + e.what());
    }
}

std::string plan_to_json(const ExperimentPlan& plan) {
    nlohmann::json doc;
    doc["static_configs"] = nlohmann::json::array();
    for (const StaticConfig& sc : plan.static_configs)
        doc["static_configs"].push_back({{"system_name", sc.system_name},
                                         {"nodes", sc.nodes},
                                         {"mics_per_node", sc.mics_per_node},
                                         {"problem_size", sc.problem_size}});
    doc["config_space"] = nlohmann::json::array();
    for (const SpacePoint& sp : plan.config_space)
        doc["config_space"].push_back(
            {{"host_frequency_hz", sp.host_frequency_hz},
             {"mic_cores", sp.mic_cores}});
    doc["workload"] = plan.workload;
    doc["timing"] = {{"pre_sleep_s", plan.timing.pre_sleep_s},
                     {"post_sleep_s", plan.timing.post_sleep_s},
                     {"cooldown_s", plan.timing.cooldown_s}};
    doc["executor"] = plan.executor;
    doc["time_divisor"] = plan.time_divisor;
    doc["defaults"] = config_to_json(plan.defaults);
    doc["scenario"] = nlohmann::json::parse(scenario_to_json(plan.sim_scenario));
    doc["shell"] = {
        {"host_sampler", plan.shell.host_sampler},
        {"host_replay_source", plan.shell.host_replay_source.string()},
        {"mic_replay_source", plan.shell.mic_replay_source.string()}};
    return doc.dump(2) + "\n";
}

void validate_plan(const ExperimentPlan& plan) {
    if (plan.static_configs.empty())
        throw OrchestratorError(
            "experiment plan enumerates no runs: static_configs is empty");
    if (plan.config_space.empty())
        throw OrchestratorError(
            "experiment plan enumerates no runs: config_space is empty");
    for (const StaticConfig& sc : plan.static_configs) {
        if (sc.nodes < 1 || sc.mics_per_node < 1 || sc.problem_size < 1)
            throw OrchestratorError(
                "static config '" + sc.system_name +
                "' needs nodes, mics_per_node, problem_size >= 1");
    }
    for (const SpacePoint& sp : plan.config_space)
        if (!(sp.host_frequency_hz > 0.0) || sp.mic_cores < 1)
            throw OrchestratorError(
                "config space points need a positive frequency and >= 1 core");
    if (plan.timing.pre_sleep_s < 10.0)
        throw OrchestratorError(
            "pre_sleep_s must be at least 10 s so the idle baseline holds");
    if (plan.timing.post_sleep_s < 0.0 || plan.timing.cooldown_s < 0.0)
        throw OrchestratorError("sleeps must be non-negative");
    if (!(plan.time_divisor > 0.0))
        throw OrchestratorError("time_divisor must be positive");
    if (plan.executor != "shell" && plan.executor != "simulated")
        throw OrchestratorError("unknown executor '" + plan.executor +
                                "' (expected shell or simulated)");
    if (plan.executor == "shell") {
        if (plan.workload.empty())
            throw OrchestratorError("shell executor requires a workload command");
        for (const StaticConfig& sc : plan.static_configs)
            if (sc.nodes > 1)
                throw OrchestratorError(
                    "shell executor is single-node in this build; use the "
                    "simulated executor for multi-node plans");
        if (plan.shell.host_sampler != "live" &&
            plan.shell.host_sampler != "replay")
            throw OrchestratorError("shell host_sampler must be live or replay");
        if (plan.shell.host_sampler == "replay" &&
            plan.shell.host_replay_source.empty())
            throw OrchestratorError(
                "shell replay host sampler needs host_replay_source");
        if (plan.shell.mic_replay_source.empty())
            throw OrchestratorError(
                "shell executor needs mic_replay_source (live device sampling "
                "is not available)");
    }
}

std::vector<RunConfig> enumerate_runs(const ExperimentPlan& plan) {
    validate_plan(plan);
    std::vector<RunConfig> runs;
    runs.reserve(plan.static_configs.size() * plan.config_space.size());
    for (const StaticConfig& sc : plan.static_configs) {
        for (const SpacePoint& sp : plan.config_space) {
            RunConfig c = plan.defaults;
            c.system_name = sc.system_name;
            c.nodes = sc.nodes;
            c.mics_per_node = sc.mics_per_node;
            c.problem_size = sc.problem_size;
            c.host_frequency_hz = sp.host_frequency_hz;
            c.mic_cores = sp.mic_cores;
            runs.push_back(c);
        }
    }
    return runs;
}

std::string run_id_for(const RunConfig& config, std::size_t index) {
    std::string system;
    for (char c : config.system_name)
        system += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '-';
    char buf[160];
    std::snprintf(buf, sizeof buf, "run-%03zu-%s-n%d-m%d-p%d-f%.0f-c%d", index,
                  system.c_str(), config.nodes, config.mics_per_node,
                  config.problem_size, config.host_frequency_hz / 1e6,
                  config.mic_cores);
    return buf;
}

// --- simulated executor ----------------------------------------------------

SimulatedExecutor::SimulatedExecutor(Scenario scenario, std::uint64_t seed_base)
    : scenario_(std::move(scenario)), seed_base_(seed_base) {}

void SimulatedExecutor::begin_run(const RunConfig& config,
                                  const fs::path& run_dir,
                                  const std::string& run_id) {
    (void)run_dir;
    scenario_.config = config;
    scenario_.name = run_id;
    scenario_.seed = seed_base_ ^ fnv1a(run_id);
    run_ = generate(scenario_);
    run_ready_ = true;
}

int SimulatedExecutor::start_host_sampler(int node, const fs::path& output) {
    if (fail_step == 1) {
        fail_step = 0;
        throw OrchestratorError(fail_cause);
    }
    if (!run_ready_ || !run_.files.count(host_log_name(node)))
        throw OrchestratorError("simulated run has no host stream for node " +
                                std::to_string(node));
    std::ofstream(output, std::ios::trunc);  // the file exists from start
    samplers_[next_id_] = {output, run_.files.at(host_log_name(node)), false,
                           true};
    return next_id_++;
}

int SimulatedExecutor::start_mic_sampler(int node, int device,
                                         const fs::path& output) {
    if (fail_step == 2) {
        fail_step = 0;
        throw OrchestratorError(fail_cause);
    }
    if (!run_ready_ || !run_.files.count(mic_log_name(node, device)))
        throw OrchestratorError("simulated run has no device stream " +
                                mic_log_name(node, device));
    std::ofstream(output, std::ios::trunc);
    samplers_[next_id_] = {output, run_.files.at(mic_log_name(node, device)),
                           true, true};
    return next_id_++;
}

void SimulatedExecutor::stop_sampler(int id) {
    auto it = samplers_.find(id);
    if (it == samplers_.end() || !it->second.active) return;
    if ((fail_step == 6 && it->second.is_mic) ||
        (fail_step == 7 && !it->second.is_mic)) {
        fail_step = 0;
        throw OrchestratorError(fail_cause);
    }
    write_file(it->second.output, it->second.content);
    it->second.active = false;
}

void SimulatedExecutor::run_workload(const RunConfig&, const fs::path& run_dir) {
    if (fail_step == 4) {
        fail_step = 0;
        throw OrchestratorError(fail_cause);
    }
    if (!run_ready_) throw OrchestratorError("workload started before setup");
    write_file(run_dir / "app.out", run_.files.at("app.out"));
    write_file(run_dir / "offload.rpt", run_.files.at("offload.rpt"));
}

void SimulatedExecutor::finish_run() {
    for (auto it = samplers_.begin(); it != samplers_.end();)
        it = it->second.active ? ++it : samplers_.erase(it);
    run_ready_ = false;
}

int SimulatedExecutor::active_samplers() const {
    int n = 0;
    for (const auto& [id, s] : samplers_)
        if (s.active) ++n;
    return n;
}

// --- shell executor ---------------------------------------------------------

struct ShellExecutor::Task {
    std::string label;
    bool is_mic = false;
    SamplerSpec spec;
    StopSignal stop;
    std::thread thread;
    std::exception_ptr error;
    std::atomic<bool> done{false};
    std::size_t lines = 0;
};

ShellExecutor::ShellExecutor(ShellOptions options, std::string workload_template)
    : options_(std::move(options)),
      workload_template_(std::move(workload_template)) {}

ShellExecutor::~ShellExecutor() {
    for (auto& [id, task] : tasks_) {
        task->stop.request_stop();
        if (task->thread.joinable()) task->thread.join();
    }
}

void ShellExecutor::begin_run(const RunConfig& config, const fs::path&,
                              const std::string&) {
    // Frequency is recorded, not set; flag a disagreement with the platform.
    std::ifstream in("/sys/devices/system/cpu/cpu0/cpufreq/scaling_cur_freq");
    double khz = 0.0;
    if (in >> khz) {
        const double reported_hz = khz * 1e3;
        if (std::abs(reported_hz - config.host_frequency_hz) >
            0.05 * config.host_frequency_hz) {
            std::ostringstream msg;
            msg << "requested host frequency " << config.host_frequency_hz
                << " Hz but cpu0 reports " << reported_hz << " Hz";
            warnings_.push_back(msg.str());
        }
    }
}

int ShellExecutor::start_host_sampler(int node, const fs::path& output) {
    SamplerSpec spec;
    spec.kind = options_.host_sampler == "live" ? SamplerKind::kHostLive
                                                : SamplerKind::kHostReplay;
    spec.output_path = output;
    spec.source_path = options_.host_replay_source;
    return start_task(host_log_name(node), false, spec);
}

int ShellExecutor::start_mic_sampler(int node, int device,
                                     const fs::path& output) {
    SamplerSpec spec;
    spec.kind = SamplerKind::kMicReplay;
    spec.output_path = output;
    spec.source_path = options_.mic_replay_source;
    return start_task(mic_log_name(node, device), true, spec);
}

int ShellExecutor::start_task(const std::string& label, bool is_mic,
                              const SamplerSpec& spec) {
    auto task = std::make_unique<Task>();
    task->label = label;
    task->is_mic = is_mic;
    task->spec = spec;
    Task* t = task.get();
    t->thread = std::thread([t] {
        try {
            t->lines = run_sampler(t->spec, t->stop);
        } catch (...) {
            t->error = std::current_exception();
        }
        t->done.store(true, std::memory_order_release);
    });
    // Give immediate startup failures (unreadable energy interface, missing
    // replay source) a moment to surface at the start step.
    for (int i = 0; i < 10 && !t->done.load(std::memory_order_acquire); ++i)
        std::this_thread::sleep_for(chrono::milliseconds(5));
    if (t->done.load(std::memory_order_acquire) && t->error) {
        t->thread.join();
        try {
            std::rethrow_exception(t->error);
        } catch (const std::exception& e) {
            throw OrchestratorError("sampler " + label + ": " + e.what());
        }
    }
    tasks_[next_id_] = std::move(task);
    return next_id_++;
}

void ShellExecutor::stop_sampler(int id) {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) return;
    std::unique_ptr<Task> task = std::move(it->second);
    tasks_.erase(it);
    task->stop.request_stop();
    if (task->thread.joinable()) task->thread.join();
    if (task->error) {
        try {
            std::rethrow_exception(task->error);
        } catch (const std::exception& e) {
            throw OrchestratorError("sampler " + task->label + ": " + e.what());
        }
    }
}

void ShellExecutor::run_workload(const RunConfig& config,
                                 const fs::path& run_dir) {
    std::string cmd = workload_template_;
    replace_all(cmd, "{nodes}", std::to_string(config.nodes));
    replace_all(cmd, "{mics_per_node}", std::to_string(config.mics_per_node));
    replace_all(cmd, "{problem_size}", std::to_string(config.problem_size));
    replace_all(cmd, "{mic_cores}", std::to_string(config.mic_cores));
    replace_all(cmd, "{system_name}", config.system_name);
    replace_all(cmd, "{precision}", to_string(config.precision));
    char freq[32];
    std::snprintf(freq, sizeof freq, "%.0f", config.host_frequency_hz);
    replace_all(cmd, "{host_frequency_hz}", freq);
    replace_all(cmd, "{run_dir}", run_dir.string());

    setenv("OFFLOAD_REPORT", "2", 1);
    const std::string full = "cd '" + run_dir.string() + "' && ( " + cmd +
                             " ) > stdout.log 2> stderr.log";
    const int rc = std::system(full.c_str());
    if (rc == -1) throw OrchestratorError("cannot launch workload command");
    const int status = WIFEXITED(rc) ? WEXITSTATUS(rc) : 128;
    if (status != 0)
        throw OrchestratorError("workload exited with status " +
                                std::to_string(status) +
                                " (stderr.log retained)");

    // Workloads usually interleave timers, events and the offload report on
    // stdout; split by line prefix unless the files were written directly.
    const bool need_app = !fs::exists(run_dir / "app.out");
    const bool need_rpt = !fs::exists(run_dir / "offload.rpt");
    if (!need_app && !need_rpt) return;
    std::istringstream lines(read_file_or_empty(run_dir / "stdout.log"));
    std::ostringstream app, rpt;
    std::string line;
    while (std::getline(lines, line)) {
        const std::size_t sp = line.find("] ");
        if (line.empty() || line[0] != '[' || sp == std::string::npos) continue;
        const std::string rest = line.substr(sp + 2);
        if (rest.rfind("[Offload]", 0) == 0)
            rpt << line << '\n';
        else if (rest.rfind("TIMER ", 0) == 0 || rest.rfind("EVENT ", 0) == 0)
            app << line << '\n';
    }
    if (need_app) write_file(run_dir / "app.out", app.str());
    if (need_rpt) write_file(run_dir / "offload.rpt", rpt.str());
}

void ShellExecutor::finish_run() {}

int ShellExecutor::active_samplers() const {
    return static_cast<int>(tasks_.size());
}

std::vector<std::string> ShellExecutor::take_warnings() {
    return std::exchange(warnings_, {});
}

std::unique_ptr<Executor> make_executor(const ExperimentPlan& plan,
                                        const std::string& override_name) {
    std::string name = plan.executor;
    if (const char* env = std::getenv("PHIPROF_EXECUTOR")) name = env;
    if (!override_name.empty()) name = override_name;
    if (name == "simulated")
        return std::make_unique<SimulatedExecutor>(plan.sim_scenario,
                                                   plan.sim_scenario.seed);
    if (name == "shell")
        return std::make_unique<ShellExecutor>(plan.shell, plan.workload);
    throw OrchestratorError("unknown executor '" + name +
                            "' (expected shell or simulated)");
}

// --- run execution ----------------------------------------------------------

RunArtifacts execute_run(const RunConfig& config, const ExperimentPlan& plan,
                         Executor& executor, const fs::path& out_dir,
                         const std::string& run_id) {
    RunArtifacts art;
    art.run_id = run_id;
    art.config = config;
    art.run_dir = out_dir / run_id;
    fs::create_directories(art.run_dir);
    fs::create_directories(staging_dir(art.run_dir));
    for (int n = 0; n < config.nodes; ++n)
        art.host_logs.push_back(art.run_dir / host_log_name(n));
    for (int n = 0; n < config.nodes; ++n)
        for (int d = 0; d < config.mics_per_node; ++d)
            art.mic_logs.push_back(art.run_dir / mic_log_name(n, d));
    art.app_output = art.run_dir / "app.out";
    art.offload_report = art.run_dir / "offload.rpt";

    std::ofstream log(art.run_dir / "steps.log", std::ios::trunc);
    const std::time_t wall = std::time(nullptr);
    std::tm tm{};
    localtime_r(&wall, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%d %H:%M:%S", &tm);
    log << "# run " << run_id << " started " << stamp << " executor "
        << executor.name() << " time_divisor " << plan.time_divisor << '\n';
    log.flush();

    const auto t0 = chrono::steady_clock::now();
    auto now_s = [&] {
        return chrono::duration<double>(chrono::steady_clock::now() - t0)
            .count();
    };
    auto sleep_scaled = [&](double seconds) {
        const double s = seconds / plan.time_divisor;
        if (s > 0.0)
            std::this_thread::sleep_for(chrono::duration<double>(s));
    };

    RunStatus status;
    auto fail = [&](int step, const std::string& cause) {
        if (status.ok) {
            status.ok = false;
            status.failed_step = step;
            status.cause = cause;
        }
    };
    auto step = [&](int n, const char* name, auto&& body) {
        if (!status.ok) {
            log << "step " << n << ' ' << name << " skipped\n";
            log.flush();
            return;
        }
        const double begin = now_s();
        log << "step " << n << ' ' << name << " begin " << fmt3(begin);
        log.flush();
        try {
            body();
            const double end = now_s();
            log << " end " << fmt3(end) << " duration " << fmt3(end - begin)
                << '\n';
        } catch (const std::exception& e) {
            log << " failed " << fmt3(now_s()) << ": " << e.what() << '\n';
            fail(n, e.what());
        }
        log.flush();
    };

    std::vector<int> host_ids, mic_ids;
    try {
        executor.begin_run(config, art.run_dir, run_id);
    } catch (const std::exception& e) {
        fail(1, std::string("setup: ") + e.what());
        log << "# setup failed: " << e.what() << '\n';
    }

    step(1, "start-host-samplers", [&] {
        for (int n = 0; n < config.nodes; ++n)
            host_ids.push_back(
                executor.start_host_sampler(n, art.run_dir / host_log_name(n)));
    });
    step(2, "start-mic-samplers", [&] {
        for (int n = 0; n < config.nodes; ++n)
            for (int d = 0; d < config.mics_per_node; ++d)
                mic_ids.push_back(executor.start_mic_sampler(
                    n, d, staging_dir(art.run_dir) / mic_log_name(n, d)));
    });
    step(3, "sleep-pre", [&] { sleep_scaled(plan.timing.pre_sleep_s); });
    step(4, "run-workload", [&] {
        executor.run_workload(config, art.run_dir);
        for (const fs::path* p : {&art.app_output, &art.offload_report})
            if (!fs::exists(*p) || fs::file_size(*p) == 0)
                throw OrchestratorError("workload produced no " +
                                        p->filename().string());
    });
    step(5, "sleep-post", [&] { sleep_scaled(plan.timing.post_sleep_s); });
    step(6, "stop-mic-samplers", [&] {
        for (int id : mic_ids) executor.stop_sampler(id);
    });
    step(7, "stop-host-samplers", [&] {
        for (int id : host_ids) executor.stop_sampler(id);
    });
    step(8, "collect-mic-files", [&] {
        for (int n = 0; n < config.nodes; ++n)
            for (int d = 0; d < config.mics_per_node; ++d) {
                const fs::path staged = staging_dir(art.run_dir) /
                                        mic_log_name(n, d);
                if (!fs::exists(staged))
                    throw OrchestratorError("no staged file " +
                                            mic_log_name(n, d));
                fs::rename(staged, art.run_dir / mic_log_name(n, d));
            }
        std::error_code ec;
        fs::remove(staging_dir(art.run_dir), ec);
        for (const fs::path& p : art.host_logs)
            if (!fs::exists(p) || fs::file_size(p) == 0)
                throw OrchestratorError("missing or empty " +
                                        p.filename().string());
        for (const fs::path& p : art.mic_logs)
            if (!fs::exists(p) || fs::file_size(p) == 0)
                throw OrchestratorError("missing or empty " +
                                        p.filename().string());
    });

    if (!status.ok) {
        // Failure teardown: no sampler may outlive the run, and whatever was
        // staged moves into the run directory for diagnosis.
        for (int id : mic_ids)
            try {
                executor.stop_sampler(id);
            } catch (...) {
            }
        for (int id : host_ids)
            try {
                executor.stop_sampler(id);
            } catch (...) {
            }
        for (int n = 0; n < config.nodes; ++n)
            for (int d = 0; d < config.mics_per_node; ++d) {
                const fs::path staged = staging_dir(art.run_dir) /
                                        mic_log_name(n, d);
                std::error_code ec;
                if (fs::exists(staged))
                    fs::rename(staged, art.run_dir / mic_log_name(n, d), ec);
            }
        std::error_code ec;
        fs::remove(staging_dir(art.run_dir), ec);
        log << "# teardown: samplers stopped, staged files moved\n";
        log.flush();
    }

    // The cool-down runs on every path; skipping it would let a failed run
    // heat the next one's baseline.
    {
        const double begin = now_s();
        log << "step 9 sleep-cooldown begin " << fmt3(begin);
        log.flush();
        sleep_scaled(plan.timing.cooldown_s);
        const double end = now_s();
        log << " end " << fmt3(end) << " duration " << fmt3(end - begin)
            << '\n';
    }

    try {
        executor.finish_run();
    } catch (const std::exception& e) {
        fail(9, e.what());
    }
    for (const std::string& w : executor.take_warnings())
        log << "# warning: " << w << '\n';
    if (executor.active_samplers() > 0)
        log << "# warning: " << executor.active_samplers()
            << " sampler(s) still active after the run\n";
    if (status.ok)
        log << "status ok\n";
    else
        log << "status failed step " << status.failed_step << ": "
            << status.cause << '\n';
    art.status = status;
    return art;
}

std::string collect(const RunArtifacts& artifacts) {
    nlohmann::json manifest;
    manifest["run_id"] = artifacts.run_id;
    manifest["status"] = {{"ok", artifacts.status.ok},
                          {"failed_step", artifacts.status.failed_step},
                          {"cause", artifacts.status.cause}};
    manifest["config"] = config_to_json(artifacts.config);
    manifest["files"] = nlohmann::json::array();

    std::vector<fs::path> declared;
    declared.insert(declared.end(), artifacts.host_logs.begin(),
                    artifacts.host_logs.end());
    declared.insert(declared.end(), artifacts.mic_logs.begin(),
                    artifacts.mic_logs.end());
    declared.push_back(artifacts.app_output);
    declared.push_back(artifacts.offload_report);

    for (const fs::path& p : declared) {
        if (!fs::exists(p)) {
            if (artifacts.status.ok)
                throw OrchestratorError("collect: missing declared file " +
                                        p.filename().string() + " in " +
                                        artifacts.run_dir.string());
            continue;  // failed runs keep whatever survived
        }
        manifest["files"].push_back(
            {{"name", p.filename().string()},
             {"size", static_cast<std::uint64_t>(fs::file_size(p))},
             {"crc32", crc32_hex(p)}});
    }
    const std::string text = manifest.dump(2) + "\n";
    write_file(artifacts.run_dir / "manifest", text);
    return text;
}

std::vector<RunArtifacts> execute_plan(const ExperimentPlan& plan,
                                       Executor& executor,
                                       const fs::path& out_dir) {
    const std::vector<RunConfig> runs = enumerate_runs(plan);
    fs::create_directories(out_dir);
    std::vector<RunArtifacts> out;
    out.reserve(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        RunArtifacts art = execute_run(runs[i], plan, executor, out_dir,
                                       run_id_for(runs[i], i));
        collect(art);
        out.push_back(std::move(art));
    }
    return out;
}

}  // namespace phiprof

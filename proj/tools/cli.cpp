#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <vector>

#include "phiprof/analyze.hpp"
#include "phiprof/orchestrator.hpp"
#include "phiprof/parsers.hpp"
#include "phiprof/synth.hpp"

namespace phiprof::cli {
namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true, std::memory_order_relaxed); }

struct SignalGuard {
    using Handler = void (*)(int);
    Handler old_int;
    Handler old_term;
    SignalGuard() {
        g_interrupted.store(false, std::memory_order_relaxed);
        old_int = std::signal(SIGINT, on_signal);
        old_term = std::signal(SIGTERM, on_signal);
    }
    ~SignalGuard() {
        std::signal(SIGINT, old_int);
        std::signal(SIGTERM, old_term);
    }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string dir_label(const fs::path& dir) {
    const std::string name = fs::weakly_canonical(dir).filename().string();
    return name.empty() ? dir.string() : name;
}

// A run directory holds app.out; an experiment directory holds run
// directories. Returned in name order.
std::vector<fs::path> discover_runs(const fs::path& target) {
    if (fs::exists(target / "app.out")) return {target};
    std::vector<fs::path> runs;
    for (const auto& entry : fs::directory_iterator(target))
        if (entry.is_directory() && fs::exists(entry.path() / "app.out"))
            runs.push_back(entry.path());
    std::sort(runs.begin(), runs.end());
    return runs;
}

AnalyzeOptions options_from(const GlobalOptions& opt) {
    AnalyzeOptions a;
    a.sync.host_tolerance_s = opt.tolerance_host_ms / 1000.0;
    a.sync.mic_tolerance_s = opt.tolerance_mic_ms / 1000.0;
    return a;
}

void report_violations(const std::string& context, const ValidationResult& r,
                       std::vector<std::string>& out) {
    for (const Violation& v : r.violations)
        out.push_back(context + ": " + v.field + ": " + v.rule);
}

}  // namespace

int cmd_run(const fs::path& plan_path, const GlobalOptions& opt,
            std::ostream& out, std::ostream& err) {
    ExperimentPlan plan;
    std::unique_ptr<Executor> executor;
    std::vector<RunConfig> runs;
    try {
        plan = plan_from_json(read_file(plan_path));
        runs = enumerate_runs(plan);
        executor = make_executor(plan, opt.executor);
    } catch (const std::exception& e) {
        err << "run: " << e.what() << '\n';
        return kExitUsage;
    }

    const fs::path out_dir = opt.out.empty() ? fs::path("results") : opt.out;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        err << "run: cannot create " << out_dir.string() << '\n';
        return kExitUsage;
    }

    SignalGuard guard;
    nlohmann::json experiment;
    experiment["plan"] = plan_path.string();
    experiment["executor"] = executor->name();
    experiment["total"] = runs.size();
    experiment["runs"] = nlohmann::json::array();

    std::size_t ok_count = 0;
    bool interrupted = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (g_interrupted.load(std::memory_order_relaxed)) {
            interrupted = true;
            break;
        }
        const std::string run_id = run_id_for(runs[i], i);
        RunArtifacts art;
        try {
            art = execute_run(runs[i], plan, *executor, out_dir, run_id);
            collect(art);
        } catch (const std::exception& e) {
            err << "run " << run_id << ": " << e.what() << '\n';
            art.run_id = run_id;
            art.status = {false, 0, e.what()};
        }
        if (art.status.ok) {
            ++ok_count;
            out << "run " << run_id << ": ok\n";
        } else {
            out << "run " << run_id << ": failed step "
                << art.status.failed_step << ": " << art.status.cause << '\n';
        }
        experiment["runs"].push_back({{"run_id", run_id},
                                      {"ok", art.status.ok},
                                      {"failed_step", art.status.failed_step},
                                      {"cause", art.status.cause}});
    }
    experiment["complete"] = !interrupted;
    experiment["ok"] = ok_count;
    try {
        write_file(out_dir / "experiment.json", experiment.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "run: " << e.what() << '\n';
        return kExitFailure;
    }
    if (interrupted) {
        err << "run: interrupted; experiment manifest marked incomplete\n";
        return kExitFailure;
    }
    out << ok_count << '/' << runs.size() << " runs ok\n";
    return ok_count == runs.size() ? kExitOk : kExitFailure;
}

int cmd_analyze(const fs::path& target, const GlobalOptions& opt,
                std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(target)) {
        err << "analyze: " << target.string() << " is not a directory\n";
        return kExitUsage;
    }
    std::vector<fs::path> runs;
    try {
        runs = discover_runs(target);
    } catch (const std::exception& e) {
        err << "analyze: " << e.what() << '\n';
        return kExitFailure;
    }
    if (runs.empty()) {
        err << "analyze: no run artifacts under " << target.string() << '\n';
        return kExitFailure;
    }

    const AnalyzeOptions options = options_from(opt);
    std::ostringstream csv;
    csv << csv_header() << '\n';
    std::size_t warning_count = 0;
    for (const fs::path& dir : runs) {
        AnalyzedRun run;
        try {
            run = analyze_run_dir(dir, options);
            write_file(dir / "report.json", report_to_json_text(run));
        } catch (const std::exception& e) {
            err << "analyze: " << dir.string() << ": " << e.what() << '\n';
            return kExitFailure;
        }
        const std::string run_id = dir_label(dir);
        csv << csv_row(run_id, run) << '\n';
        for (const std::string& w : run.warnings) {
            out << "warning [" << run_id << "]: " << w << '\n';
            ++warning_count;
        }
    }

    const fs::path csv_path =
        opt.out.empty() ? target / "analysis.csv" : opt.out;
    try {
        write_file(csv_path, csv.str());
    } catch (const std::exception& e) {
        err << "analyze: " << e.what() << '\n';
        return kExitFailure;
    }
    out << "analyzed " << runs.size() << " run(s), " << warning_count
        << " warning(s), wrote " << csv_path.string() << '\n';
    return kExitOk;
}

int cmd_synth(const fs::path& scenario_path, const GlobalOptions& opt,
              std::ostream& out, std::ostream& err) {
    Scenario scenario;
    if (!scenario_path.empty()) {
        try {
            scenario = scenario_from_json(read_file(scenario_path));
        } catch (const std::exception& e) {
            err << "synth: " << e.what() << '\n';
            return kExitUsage;
        }
    }
    SynthRun run;
    try {
        run = generate(scenario);
    } catch (const SynthError& e) {
        err << "synth: " << e.what() << '\n';
        return kExitUsage;
    }
    const fs::path out_dir = opt.out.empty() ? fs::path("synth-run") : opt.out;
    try {
        fs::create_directories(out_dir);
        for (const auto& [name, content] : run.files)
            write_file(out_dir / name, content);
        write_file(out_dir / "truth.json", truth_to_json(run.truth));
    } catch (const std::exception& e) {
        err << "synth: " << e.what() << '\n';
        return kExitFailure;
    }
    out << "wrote " << run.files.size() + 1 << " files to " << out_dir.string()
        << '\n';
    return kExitOk;
}

int cmd_validate(const fs::path& target, const GlobalOptions& opt,
                 std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(target)) {
        err << "validate: " << target.string() << " is not a directory\n";
        return kExitUsage;
    }
    std::vector<fs::path> runs;
    try {
        runs = discover_runs(target);
    } catch (const std::exception& e) {
        err << "validate: " << e.what() << '\n';
        return kExitFailure;
    }
    if (runs.empty()) {
        err << "validate: no run artifacts under " << target.string() << '\n';
        return kExitFailure;
    }

    const double host_tol = opt.tolerance_host_ms / 1000.0;
    const double mic_tol = opt.tolerance_mic_ms / 1000.0;
    std::vector<std::string> problems;
    for (const fs::path& dir : runs) {
        const std::string run_id = dir_label(dir);
        ParsedRun parsed;
        try {
            parsed = load_run_dir(dir);
        } catch (const std::exception& e) {
            err << "validate: " << run_id << ": " << e.what() << '\n';
            return kExitFailure;
        }
        auto ctx = [&](const std::string& what) { return run_id + ": " + what; };
        for (const auto& [node, samples] : parsed.host_power) {
            std::vector<TimeAnchor> anchors;
            for (const HostPowerSample& s : samples) {
                report_violations(ctx(host_stream_id(node)), validate(s),
                                  problems);
                anchors.push_back(s.anchor);
            }
            report_violations(ctx(host_stream_id(node)),
                              validate_anchor_stream(anchors, host_tol),
                              problems);
        }
        for (const auto& [key, samples] : parsed.mic_power) {
            std::vector<TimeAnchor> anchors;
            for (const MicPowerSample& s : samples) {
                report_violations(
                    ctx(mic_stream_id(key.first, key.second)), validate(s),
                    problems);
                anchors.push_back(s.anchor);
            }
            report_violations(ctx(mic_stream_id(key.first, key.second)),
                              validate_anchor_stream(anchors, mic_tol),
                              problems);
        }
        for (const OffloadRecord& r : parsed.offloads)
            report_violations(
                ctx("offload tag " + std::to_string(r.tag)), validate(r),
                problems);
        for (const auto& [rank, timeline] : parsed.app) {
            report_violations(ctx(app_stream_id(rank)), validate(timeline),
                              problems);
            // Event anchors may coincide (adjacent phase boundaries), so the
            // stream check here is non-decreasing, not strictly increasing.
            for (std::size_t i = 0; i < timeline.event_anchors.size(); ++i) {
                const auto& [name, anchor] = timeline.event_anchors[i];
                report_violations(ctx(app_stream_id(rank) + " event " + name),
                                  validate(anchor), problems);
                if (i > 0 && anchor.tfs <
                                 timeline.event_anchors[i - 1].second.tfs)
                    problems.push_back(ctx(app_stream_id(rank)) +
                                       ": event tfs: non-decreasing (" +
                                       timeline.event_anchors[i - 1].first +
                                       " then " + name + ")");
            }
        }
        out << run_id << ": host streams " << parsed.host_power.size()
            << ", mic streams " << parsed.mic_power.size() << ", offloads "
            << parsed.offloads.size() << ", app ranks " << parsed.app.size()
            << '\n';
    }
    for (const std::string& p : problems) out << "violation: " << p << '\n';
    if (!problems.empty()) {
        err << "validate: " << problems.size() << " violation(s)\n";
        return kExitFailure;
    }
    out << "ok: " << runs.size() << " run(s) validated\n";
    return kExitOk;
}

}  // namespace phiprof::cli

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "phiprof: orchestrate, synthesize, validate and analyze "
        "power/performance runs of offloaded applications"};
    app.require_subcommand(1);
    app.fallthrough();

    phiprof::cli::GlobalOptions opts;
    std::string out;
    std::string executor;
    app.add_option("--out", out, "Output directory (or CSV path for analyze)");
    app.add_option("--executor", executor, "Executor: shell or simulated");
    app.add_option("--tolerance-host-ms", opts.tolerance_host_ms,
                   "Host/app wall-clock sync tolerance, ms")
        ->capture_default_str();
    app.add_option("--tolerance-mic-ms", opts.tolerance_mic_ms,
                   "Device wall-clock sync tolerance, ms")
        ->capture_default_str();

    std::string plan_path;
    CLI::App* run = app.add_subcommand("run", "Execute an experiment plan");
    run->add_option("--plan", plan_path, "Experiment plan (JSON)")->required();

    std::string analyze_target;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Analyze a run directory or an experiment directory");
    analyze->add_option("target", analyze_target, "Run or experiment directory")
        ->required();

    std::string scenario_path;
    CLI::App* synth = app.add_subcommand(
        "synth", "Generate synthetic run artifacts plus ground truth");
    synth->add_option("--scenario", scenario_path,
                      "Scenario document (JSON); omit for the default");

    std::string validate_target;
    CLI::App* validate = app.add_subcommand(
        "validate", "Parse artifacts and check invariants without metrics");
    validate
        ->add_option("target", validate_target, "Run or experiment directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : phiprof::cli::kExitUsage;
    }

    opts.out = out;
    opts.executor = executor;
    if (run->parsed())
        return phiprof::cli::cmd_run(plan_path, opts, std::cout, std::cerr);
    if (analyze->parsed())
        return phiprof::cli::cmd_analyze(analyze_target, opts, std::cout,
                                         std::cerr);
    if (synth->parsed())
        return phiprof::cli::cmd_synth(scenario_path, opts, std::cout,
                                       std::cerr);
    if (validate->parsed())
        return phiprof::cli::cmd_validate(validate_target, opts, std::cout,
                                          std::cerr);
    return phiprof::cli::kExitUsage;
}

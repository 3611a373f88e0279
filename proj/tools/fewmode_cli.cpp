// fewmode_cli.cpp — scenario-driven front end: fit, correct, simulate, oracle, compare, pipeline

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fewmode/errors.hpp"
#include "fewmode/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitNumeric = 3;

struct GlobalArgs {
    std::string scenario_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet{false};
    bool emit_gnuplot{false};
};

fewmode::pipeline::Scenario load(const GlobalArgs& args) {
    auto sc = fewmode::pipeline::load_scenario(args.scenario_path);
    if (!args.out_dir.empty()) sc.outputs = args.out_dir;
    if (args.seed) sc.seed = *args.seed;
    return sc;
}

void note(const GlobalArgs& args, const std::string& msg) {
    if (!args.quiet) std::cout << msg << "\n";
}

int cmd_fit(const GlobalArgs& args, bool with_correction) {
    using namespace fewmode;
    const auto sc = load(args);
    const auto report = pipeline::run_fit(sc);
    std::string path;
    if (with_correction) {
        const auto corr = pipeline::run_correct(sc, report.model);
        path = pipeline::write_artifact(sc, report, &corr);
    } else {
        path = pipeline::write_artifact(sc, report, nullptr);
    }
    note(args, "wrote " + path);
    if (!report.converged) {
        note(args, "fit did not converge (residual_norm = " + std::to_string(report.residual_norm) + ")");
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_simulate(const GlobalArgs& args) {
    using namespace fewmode;
    const auto sc = load(args);
    const auto report = pipeline::run_fit(sc);
    pipeline::Correction corr;
    if (sc.markov_enabled) corr = pipeline::run_correct(sc, report.model);
    pipeline::write_artifact(sc, report, sc.markov_enabled ? &corr : nullptr);
    const auto traj = pipeline::run_simulate(sc, report.model, corr.params);
    const auto path = pipeline::write_model_trajectory(sc, traj, corr.params);
    if (args.emit_gnuplot) pipeline::write_gnuplot_script(sc, false);
    note(args, "wrote " + path);
    return report.converged ? kExitOk : kExitNotConverged;
}

int cmd_oracle(const GlobalArgs& args) {
    using namespace fewmode;
    const auto sc = load(args);
    const auto traj = pipeline::run_oracle(sc);
    const auto path = pipeline::write_oracle_trajectory(sc, traj);
    pipeline::write_oracle_bath(sc);
    note(args, "wrote " + path);
    return kExitOk;
}

int cmd_compare(const GlobalArgs& args, const std::string& path_a, const std::string& path_b) {
    using namespace fewmode;
    const auto a = read_trajectory_csv(path_a);
    const auto b = read_trajectory_csv(path_b);
    const auto err = oracle::relative_error(a, b);
    const std::string dir = args.out_dir.empty() ? "." : args.out_dir;
    std::filesystem::create_directories(dir);
    const auto out = std::filesystem::path(dir) / "error_report.csv";
    oracle::write_error_csv(out.string(), err,
                            {"test: " + path_a, "reference: " + path_b});
    note(args, "wrote " + out.string());
    note(args, "max unflagged epsilon_r = " + std::to_string(err.max_unflagged()));
    return kExitOk;
}

int cmd_pipeline(const GlobalArgs& args) {
    using namespace fewmode;
    const auto sc = load(args);
    const auto result = pipeline::run_pipeline(sc);
    pipeline::write_artifact(sc, result.fit, &result.correction);
    pipeline::write_model_trajectory(sc, result.model_trajectory, result.correction.params);
    if (result.oracle_trajectory) {
        pipeline::write_oracle_trajectory(sc, *result.oracle_trajectory);
        pipeline::write_oracle_bath(sc);
    }
    if (result.error) pipeline::write_error_report(sc, *result.error);
    const auto summary = pipeline::write_summary(sc, result);
    if (args.emit_gnuplot) {
        pipeline::write_gnuplot_script(sc, result.oracle_trajectory.has_value());
    }
    note(args, "wrote " + summary);
    return result.fit.converged ? kExitOk : kExitNotConverged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-mode spectral-density fitting and open-system propagation toolkit"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--scenario", args.scenario_path, "scenario JSON file");
    app.add_option("--out", args.out_dir, "output directory (overrides scenario)");
    app.add_option("--seed", args.seed, "seed override for fitting");
    app.add_flag("--quiet", args.quiet, "suppress progress output");
    app.add_flag("--emit-gnuplot", args.emit_gnuplot, "also write a gnuplot script");

    auto* fit = app.add_subcommand("fit", "fit a few-mode model to the spectral density");
    auto* correct = app.add_subcommand("correct", "fit, then compute residual corrections");
    auto* simulate = app.add_subcommand("simulate", "fit, correct, and propagate the master equation");
    auto* oracle = app.add_subcommand("oracle", "reference dynamics by direct discretization");
    auto* compare = app.add_subcommand("compare", "relative error between two trajectory files");
    auto* pipe = app.add_subcommand("pipeline", "full run with summary");

    std::string cmp_a, cmp_b;
    compare->add_option("test", cmp_a, "trajectory under test")->required();
    compare->add_option("reference", cmp_b, "reference trajectory")->required();

    // global options remain valid when given after the subcommand name
    for (auto* sub : {fit, correct, simulate, oracle, compare, pipe}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    auto need_scenario = [&]() {
        if (args.scenario_path.empty()) {
            throw fewmode::InvalidInputError("--scenario is required for this subcommand");
        }
    };

    try {
        if (fit->parsed()) {
            need_scenario();
            return cmd_fit(args, false);
        }
        if (correct->parsed()) {
            need_scenario();
            return cmd_fit(args, true);
        }
        if (simulate->parsed()) {
            need_scenario();
            return cmd_simulate(args);
        }
        if (oracle->parsed()) {
            need_scenario();
            return cmd_oracle(args);
        }
        if (compare->parsed()) return cmd_compare(args, cmp_a, cmp_b);
        if (pipe->parsed()) {
            need_scenario();
            return cmd_pipeline(args);
        }
    } catch (const fewmode::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fewmode::InvalidInputError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fewmode::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const fewmode::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}

// pipeline.hpp — Stage runners composing fit, correction, propagation, and comparison

#pragma once

#include <optional>
#include <string>

#include "fewmode/markov.hpp"
#include "fewmode/oracle.hpp"
#include "fewmode/scenario.hpp"
#include "fewmode/trajectory.hpp"

namespace fewmode::pipeline {

struct Correction {
    markov::MarkovParams params; // all zero when the correction is disabled
    markov::ValidityReport validity;
};

struct PipelineResult {
    fitmodel::FitReport fit;
    Correction correction;
    Trajectory model_trajectory;
    std::optional<Trajectory> oracle_trajectory;
    std::optional<oracle::ErrorSeries> error;
    // null-space steady-state emitter population, when a unique one exists and
    // the dimension permits the explicit superoperator
    std::optional<double> steady_state_population;
};

fitmodel::FitReport run_fit(const Scenario& sc);

// Residual corrections + beta diagnostic for a fitted model.
Correction run_correct(const Scenario& sc, const fitmodel::FewModeModel& model);

Trajectory run_simulate(const Scenario& sc, const fitmodel::FewModeModel& model,
                        const markov::MarkovParams& params);

Trajectory run_oracle(const Scenario& sc);

// fit -> correct -> simulate [-> oracle -> compare].
PipelineResult run_pipeline(const Scenario& sc);

// Artifact and summary emission (paths below sc.outputs, which is created).
// Returns the artifact path. The artifact carries the fit report and, when
// present, the Markov parameters and validity diagnostic.
std::string write_artifact(const Scenario& sc, const fitmodel::FitReport& fit,
                           const Correction* correction);
std::string write_model_trajectory(const Scenario& sc, const Trajectory& traj,
                                   const markov::MarkovParams& params);
std::string write_oracle_trajectory(const Scenario& sc, const Trajectory& traj);
std::string write_oracle_bath(const Scenario& sc);
std::string write_error_report(const Scenario& sc, const oracle::ErrorSeries& err);
std::string write_summary(const Scenario& sc, const PipelineResult& result);
std::string write_gnuplot_script(const Scenario& sc, bool with_oracle);

// Serialization used by the artifact (shared with tests and the CLI).
std::string fit_report_to_json(const fitmodel::FitReport& report);
fitmodel::FitReport fit_report_from_json(const std::string& text);

} // namespace fewmode::pipeline

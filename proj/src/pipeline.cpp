// pipeline.cpp

#include "fewmode/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fewmode/constants.hpp"
#include "fewmode/errors.hpp"

namespace fewmode::pipeline {

using nlohmann::ordered_json;

namespace {

std::string hex17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json window_to_json(const fitmodel::FitWindow& w) {
    ordered_json j;
    j["lo"] = w.lo;
    j["hi"] = w.hi;
    j["n_grid"] = w.n_grid;
    j["weighting"] = w.weighting == fitmodel::Weighting::relative ? "relative" : "uniform";
    return j;
}

ordered_json model_to_json(const fitmodel::FewModeModel& m) {
    ordered_json j;
    const int n = m.n_modes();
    j["n_modes"] = n;
    std::vector<double> omega_rm;
    omega_rm.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) omega_rm.push_back(m.omega_matrix(i, k));
    }
    j["omega_matrix"] = omega_rm;
    j["kappa"] = std::vector<double>(m.kappa.data(), m.kappa.data() + n);
    j["g"] = std::vector<double>(m.g.data(), m.g.data() + n);
    return j;
}

ordered_json fit_to_json(const fitmodel::FitReport& r) {
    ordered_json j = model_to_json(r.model);
    j["residual_norm"] = r.residual_norm;
    j["window"] = window_to_json(r.window);
    j["n_restarts_used"] = r.n_restarts_used;
    j["converged"] = r.converged;
    return j;
}

ordered_json markov_to_json(const markov::MarkovParams& p) {
    ordered_json j;
    j["delta_mod"] = p.delta_mod;
    j["gamma_mod"] = p.gamma_mod;
    j["delta_mod_tilde"] = p.delta_mod_tilde;
    j["gamma_mod_tilde"] = p.gamma_mod_tilde;
    return j;
}

ordered_json validity_to_json(const markov::ValidityReport& v) {
    ordered_json j;
    j["beta_minus"] = v.beta_minus;
    j["beta_plus"] = v.beta_plus;
    j["g2_minus"] = v.g2_minus;
    j["g2_plus"] = v.g2_plus;
    j["omega_minus"] = v.omega_minus;
    j["omega_plus"] = v.omega_plus;
    j["degenerate_minus"] = v.degenerate_minus;
    j["degenerate_plus"] = v.degenerate_plus;
    return j;
}

std::filesystem::path ensure_outputs(const Scenario& sc) {
    std::filesystem::path dir(sc.outputs);
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<std::string> base_metadata(const Scenario& sc) {
    return {
        "scenario: " + sc.name,
        "scenario_hash: " + sc.content_hash,
        "units: energy=" + sc.energy_unit + " time=" + sc.time_unit,
    };
}

specdens::SpectralDensity shift_source_density(const Scenario& sc) {
    if (sc.free_space_dipole_e_nm) {
        // provided J includes the free-space part; shifts must not see it
        return specdens::SpectralDensity::difference(
            sc.spectral_density,
            specdens::SpectralDensity::free_space(*sc.free_space_dipole_e_nm,
                                                  constants::energy_unit_in_ev(sc.energy_unit)));
    }
    return sc.spectral_density;
}

} // namespace

fitmodel::FitReport run_fit(const Scenario& sc) {
    if (!sc.fit) throw InvalidInputError("scenario `" + sc.name + "` has no fit section");
    fitmodel::FitOptions opts = sc.fit->options;
    opts.seed = sc.effective_fit_seed();
    return fitmodel::fit(sc.spectral_density, sc.fit->window, sc.fit->n_modes, opts);
}

Correction run_correct(const Scenario& sc, const fitmodel::FewModeModel& model) {
    Correction out;
    const auto dj = markov::residual(sc.spectral_density, model);
    const auto dj_s = markov::residual(shift_source_density(sc), model);
    out.params = markov::compute_params(dj_s, dj, sc.emitter.omega_e);
    out.validity = markov::validity_beta(dj, sc.emitter.omega_e, sc.effective_beta_bounds());
    return out;
}

Trajectory run_simulate(const Scenario& sc, const fitmodel::FewModeModel& model,
                        const markov::MarkovParams& params) {
    const auto h_s = lindblad::build_hs(sc.emitter, model, sc.rwa_hamiltonian,
                                        sc.truncation.n_max);
    const auto grid = sc.time_grid();
    lindblad::PropagateOptions opts;
    // signed rates void the positivity guarantee; keep the monitor on record
    opts.record_min_eigenvalue = sc.equation == lindblad::Equation::usc_eq;
    return lindblad::propagate(h_s, params, model, sc.emitter, grid, sc.equation, sc.hbar(),
                               opts);
}

Trajectory run_oracle(const Scenario& sc) {
    if (!sc.oracle.enabled) throw InvalidInputError("scenario `" + sc.name + "` has no oracle run");
    const auto bath = oracle::discretize(sc.spectral_density,
                                         {sc.oracle.range_lo, sc.oracle.range_hi},
                                         sc.truncation.oracle_m);
    const auto grid = sc.time_grid();
    if (sc.oracle.kind == OracleKind::rwa) {
        return oracle::exact_rwa(sc.emitter, bath, grid, sc.hbar());
    }
    return oracle::exact_truncated(sc.emitter, bath, sc.truncation.max_excitations, grid,
                                   sc.hbar());
}

PipelineResult run_pipeline(const Scenario& sc) {
    PipelineResult result;
    result.fit = run_fit(sc);
    if (sc.markov_enabled) {
        result.correction = run_correct(sc, result.fit.model);
    } else {
        // beta diagnostic is still meaningful for a fit-only run
        result.correction.validity = markov::validity_beta(
            markov::residual(sc.spectral_density, result.fit.model), sc.emitter.omega_e,
            sc.effective_beta_bounds());
    }
    result.model_trajectory = run_simulate(sc, result.fit.model, result.correction.params);
    if (sc.oracle.enabled) {
        result.oracle_trajectory = run_oracle(sc);
        result.error = oracle::relative_error(result.model_trajectory, *result.oracle_trajectory);
    }
    const auto h_s = lindblad::build_hs(sc.emitter, result.fit.model, sc.rwa_hamiltonian,
                                        sc.truncation.n_max);
    if (h_s.dim() <= 64) {
        try {
            const auto liouville = lindblad::assemble_liouvillian(
                h_s, result.correction.params, result.fit.model, sc.equation, sc.hbar());
            const auto rho_ss = lindblad::steady_state(liouville);
            const auto pop_op = lindblad::emitter_operator(
                h_s.space, lindblad::sigma_plus2() * lindblad::sigma_minus2());
            result.steady_state_population = lindblad::expectation(rho_ss, pop_op).real();
        } catch (const StructuralError&) {
            // no unique steady state (e.g. dissipation-free): omit the readout
        }
    }
    return result;
}

std::string fit_report_to_json(const fitmodel::FitReport& report) {
    return fit_to_json(report).dump(2) + "\n";
}

fitmodel::FitReport fit_report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.contains("fit")) j = j.at("fit");
        fitmodel::FitReport r;
        const int n = j.at("n_modes").get<int>();
        const auto omega = j.at("omega_matrix").get<std::vector<double>>();
        const auto kappa = j.at("kappa").get<std::vector<double>>();
        const auto g = j.at("g").get<std::vector<double>>();
        if (static_cast<int>(omega.size()) != n * n || static_cast<int>(kappa.size()) != n ||
            static_cast<int>(g.size()) != n) {
            throw ParseError("fit report: array lengths inconsistent with n_modes");
        }
        r.model.omega_matrix = Eigen::MatrixXd(n, n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) r.model.omega_matrix(i, k) = omega[i * n + k];
        }
        r.model.kappa = Eigen::Map<const Eigen::VectorXd>(kappa.data(), n);
        r.model.g = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
        r.model.validate();
        r.residual_norm = j.at("residual_norm").get<double>();
        const auto& w = j.at("window");
        r.window.lo = w.at("lo").get<double>();
        r.window.hi = w.at("hi").get<double>();
        r.window.n_grid = w.at("n_grid").get<int>();
        r.window.weighting = w.at("weighting").get<std::string>() == "relative"
                                 ? fitmodel::Weighting::relative
                                 : fitmodel::Weighting::uniform;
        r.n_restarts_used = j.at("n_restarts_used").get<int>();
        r.converged = j.at("converged").get<bool>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit report JSON: ") + e.what());
    }
}

std::string write_artifact(const Scenario& sc, const fitmodel::FitReport& fit,
                           const Correction* correction) {
    const auto dir = ensure_outputs(sc);
    ordered_json doc;
    doc["scenario"] = sc.name;
    doc["scenario_hash"] = sc.content_hash;
    doc["units"] = {{"energy", sc.energy_unit}, {"time", sc.time_unit}};
    doc["fit"] = fit_to_json(fit);
    if (correction) {
        doc["markov"] = markov_to_json(correction->params);
        doc["validity"] = validity_to_json(correction->validity);
    }
    const auto path = dir / "fit_report.json";
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "'");
    out << doc.dump(2) << "\n";
    return path.string();
}

std::string write_model_trajectory(const Scenario& sc, const Trajectory& traj,
                                   const markov::MarkovParams& params) {
    const auto dir = ensure_outputs(sc);
    auto meta = base_metadata(sc);
    meta.push_back("markov: delta_mod=" + hex17(params.delta_mod) +
                   " gamma_mod=" + hex17(params.gamma_mod) +
                   " delta_mod_tilde=" + hex17(params.delta_mod_tilde) +
                   " gamma_mod_tilde=" + hex17(params.gamma_mod_tilde));
    meta.push_back(std::string("equation: ") +
                   (sc.equation == lindblad::Equation::usc_eq ? "usc_eq" : "rwa_eq"));
    const auto path = dir / "trajectory_model.csv";
    write_trajectory_csv(path.string(), traj, meta);
    return path.string();
}

std::string write_oracle_trajectory(const Scenario& sc, const Trajectory& traj) {
    const auto dir = ensure_outputs(sc);
    auto meta = base_metadata(sc);
    meta.push_back(std::string("oracle: ") +
                   (sc.oracle.kind == OracleKind::truncated ? "truncated" : "rwa") +
                   " m=" + std::to_string(sc.truncation.oracle_m));
    const auto path = dir / "trajectory_oracle.csv";
    write_trajectory_csv(path.string(), traj, meta);
    return path.string();
}

std::string write_oracle_bath(const Scenario& sc) {
    if (!sc.oracle.enabled) throw InvalidInputError("scenario `" + sc.name + "` has no oracle run");
    const auto bath = oracle::discretize(sc.spectral_density,
                                         {sc.oracle.range_lo, sc.oracle.range_hi},
                                         sc.truncation.oracle_m);
    const auto dir = ensure_outputs(sc);
    const auto path = dir / "bath.csv";
    oracle::write_bath_csv(path.string(), bath, base_metadata(sc));
    return path.string();
}

std::string write_error_report(const Scenario& sc, const oracle::ErrorSeries& err) {
    const auto dir = ensure_outputs(sc);
    const auto path = dir / "error_report.csv";
    oracle::write_error_csv(path.string(), err, base_metadata(sc));
    return path.string();
}

std::string write_summary(const Scenario& sc, const PipelineResult& result) {
    const auto dir = ensure_outputs(sc);
    ordered_json doc;
    doc["scenario"] = sc.name;
    doc["scenario_hash"] = sc.content_hash;
    doc["units"] = {{"energy", sc.energy_unit}, {"time", sc.time_unit}};
    doc["fit"] = fit_to_json(result.fit);
    doc["markov_enabled"] = sc.markov_enabled;
    doc["markov"] = markov_to_json(result.correction.params);
    doc["validity"] = validity_to_json(result.correction.validity);
    doc["equation"] = sc.equation == lindblad::Equation::usc_eq ? "usc_eq" : "rwa_eq";
    doc["negative_rate_active"] = result.correction.params.gamma_mod < 0.0 ||
                                  (sc.equation == lindblad::Equation::usc_eq &&
                                   result.correction.params.gamma_mod_tilde < 0.0);

    const auto& traj = result.model_trajectory;
    ordered_json tj;
    tj["final_population"] = traj.emitter_population.back();
    double max_drift = 0.0;
    for (double d : traj.trace_drift) max_drift = std::max(max_drift, d);
    tj["max_trace_drift"] = max_drift;
    tj["warnings"] = traj.warnings;
    doc["model_trajectory"] = tj;
    if (result.steady_state_population) {
        doc["steady_state_population"] = *result.steady_state_population;
    }

    if (result.error) {
        ordered_json ej;
        ej["max_unflagged"] = result.error->max_unflagged();
        ej["mean_unflagged"] = result.error->mean_unflagged();
        ej["flagged_fraction"] = result.error->flagged_fraction();
        doc["relative_error"] = ej;
    }

    const auto path = dir / "summary.json";
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "'");
    out << doc.dump(2) << "\n";
    return path.string();
}

std::string write_gnuplot_script(const Scenario& sc, bool with_oracle) {
    const auto dir = ensure_outputs(sc);
    const auto path = dir / "plot.gp";
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "'");
    out << "set datafile separator ','\n"
        << "set xlabel 't [" << sc.time_unit << "]'\n"
        << "set ylabel 'emitter population'\n"
        << "set key top right\n"
        << "plot 'trajectory_model.csv' using 1:2 with lines title 'model'";
    if (with_oracle) {
        out << ", \\\n     'trajectory_oracle.csv' using 1:2 with lines title 'exact'";
    }
    out << "\n";
    return path.string();
}

} // namespace fewmode::pipeline

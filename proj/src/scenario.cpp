// scenario.cpp

#include "fewmode/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fewmode/constants.hpp"
#include "fewmode/errors.hpp"

namespace fewmode::pipeline {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError("missing field `" + (context.empty() ? key : context + "." + key) + "`");
    }
    return obj.at(key);
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
    const json& v = require(obj, key, context);
    if (!v.is_number()) {
        throw ParseError("field `" + context + "." + key + "` must be a number");
    }
    return v.get<double>();
}

specdens::SpectralDensity parse_density(const json& spec, const std::string& base_dir,
                                        double energy_unit_ev) {
    const std::string type = require(spec, "type", "spectral_density").get<std::string>();
    if (type == "lorentzian_sum") {
        std::vector<specdens::LorentzianMode> modes;
        for (const auto& m : require(spec, "modes", "spectral_density")) {
            modes.push_back({require_number(m, "g", "spectral_density.modes"),
                             require_number(m, "omega0", "spectral_density.modes"),
                             require_number(m, "kappa", "spectral_density.modes")});
        }
        return specdens::SpectralDensity::lorentzian_sum(std::move(modes));
    }
    if (type == "coupled_ohmic") {
        return specdens::SpectralDensity::coupled_ohmic(
            require_number(spec, "g", "spectral_density"),
            require_number(spec, "omega_c", "spectral_density"),
            require_number(spec, "kappa", "spectral_density"));
    }
    if (type == "tabulated") {
        const std::string rel = require(spec, "path", "spectral_density").get<std::string>();
        const auto path = std::filesystem::path(base_dir) / rel;
        if (!std::filesystem::exists(path)) {
            throw ParseError("spectral_density.path: file not found: " + path.string());
        }
        return specdens::load_tabulated_file(path.string());
    }
    if (type == "free_space") {
        return specdens::SpectralDensity::free_space(
            require_number(spec, "dipole_e_nm", "spectral_density"), energy_unit_ev);
    }
    if (type == "sum") {
        std::vector<specdens::SpectralDensity> terms;
        for (const auto& t : require(spec, "terms", "spectral_density")) {
            terms.push_back(parse_density(t, base_dir, energy_unit_ev));
        }
        return specdens::SpectralDensity::sum(std::move(terms));
    }
    throw ParseError("spectral_density.type: unknown variant '" + type + "'");
}

lindblad::EmitterParams parse_emitter(const json& spec) {
    lindblad::EmitterParams e;
    e.omega_e = require_number(spec, "omega_e", "emitter");
    if (!(e.omega_e > 0.0)) throw ParseError("emitter.omega_e must be positive");
    if (spec.contains("initial_state")) {
        const json& st = spec.at("initial_state");
        if (st.is_string()) {
            const std::string s = st.get<std::string>();
            if (s == "excited") {
                e.initial_state = lindblad::InitialState::excited;
            } else if (s == "ground") {
                e.initial_state = lindblad::InitialState::ground;
            } else {
                throw ParseError("emitter.initial_state: unknown state '" + s + "'");
            }
        } else if (st.is_object()) {
            e.initial_state = lindblad::InitialState::superposition;
            e.theta = require_number(st, "theta", "emitter.initial_state");
            e.phi = require_number(st, "phi", "emitter.initial_state");
        } else {
            throw ParseError("emitter.initial_state must be a string or object");
        }
    }
    return e;
}

FitSpec parse_fit(const json& spec) {
    FitSpec f;
    const json& w = require(spec, "window", "fit");
    f.window.lo = require_number(w, "lo", "fit.window");
    f.window.hi = require_number(w, "hi", "fit.window");
    f.window.n_grid = static_cast<int>(require_number(w, "n_grid", "fit.window"));
    if (w.contains("weighting")) {
        const std::string s = w.at("weighting").get<std::string>();
        if (s == "uniform") {
            f.window.weighting = fitmodel::Weighting::uniform;
        } else if (s == "relative") {
            f.window.weighting = fitmodel::Weighting::relative;
        } else {
            throw ParseError("fit.window.weighting: expected uniform or relative, got '" + s + "'");
        }
    }
    const double n_modes = require_number(spec, "n_modes", "fit");
    if (!(n_modes >= 1.0)) throw ParseError("fit.n_modes must be a positive integer");
    f.n_modes = static_cast<int>(n_modes);
    if (spec.contains("options")) {
        const json& o = spec.at("options");
        if (o.contains("max_restarts")) f.options.max_restarts = o.at("max_restarts").get<int>();
        if (o.contains("tol")) f.options.tol = o.at("tol").get<double>();
        if (o.contains("max_iterations")) f.options.max_iterations = o.at("max_iterations").get<int>();
        if (o.contains("seed")) f.seed = o.at("seed").get<std::uint64_t>();
    }
    return f;
}

} // namespace

double Scenario::hbar() const {
    return constants::hbar_in(energy_unit, time_unit);
}

std::vector<double> Scenario::time_grid() const {
    std::vector<double> grid(times.n_points);
    for (int k = 0; k < times.n_points; ++k) {
        grid[k] = times.t_max * k / (times.n_points - 1);
    }
    return grid;
}

std::uint64_t Scenario::effective_fit_seed() const {
    if (fit && fit->seed) return *fit->seed;
    return seed;
}

std::pair<double, double> Scenario::effective_beta_bounds() const {
    if (beta_bounds) return *beta_bounds;
    return {0.0, 3.0 * emitter.omega_e};
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }

    Scenario sc;
    sc.content_hash = fnv1a_hex(json_text);
    sc.name = require(doc, "name", "").get<std::string>();

    const json& units = require(doc, "units", "");
    sc.energy_unit = require(units, "energy", "units").get<std::string>();
    sc.time_unit = require(units, "time", "units").get<std::string>();
    constants::hbar_in(sc.energy_unit, sc.time_unit); // validates both

    sc.emitter = parse_emitter(require(doc, "emitter", ""));
    sc.spectral_density = parse_density(require(doc, "spectral_density", ""), base_dir,
                                        constants::energy_unit_in_ev(sc.energy_unit));
    if (doc.contains("free_space_dipole_e_nm")) {
        sc.free_space_dipole_e_nm = doc.at("free_space_dipole_e_nm").get<double>();
    }

    if (doc.contains("fit")) sc.fit = parse_fit(doc.at("fit"));
    if (doc.contains("markov_enabled")) sc.markov_enabled = doc.at("markov_enabled").get<bool>();

    if (doc.contains("equation")) {
        const std::string eq = doc.at("equation").get<std::string>();
        if (eq == "rwa_eq") {
            sc.equation = lindblad::Equation::rwa_eq;
        } else if (eq == "usc_eq") {
            sc.equation = lindblad::Equation::usc_eq;
        } else {
            throw ParseError("equation: expected rwa_eq or usc_eq, got '" + eq + "'");
        }
    }
    if (doc.contains("rwa_hamiltonian")) sc.rwa_hamiltonian = doc.at("rwa_hamiltonian").get<bool>();

    if (doc.contains("truncation")) {
        const json& t = doc.at("truncation");
        if (t.contains("n_max")) sc.truncation.n_max = t.at("n_max").get<int>();
        if (t.contains("oracle_m")) sc.truncation.oracle_m = t.at("oracle_m").get<int>();
        if (t.contains("max_excitations")) {
            sc.truncation.max_excitations = t.at("max_excitations").get<int>();
        }
    }

    if (doc.contains("oracle")) {
        const json& o = doc.at("oracle");
        sc.oracle.enabled = o.contains("enabled") ? o.at("enabled").get<bool>() : true;
        if (o.contains("kind")) {
            const std::string k = o.at("kind").get<std::string>();
            if (k == "rwa") {
                sc.oracle.kind = OracleKind::rwa;
            } else if (k == "truncated") {
                sc.oracle.kind = OracleKind::truncated;
            } else {
                throw ParseError("oracle.kind: expected rwa or truncated, got '" + k + "'");
            }
        }
        const json& r = require(o, "range", "oracle");
        if (!r.is_array() || r.size() != 2) throw ParseError("oracle.range must be [lo, hi]");
        sc.oracle.range_lo = r.at(0).get<double>();
        sc.oracle.range_hi = r.at(1).get<double>();
        if (!(sc.oracle.range_lo < sc.oracle.range_hi)) {
            throw ParseError("oracle.range: requires lo < hi");
        }
    }

    if (doc.contains("beta_bounds")) {
        const json& b = doc.at("beta_bounds");
        if (!b.is_array() || b.size() != 2) throw ParseError("beta_bounds must be [lo, hi]");
        sc.beta_bounds = {b.at(0).get<double>(), b.at(1).get<double>()};
    }

    const json& times = require(doc, "times", "");
    sc.times.t_max = require_number(times, "t_max", "times");
    sc.times.n_points = static_cast<int>(require_number(times, "n_points", "times"));
    if (!(sc.times.t_max > 0.0)) throw ParseError("times.t_max must be positive");
    if (sc.times.n_points < 2) throw ParseError("times.n_points must be at least 2");

    if (doc.contains("outputs")) sc.outputs = doc.at("outputs").get<std::string>();
    if (doc.contains("seed")) sc.seed = doc.at("seed").get<std::uint64_t>();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str(), std::filesystem::path(path).parent_path().string());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace fewmode::pipeline

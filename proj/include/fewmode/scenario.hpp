// scenario.hpp — Declarative run configuration

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fewmode/fit.hpp"
#include "fewmode/lindblad.hpp"
#include "fewmode/spectral_density.hpp"

namespace fewmode::pipeline {

struct TimesSpec {
    double t_max{0.0};
    int n_points{0};
};

struct TruncationSpec {
    int n_max{5};
    int oracle_m{1000};
    int max_excitations{1};
};

struct FitSpec {
    fitmodel::FitWindow window;
    int n_modes{1};
    fitmodel::FitOptions options;
    std::optional<std::uint64_t> seed; // overrides the scenario seed when present
};

enum class OracleKind { rwa, truncated };

struct OracleSpec {
    bool enabled{false};
    OracleKind kind{OracleKind::rwa};
    double range_lo{0.0};
    double range_hi{0.0};
};

struct Scenario {
    std::string name;
    std::string energy_unit{"eV"};
    std::string time_unit{"fs"};
    lindblad::EmitterParams emitter;
    specdens::SpectralDensity spectral_density{specdens::SpectralDensity::lorentzian_sum({})};
    // When set, the provided density includes the free-space part with this
    // dipole moment; the shifts then use J - J0 while rates use the full J.
    std::optional<double> free_space_dipole_e_nm;
    std::optional<FitSpec> fit;
    bool markov_enabled{true};
    lindblad::Equation equation{lindblad::Equation::rwa_eq};
    bool rwa_hamiltonian{true};
    TruncationSpec truncation;
    OracleSpec oracle;
    std::optional<std::pair<double, double>> beta_bounds; // defaults to (0, 3 w_e)
    TimesSpec times;
    std::string outputs{"out"};
    std::uint64_t seed{0};
    std::string content_hash; // hex FNV-1a of the scenario file bytes

    double hbar() const;
    std::vector<double> time_grid() const;
    std::uint64_t effective_fit_seed() const;
    std::pair<double, double> effective_beta_bounds() const;
};

// Parse and validate a scenario file; tabulated spectral densities referenced by
// path are loaded eagerly (relative to the scenario file). Throws ParseError with
// the offending field or line.
Scenario load_scenario(const std::string& path);

// Parse from a JSON string (hash computed over the string); base_dir resolves
// relative data paths.
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir);

std::string fnv1a_hex(const std::string& bytes);

} // namespace fewmode::pipeline

// markov.hpp — Perturbative corrections from the residual spectral density

#pragma once

#include "fewmode/few_mode_model.hpp"
#include "fewmode/spectral_density.hpp"

namespace fewmode::markov {

// Emitter-level corrections induced by the residual DJ = J - J_model:
// an energy shift and a decay rate from each frequency sign.
struct MarkovParams {
    double delta_mod{0.0};       // shift from the +omega_e pole
    double gamma_mod{0.0};       // 2 pi DJ(omega_e); may be negative
    double delta_mod_tilde{0.0}; // shift from the -omega_e pole
    double gamma_mod_tilde{0.0}; // 2 pi DJ(-omega_e); negative for physical J
};

struct ValidityReport {
    double g2_minus{0.0};
    double g2_plus{0.0};
    double omega_minus{0.0};
    double omega_plus{0.0};
    double beta_minus{0.0};
    double beta_plus{0.0};
    // Set when the residual weight in a region is nonpositive (or its first
    // moment degenerate), leaving beta undefined; beta is reported as 0 then.
    bool degenerate_minus{false};
    bool degenerate_plus{false};
};

struct PvOptions {
    double rel_tol{1e-9};
    double cutoff_factor{1e6}; // analytic tails integrated out to cutoff_factor * scale
};

// DJ = physical - J_model as a signed spectral density.
specdens::SpectralDensity residual(const specdens::SpectralDensity& physical,
                                   const fitmodel::FewModeModel& model);

// Principal value of \int dj(w) / (w - omega_e) dw over the real axis. Sharp
// features are bridged by singularity subtraction; power-law tails are mapped
// through u = 1/w and integrated to the configured cutoff. Throws NumericError
// when the quadrature stalls.
double delta_mod(const specdens::SpectralDensity& dj_s, double omega_e,
                 const PvOptions& opts = {});

// 2 pi dj(omega_e), returned with its sign.
double gamma_mod(const specdens::SpectralDensity& dj, double omega_e);

// Corrections at the mirrored frequency: delta_mod_tilde (note the overall sign,
// chosen so both shift terms enter the Hamiltonian identically) and
// gamma_mod_tilde = 2 pi dj(-omega_e).
std::pair<double, double> tilde_params(const specdens::SpectralDensity& dj_s,
                                       const specdens::SpectralDensity& dj,
                                       double omega_e, const PvOptions& opts = {});

// All four corrections; dj_s enters the shifts, dj the rates.
MarkovParams compute_params(const specdens::SpectralDensity& dj_s,
                            const specdens::SpectralDensity& dj, double omega_e,
                            const PvOptions& opts = {});

// Reaction-mode perturbativity diagnostic over bounds = (a, b) with
// a < omega_e < b: regional weights g^2, mean frequencies, and
// beta = g^2 / (omega_mean - omega_e)^2 for each side.
ValidityReport validity_beta(const specdens::SpectralDensity& dj, double omega_e,
                             std::pair<double, double> bounds);

} // namespace fewmode::markov

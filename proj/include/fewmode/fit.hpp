// fit.hpp — Least-squares fitting of a few-mode model to a target spectral density

#pragma once

#include <cstdint>

#include "fewmode/few_mode_model.hpp"
#include "fewmode/spectral_density.hpp"

namespace fewmode::fitmodel {

enum class Weighting { uniform, relative };

// Frequency window and sampling used by the fit.
struct FitWindow {
    double lo{0.0};
    double hi{0.0};
    int n_grid{0};
    Weighting weighting{Weighting::uniform};
};

struct FitOptions {
    int max_restarts{16};
    std::uint64_t seed{0};
    double tol{1e-10};   // gradient tolerance relative to the problem scale
    int max_iterations{200};
};

struct FitReport {
    FewModeModel model;
    double residual_norm{0.0}; // window width x mean weighted squared deviation
    FitWindow window;
    int n_restarts_used{0};
    bool converged{false};
};

// Fit n_modes interacting lossy modes to `target` over `window` by multi-start
// Levenberg-Marquardt on the parameters (diagonal and upper-triangle of the
// frequency matrix, sqrt of the decay rates, couplings). Deterministic for a
// fixed seed; a fit that never meets the gradient tolerance returns
// converged = false rather than throwing.
FitReport fit(const specdens::SpectralDensity& target, const FitWindow& window,
              int n_modes, const FitOptions& options = {});

} // namespace fewmode::fitmodel

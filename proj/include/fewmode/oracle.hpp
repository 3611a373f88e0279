// oracle.hpp — Reference dynamics from a direct discretization of the full Hamiltonian

#pragma once

#include <span>
#include <vector>

#include "fewmode/lindblad.hpp"
#include "fewmode/spectral_density.hpp"
#include "fewmode/trajectory.hpp"

namespace fewmode::oracle {

// Uniform midpoint-rule bath: omega_k at cell centers, g_k = sqrt(J(omega_k) dw).
struct DiscretizedBath {
    std::vector<double> omegas;
    std::vector<double> gs;
    double delta_omega{0.0};

    int size() const { return static_cast<int>(omegas.size()); }
    double coupling_weight() const; // sum g_k^2
};

// Throws InvalidInputError when J is negative anywhere on the sample points
// (signed residuals are not discretizable).
DiscretizedBath discretize(const specdens::SpectralDensity& j, std::pair<double, double> range,
                           int m);

struct OracleOptions {
    double rel_tol{1e-12}; // tight: norm conservation to 1e-10 over long runs
    double abs_tol{1e-14};
    long state_cap{200000};
};

// Single-excitation dynamics of an initially excited emitter: amplitudes
// (c_e, c_1..c_M) under dc_e/dt = -i(w_e c_e + sum g_k c_k)/hbar,
// dc_k/dt = -i(w_k c_k + g_k c_e)/hbar. Population |c_e|^2; trace_drift reports
// the norm drift. A warning is attached when the grid runs into the artificial
// recurrence time of the discretized bath.
Trajectory exact_rwa(const lindblad::EmitterParams& emitter, const DiscretizedBath& bath,
                     std::span<const double> times, double hbar = 1.0,
                     const OracleOptions& opts = {});

// Same dynamics by full diagonalization of the (M+1)-dimensional arrow matrix;
// exact in time, no integration error. Available for M <= 2000.
Trajectory exact_rwa_eigen(const lindblad::EmitterParams& emitter, const DiscretizedBath& bath,
                           std::span<const double> times, double hbar = 1.0);

// Unitary propagation of the full discretized Hamiltonian (counterrotating terms
// included unless `include_counterrotating` is false) on the basis of all Fock
// configurations with total excitation <= max_excitations and per-mode occupation
// <= max_excitations. Throws ResourceError when the basis exceeds the state cap.
Trajectory exact_truncated(const lindblad::EmitterParams& emitter, const DiscretizedBath& bath,
                           int max_excitations, std::span<const double> times, double hbar = 1.0,
                           bool include_counterrotating = true, const OracleOptions& opts = {});

struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> epsilon; // relative error; absolute error where flagged
    std::vector<bool> flagged;   // reference population below threshold

    double max_unflagged() const;
    double mean_unflagged() const;
    double flagged_fraction() const;
};

// Pointwise |p - p_ref| / p_ref on the overlapping part of the test grid
// (reference resampled linearly). Points with p_ref below `threshold` report the
// absolute error and are flagged.
ErrorSeries relative_error(const Trajectory& test, const Trajectory& reference,
                           double threshold = 1e-6);

void write_error_csv(const std::string& path, const ErrorSeries& series,
                     const std::vector<std::string>& metadata);

// Bath dump `omega,g` with # metadata, for reproducibility.
void write_bath_csv(const std::string& path, const DiscretizedBath& bath,
                    const std::vector<std::string>& metadata);

} // namespace fewmode::oracle

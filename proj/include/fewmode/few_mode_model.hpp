// few_mode_model.hpp — N interacting lossy modes and their closed-form spectral density

#pragma once

#include <Eigen/Dense>

namespace fewmode::fitmodel {

// A set of N mutually coupled lossy bosonic modes attached to the emitter.
// omega_matrix holds mode energies on the diagonal and coherent couplings
// off-diagonal; kappa the decay rates; g the emitter couplings (with the
// transition dipole moment absorbed).
struct FewModeModel {
    Eigen::MatrixXd omega_matrix; // N x N, symmetric
    Eigen::VectorXd kappa;        // N, nonnegative
    Eigen::VectorXd g;            // N, real

    int n_modes() const { return static_cast<int>(g.size()); }

    // Non-Hermitian effective mode matrix omega_matrix - (i/2) diag(kappa).
    Eigen::MatrixXcd effective_matrix() const;

    // Throws InvalidInputError when shapes disagree, omega_matrix is not
    // symmetric, or any kappa is negative.
    void validate(double symmetry_tol = 1e-12) const;
};

// Spectral density of the model,
//   J(w) = (1/pi) g . Im[(H_eff - w)^-1] . g,
// defined and nonnegative for every real w. Throws NumericError when the
// resolvent is singular (possible only if all kappa vanish and w hits an
// eigenvalue of omega_matrix).
double eval_jfit(const FewModeModel& model, double omega);

// Integral of eval_jfit over the whole real axis, evaluated as sum(g_i^2).
double spectral_sum_rule(const FewModeModel& model);

} // namespace fewmode::fitmodel

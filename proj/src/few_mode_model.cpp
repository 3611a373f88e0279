// few_mode_model.cpp

#include "fewmode/few_mode_model.hpp"

#include <cmath>
#include <complex>

#include "fewmode/errors.hpp"

namespace fewmode::fitmodel {

Eigen::MatrixXcd FewModeModel::effective_matrix() const {
    const int n = n_modes();
    Eigen::MatrixXcd h = omega_matrix.cast<std::complex<double>>();
    for (int i = 0; i < n; ++i) {
        h(i, i) -= std::complex<double>(0.0, 0.5 * kappa(i));
    }
    return h;
}

void FewModeModel::validate(double symmetry_tol) const {
    const int n = n_modes();
    if (omega_matrix.rows() != n || omega_matrix.cols() != n || kappa.size() != n) {
        throw InvalidInputError("FewModeModel: inconsistent dimensions");
    }
    if (n == 0) return; // degenerate model, J identically zero
    const double scale = std::max(1.0, omega_matrix.cwiseAbs().maxCoeff());
    if ((omega_matrix - omega_matrix.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
        throw InvalidInputError("FewModeModel: omega_matrix is not symmetric");
    }
    for (int i = 0; i < n; ++i) {
        if (!(kappa(i) >= 0.0)) {
            throw InvalidInputError("FewModeModel: kappa must be nonnegative");
        }
    }
}

double eval_jfit(const FewModeModel& model, double omega) {
    const int n = model.n_modes();
    if (n == 0) return 0.0;
    if (!std::isfinite(omega)) throw InvalidInputError("eval_jfit: omega must be finite");

    Eigen::MatrixXcd a = model.effective_matrix();
    for (int i = 0; i < n; ++i) a(i, i) -= omega;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    // A is singular only when every kappa vanishes and omega is an eigenvalue.
    const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const double pivot_max = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
    if (pivot_min <= 1e-300 || pivot_min < 1e-15 * pivot_max) {
        throw NumericError("eval_jfit: resolvent singular at omega (all-lossless model on resonance)");
    }

    const Eigen::VectorXcd x = lu.solve(model.g.cast<std::complex<double>>());
    const std::complex<double> quad_form = model.g.cast<std::complex<double>>().dot(x);
    return quad_form.imag() / M_PI;
}

double spectral_sum_rule(const FewModeModel& model) {
    return model.g.squaredNorm();
}

} // namespace fewmode::fitmodel

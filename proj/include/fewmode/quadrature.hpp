// quadrature.hpp — Adaptive Gauss-Kronrod integration and principal-value helpers

#pragma once

#include <cstddef>
#include <functional>

namespace fewmode::quad {

struct Result {
    double value{0.0};
    double abs_error{0.0}; // estimated
    std::size_t evals{0};
    bool converged{true};
};

struct Options {
    double rel_tol{1e-9};
    double abs_tol{0.0};
    int max_depth{55};
    std::size_t max_evals{2'000'000};
};

// Adaptive bisection with a Gauss(7)/Kronrod(15) pair on each subinterval.
// Does not throw on non-convergence; callers inspect Result::converged.
Result integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const Options& opts = {});

// Principal value of \int_a^b f(w) / (w - pole) dw with a < pole < b, computed by
// singularity subtraction:
//   \int (f(w) - f(pole)) / (w - pole) dw + f(pole) * ln|(b - pole) / (pole - a)|.
Result integrate_pv(const std::function<double(double)>& f, double a, double b,
                    double pole, const Options& opts = {});

} // namespace fewmode::quad

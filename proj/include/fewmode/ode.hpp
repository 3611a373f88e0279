// ode.hpp — Adaptive Dormand-Prince 5(4) integration for complex state vectors

#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fewmode::ode {

struct Options {
    double rel_tol{1e-10};
    double abs_tol{1e-12};
    double initial_step{0.0}; // 0: choose automatically
    double max_step{0.0};     // 0: unbounded
};

using Rhs = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

// Integrate dy/dt = rhs(t, y) across the ascending grid `times`, invoking
// `record(index, y)` at every grid point (including index 0 with the initial
// state). Steps never straddle grid points. Throws NumericError on step-size
// underflow, reporting the last good time.
void integrate_over_grid(const Rhs& rhs, Eigen::VectorXcd& y, std::span<const double> times,
                         const std::function<void(std::size_t, const Eigen::VectorXcd&)>& record,
                         const Options& opts = {});

} // namespace fewmode::ode

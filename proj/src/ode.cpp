// ode.cpp — Dormand-Prince 5(4) with PI-free step control

#include "fewmode/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fewmode/errors.hpp"

namespace fewmode::ode {

namespace {

// Dormand-Prince coefficients
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// embedded 4th-order weights
constexpr double e1 = 5179.0 / 57600.0, e3 = 7571.0 / 16695.0, e4 = 393.0 / 640.0,
                 e5 = -92097.0 / 339200.0, e6 = 187.0 / 2100.0, e7 = 1.0 / 40.0;

struct Stepper {
    const Rhs& rhs;
    Eigen::VectorXcd k1, k2, k3, k4, k5, k6, k7, y_new, y_err;

    explicit Stepper(const Rhs& f, Eigen::Index n) : rhs(f) {
        for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &y_new, &y_err}) v->resize(n);
    }

    // One trial step; k1 must hold rhs(t, y). Returns the scaled error norm.
    double attempt(double t, const Eigen::VectorXcd& y, double h, double rel_tol, double abs_tol) {
        rhs(t + c2 * h, y + h * (a21 * k1), k2);
        rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2), k3);
        rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
        rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
        rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
        y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, y_new, k7);
        y_err = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7) - y_new;

        double sum = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            const double e = std::abs(y_err(i)) / sc;
            sum += e * e;
        }
        return std::sqrt(sum / static_cast<double>(y.size()));
    }
};

} // namespace

void integrate_over_grid(const Rhs& rhs, Eigen::VectorXcd& y, std::span<const double> times,
                         const std::function<void(std::size_t, const Eigen::VectorXcd&)>& record,
                         const Options& opts) {
    if (times.empty()) return;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InvalidInputError("integrate_over_grid: time grid must be strictly ascending");
        }
    }

    record(0, y);
    if (times.size() == 1) return;

    Stepper st(rhs, y.size());
    double t = times.front();
    const double span_total = times.back() - times.front();
    double h = opts.initial_step > 0.0 ? opts.initial_step : span_total / 1024.0;
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

    rhs(t, y, st.k1);
    for (std::size_t idx = 1; idx < times.size(); ++idx) {
        const double t_target = times[idx];
        while (t < t_target) {
            const double h_step = std::min(h, t_target - t);
            const double err = st.attempt(t, y, h_step, opts.rel_tol, opts.abs_tol);
            if (err <= 1.0) {
                t += h_step;
                y.swap(st.y_new);
                st.k1.swap(st.k7); // first-same-as-last
                double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
                h = h_step * std::clamp(factor, 0.2, 5.0);
            } else {
                h = h_step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            }
            if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
            if (h < 1e-14 * span_total) {
                throw NumericError("integrate_over_grid: step size underflow at t = " +
                                   std::to_string(t));
            }
        }
        record(idx, y);
    }
}

} // namespace fewmode::ode

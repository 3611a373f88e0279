// markov.cpp

#include "fewmode/markov.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fewmode/errors.hpp"
#include "fewmode/quadrature.hpp"

namespace fewmode::markov {

namespace {

struct PvAccumulator {
    double value{0.0};
    double abs_error{0.0};
    bool converged{true};

    void add(const quad::Result& r) {
        value += r.value;
        abs_error += r.abs_error;
        converged = converged && r.converged;
    }
};

// \int_lo^hi f(1/u) / (u (1 - pole u)) du mirrors \int f(w)/(w - pole) dw over the
// corresponding tail; lo/hi must exclude u = 0 and u = 1/pole.
quad::Result tail_integral(const std::function<double(double)>& f, double u_lo, double u_hi,
                           double pole, const quad::Options& opts) {
    auto g = [&f, pole](double u) {
        return f(1.0 / u) / (u * (1.0 - pole * u));
    };
    return quad::integrate_adaptive(g, u_lo, u_hi, opts);
}

} // namespace

specdens::SpectralDensity residual(const specdens::SpectralDensity& physical,
                                   const fitmodel::FewModeModel& model) {
    return specdens::SpectralDensity::difference(physical,
                                                 specdens::SpectralDensity::fitted_model(model));
}

double delta_mod(const specdens::SpectralDensity& dj_s, double omega_e, const PvOptions& opts) {
    if (!std::isfinite(omega_e)) throw InvalidInputError("delta_mod: omega_e must be finite");

    double feature_scale = std::max(std::abs(omega_e), 1e-30);
    auto [s_lo, s_hi] = dj_s.core_support(feature_scale);
    const double pad = 0.05 * std::max(s_hi - s_lo, feature_scale) + 1e-3 * feature_scale;
    const double core_lo = std::min({s_lo, omega_e, 0.0}) - pad;
    const double core_hi = std::max({s_hi, omega_e, 0.0}) + pad;

    std::vector<double> cuts;
    dj_s.collect_breakpoints(cuts);
    cuts.push_back(core_lo);
    cuts.push_back(core_hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double x) { return x < core_lo || x > core_hi; }),
               cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // keep the pole clear of segment ends so each segment is either regular or
    // properly centered for subtraction
    const double guard = 1e-9 * std::max(feature_scale, 1.0);
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double x) {
                                  return x != core_lo && x != core_hi && std::abs(x - omega_e) < guard;
                              }),
               cuts.end());

    auto f = [&dj_s](double w) { return specdens::evaluate(dj_s, w); };
    quad::Options qopts;
    qopts.rel_tol = opts.rel_tol;

    PvAccumulator acc;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (b <= a) continue;
        if (a < omega_e && omega_e < b) {
            acc.add(quad::integrate_pv(f, a, b, omega_e, qopts));
        } else {
            auto integrand = [&f, omega_e](double w) { return f(w) / (w - omega_e); };
            acc.add(quad::integrate_adaptive(integrand, a, b, qopts));
        }
    }

    if (dj_s.has_power_law_tails()) {
        const double cutoff = opts.cutoff_factor * std::max(feature_scale, 1.0);
        acc.add(tail_integral(f, 1.0 / cutoff, 1.0 / core_hi, omega_e, qopts));
        acc.add(tail_integral(f, 1.0 / core_lo, -1.0 / cutoff, omega_e, qopts));
    }

    if (!acc.converged) {
        throw NumericError("delta_mod: principal-value quadrature did not converge (abs error ~" +
                           std::to_string(acc.abs_error) + ")");
    }
    return acc.value;
}

double gamma_mod(const specdens::SpectralDensity& dj, double omega_e) {
    return 2.0 * M_PI * specdens::evaluate(dj, omega_e);
}

std::pair<double, double> tilde_params(const specdens::SpectralDensity& dj_s,
                                       const specdens::SpectralDensity& dj,
                                       double omega_e, const PvOptions& opts) {
    const double shift = -delta_mod(dj_s, -omega_e, opts);
    const double rate = 2.0 * M_PI * specdens::evaluate(dj, -omega_e);
    return {shift, rate};
}

MarkovParams compute_params(const specdens::SpectralDensity& dj_s,
                            const specdens::SpectralDensity& dj, double omega_e,
                            const PvOptions& opts) {
    MarkovParams p;
    p.delta_mod = delta_mod(dj_s, omega_e, opts);
    p.gamma_mod = gamma_mod(dj, omega_e);
    auto [shift, rate] = tilde_params(dj_s, dj, omega_e, opts);
    p.delta_mod_tilde = shift;
    p.gamma_mod_tilde = rate;
    return p;
}

ValidityReport validity_beta(const specdens::SpectralDensity& dj, double omega_e,
                             std::pair<double, double> bounds) {
    const auto [a, b] = bounds;
    if (!(a < omega_e && omega_e < b)) {
        throw InvalidInputError("validity_beta: bounds must bracket omega_e");
    }
    ValidityReport rep;
    rep.g2_minus = specdens::integrate(dj, a, omega_e, 1e-8);
    rep.g2_plus = specdens::integrate(dj, omega_e, b, 1e-8);

    auto moment = [&dj](double lo, double hi) {
        std::vector<double> cuts;
        dj.collect_breakpoints(cuts);
        cuts.push_back(lo);
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                                  [&](double x) { return x < lo || x > hi; }),
                   cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        double total = 0.0;
        quad::Options qopts;
        qopts.rel_tol = 1e-8;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i]) continue;
            total += quad::integrate_adaptive(
                         [&dj](double w) { return w * specdens::evaluate(dj, w); },
                         cuts[i], cuts[i + 1], qopts)
                         .value;
        }
        return total;
    };

    auto fill_side = [&](double g2, double first_moment, double& omega_mean, double& beta,
                         bool& degenerate) {
        if (!(g2 > 0.0)) {
            degenerate = true;
            beta = 0.0;
            omega_mean = 0.0;
            return;
        }
        omega_mean = first_moment / g2;
        const double det = omega_mean - omega_e;
        if (det == 0.0) {
            degenerate = true;
            beta = 0.0;
            return;
        }
        beta = g2 / (det * det);
    };

    fill_side(rep.g2_minus, moment(a, omega_e), rep.omega_minus, rep.beta_minus,
              rep.degenerate_minus);
    fill_side(rep.g2_plus, moment(omega_e, b), rep.omega_plus, rep.beta_plus,
              rep.degenerate_plus);
    return rep;
}

} // namespace fewmode::markov

// spectral_density.cpp

#include "fewmode/spectral_density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "fewmode/constants.hpp"
#include "fewmode/errors.hpp"
#include "fewmode/quadrature.hpp"

namespace fewmode::specdens {

namespace {

double lorentzian(const LorentzianMode& m, double w) {
    const double half = 0.5 * m.kappa;
    const double d = w - m.omega0;
    return (m.g * m.g / M_PI) * half / (d * d + half * half);
}

double coupled_ohmic_value(const CoupledOhmic& c, double w) {
    if (w <= 0.0) return 0.0;
    const double d = w * w - c.omega_c * c.omega_c;
    return (2.0 * c.g * c.g / M_PI) * c.kappa * c.omega_c * w / (d * d + c.kappa * c.kappa * w * w);
}

double tabulated_value(const Tabulated& t, double w) {
    if (w < t.omega.front() || w > t.omega.back()) return 0.0;
    auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
    if (it == t.omega.begin()) return t.value.front();
    if (it == t.omega.end()) return t.value.back();
    const std::size_t hi = static_cast<std::size_t>(it - t.omega.begin());
    const std::size_t lo = hi - 1;
    const double frac = (w - t.omega[lo]) / (t.omega[hi] - t.omega[lo]);
    return t.value[lo] + frac * (t.value[hi] - t.value[lo]);
}

double free_space_prefactor_ev() {
    // d^2 w^3 / (6 pi^2 eps0 c^3) evaluated for d = 1 e*nm, w = 1 eV, result in eV.
    using namespace fewmode::constants;
    const double e = elementary_charge;
    const double num = e * e * e * e * 1e-18;
    const double den = 6.0 * M_PI * M_PI * epsilon0_si * hbar_si * hbar_si * hbar_si *
                       speed_of_light_si * speed_of_light_si * speed_of_light_si;
    return num / den;
}

} // namespace

SpectralDensity SpectralDensity::lorentzian_sum(std::vector<LorentzianMode> modes) {
    for (const auto& m : modes) {
        if (!(m.g >= 0.0)) throw InvalidInputError("LorentzianMode: g must be nonnegative");
        if (!(m.kappa > 0.0)) throw InvalidInputError("LorentzianMode: kappa must be positive");
        if (!std::isfinite(m.omega0)) throw InvalidInputError("LorentzianMode: omega0 must be finite");
    }
    return SpectralDensity(LorentzianSum{std::move(modes)});
}

SpectralDensity SpectralDensity::coupled_ohmic(double g, double omega_c, double kappa) {
    if (!(g >= 0.0) || !(omega_c > 0.0) || !(kappa > 0.0)) {
        throw InvalidInputError("CoupledOhmic: requires g >= 0, omega_c > 0, kappa > 0");
    }
    return SpectralDensity(CoupledOhmic{g, omega_c, kappa});
}

SpectralDensity SpectralDensity::tabulated(std::vector<double> omega, std::vector<double> value) {
    if (omega.size() != value.size()) {
        throw InvalidInputError("Tabulated: grid and value lengths differ");
    }
    if (omega.size() < 2) {
        throw InvalidInputError("Tabulated: need at least two grid points for interpolation");
    }
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!std::isfinite(omega[i]) || !std::isfinite(value[i])) {
            throw InvalidInputError("Tabulated: non-finite entry at row " + std::to_string(i + 1));
        }
        if (value[i] < 0.0) {
            throw InvalidInputError("Tabulated: negative value at row " + std::to_string(i + 1));
        }
        if (i > 0 && !(omega[i] > omega[i - 1])) {
            throw InvalidInputError("Tabulated: grid not strictly ascending at row " + std::to_string(i + 1));
        }
    }
    return SpectralDensity(Tabulated{std::move(omega), std::move(value)});
}

SpectralDensity SpectralDensity::free_space(double dipole_e_nm, double energy_unit_ev) {
    if (!(dipole_e_nm >= 0.0) || !(energy_unit_ev > 0.0)) {
        throw InvalidInputError("FreeSpace: requires d >= 0 and a positive energy unit");
    }
    return SpectralDensity(FreeSpace{dipole_e_nm, energy_unit_ev});
}

SpectralDensity SpectralDensity::fitted_model(fitmodel::FewModeModel model) {
    model.validate();
    return SpectralDensity(FittedModelJ{std::move(model)});
}

SpectralDensity SpectralDensity::difference(SpectralDensity left, SpectralDensity right) {
    return SpectralDensity(Difference{
        std::make_shared<const SpectralDensity>(std::move(left)),
        std::make_shared<const SpectralDensity>(std::move(right))});
}

SpectralDensity SpectralDensity::sum(std::vector<SpectralDensity> terms) {
    SumOf s;
    s.terms.reserve(terms.size());
    for (auto& t : terms) s.terms.push_back(std::make_shared<const SpectralDensity>(std::move(t)));
    return SpectralDensity(std::move(s));
}

double SpectralDensity::operator()(double omega) const {
    return evaluate(*this, omega);
}

bool SpectralDensity::is_signed() const {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Difference>) {
                return true;
            } else if constexpr (std::is_same_v<T, SumOf>) {
                for (const auto& t : v.terms) {
                    if (t->is_signed()) return true;
                }
                return false;
            } else {
                return false;
            }
        },
        variant_);
}

bool SpectralDensity::has_power_law_tails() const {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LorentzianSum>) {
                for (const auto& m : v.modes) {
                    if (m.g > 0.0) return true;
                }
                return false;
            } else if constexpr (std::is_same_v<T, CoupledOhmic>) {
                return v.g > 0.0;
            } else if constexpr (std::is_same_v<T, FittedModelJ>) {
                return v.model.g.squaredNorm() > 0.0;
            } else if constexpr (std::is_same_v<T, Difference>) {
                return v.left->has_power_law_tails() || v.right->has_power_law_tails();
            } else if constexpr (std::is_same_v<T, SumOf>) {
                for (const auto& t : v.terms) {
                    if (t->has_power_law_tails()) return true;
                }
                return false;
            } else {
                // Tabulated vanishes outside its grid; FreeSpace grows and is
                // never part of a residual by construction.
                return false;
            }
        },
        variant_);
}

void SpectralDensity::collect_breakpoints(std::vector<double>& out) const {
    std::visit(
        [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LorentzianSum>) {
                for (const auto& m : v.modes) {
                    out.push_back(m.omega0);
                    out.push_back(m.omega0 - m.kappa);
                    out.push_back(m.omega0 + m.kappa);
                }
            } else if constexpr (std::is_same_v<T, CoupledOhmic>) {
                out.push_back(0.0);
                out.push_back(v.omega_c);
                out.push_back(v.omega_c - v.kappa);
                out.push_back(v.omega_c + v.kappa);
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                out.insert(out.end(), v.omega.begin(), v.omega.end());
            } else if constexpr (std::is_same_v<T, FreeSpace>) {
                out.push_back(0.0);
            } else if constexpr (std::is_same_v<T, FittedModelJ>) {
                const auto& m = v.model;
                if (m.n_modes() > 0) {
                    // resonances sit at the eigenvalues of the frequency matrix
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.omega_matrix,
                                                                      Eigen::EigenvaluesOnly);
                    const double kmax = m.kappa.maxCoeff();
                    for (int i = 0; i < m.n_modes(); ++i) {
                        const double w0 = es.eigenvalues()(i);
                        const double half = std::max(m.kappa(i), 0.25 * kmax);
                        out.push_back(w0);
                        out.push_back(w0 - half);
                        out.push_back(w0 + half);
                    }
                }
            } else if constexpr (std::is_same_v<T, Difference>) {
                v.left->collect_breakpoints(out);
                v.right->collect_breakpoints(out);
            } else if constexpr (std::is_same_v<T, SumOf>) {
                for (const auto& t : v.terms) t->collect_breakpoints(out);
            }
        },
        variant_);
}

std::pair<double, double> SpectralDensity::core_support(double& feature_scale) const {
    return std::visit(
        [&feature_scale](const auto& v) -> std::pair<double, double> {
            using T = std::decay_t<decltype(v)>;
            constexpr double width_factor = 30.0;
            if constexpr (std::is_same_v<T, LorentzianSum>) {
                double lo = 0.0, hi = 0.0;
                bool first = true;
                for (const auto& m : v.modes) {
                    feature_scale = std::max(feature_scale, std::abs(m.omega0) + m.kappa);
                    const double l = m.omega0 - width_factor * m.kappa;
                    const double h = m.omega0 + width_factor * m.kappa;
                    lo = first ? l : std::min(lo, l);
                    hi = first ? h : std::max(hi, h);
                    first = false;
                }
                if (first) return {0.0, 0.0};
                return {lo, hi};
            } else if constexpr (std::is_same_v<T, CoupledOhmic>) {
                feature_scale = std::max(feature_scale, v.omega_c + v.kappa);
                return {0.0, std::max(5.0 * v.omega_c, v.omega_c + width_factor * v.kappa)};
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                feature_scale = std::max({feature_scale, std::abs(v.omega.front()), std::abs(v.omega.back())});
                return {v.omega.front(), v.omega.back()};
            } else if constexpr (std::is_same_v<T, FreeSpace>) {
                feature_scale = std::max(feature_scale, 1.0);
                return {0.0, 1.0};
            } else if constexpr (std::is_same_v<T, FittedModelJ>) {
                const auto& m = v.model;
                if (m.n_modes() == 0) return {0.0, 0.0};
                // Gershgorin bound on the mode-frequency range
                double lo = 0.0, hi = 0.0;
                bool first = true;
                for (int i = 0; i < m.n_modes(); ++i) {
                    double radius = 0.0;
                    for (int j = 0; j < m.n_modes(); ++j) {
                        if (j != i) radius += std::abs(m.omega_matrix(i, j));
                    }
                    const double c = m.omega_matrix(i, i);
                    lo = first ? c - radius : std::min(lo, c - radius);
                    hi = first ? c + radius : std::max(hi, c + radius);
                    first = false;
                }
                const double kmax = m.kappa.maxCoeff();
                feature_scale = std::max({feature_scale, std::abs(lo), std::abs(hi), kmax});
                return {lo - width_factor * std::max(kmax, 1e-3 * (hi - lo + 1.0)),
                        hi + width_factor * std::max(kmax, 1e-3 * (hi - lo + 1.0))};
            } else if constexpr (std::is_same_v<T, Difference>) {
                auto a = v.left->core_support(feature_scale);
                auto b = v.right->core_support(feature_scale);
                return {std::min(a.first, b.first), std::max(a.second, b.second)};
            } else {
                double lo = 0.0, hi = 0.0;
                bool first = true;
                for (const auto& t : v.terms) {
                    auto s = t->core_support(feature_scale);
                    lo = first ? s.first : std::min(lo, s.first);
                    hi = first ? s.second : std::max(hi, s.second);
                    first = false;
                }
                return {lo, hi};
            }
        },
        variant_);
}

double evaluate(const SpectralDensity& j, double omega) {
    if (!std::isfinite(omega)) throw InvalidInputError("evaluate: omega must be finite");
    return std::visit(
        [omega](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LorentzianSum>) {
                double s = 0.0;
                for (const auto& m : v.modes) s += lorentzian(m, omega);
                return s;
            } else if constexpr (std::is_same_v<T, CoupledOhmic>) {
                return coupled_ohmic_value(v, omega);
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                return tabulated_value(v, omega);
            } else if constexpr (std::is_same_v<T, FreeSpace>) {
                if (omega <= 0.0) return 0.0;
                return free_space_j(v.dipole_e_nm, omega, v.energy_unit_ev);
            } else if constexpr (std::is_same_v<T, FittedModelJ>) {
                return fitmodel::eval_jfit(v.model, omega);
            } else if constexpr (std::is_same_v<T, Difference>) {
                return (*v.left)(omega) - (*v.right)(omega);
            } else {
                double s = 0.0;
                for (const auto& t : v.terms) s += (*t)(omega);
                return s;
            }
        },
        j.variant());
}

double free_space_j(double dipole_e_nm, double omega, double energy_unit_ev) {
    if (!std::isfinite(omega) || omega < 0.0) {
        throw InvalidInputError("free_space_j: omega must be finite and nonnegative");
    }
    static const double prefactor = free_space_prefactor_ev();
    const double u = energy_unit_ev;
    return prefactor * dipole_e_nm * dipole_e_nm * omega * omega * omega * u * u;
}

SpectralDensity load_tabulated(std::istream& in) {
    std::vector<double> grid;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double w = 0.0, jv = 0.0;
        if (!(row >> w >> jv)) {
            throw ParseError("line " + std::to_string(line_no) + ": expected two numeric columns");
        }
        std::string extra;
        if (row >> extra) {
            throw ParseError("line " + std::to_string(line_no) + ": trailing content '" + extra + "'");
        }
        if (!std::isfinite(w) || !std::isfinite(jv)) {
            throw ParseError("line " + std::to_string(line_no) + ": non-finite entry");
        }
        if (jv < 0.0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative spectral density");
        }
        if (!grid.empty() && !(w > grid.back())) {
            throw ParseError("line " + std::to_string(line_no) + ": grid not strictly ascending");
        }
        grid.push_back(w);
        values.push_back(jv);
    }
    if (grid.size() < 2) {
        throw ParseError("need at least two data rows for interpolation, got " +
                         std::to_string(grid.size()));
    }
    return SpectralDensity::tabulated(std::move(grid), std::move(values));
}

SpectralDensity load_tabulated_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open spectral-density file '" + path + "'");
    try {
        return load_tabulated(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

double integrate(const SpectralDensity& j, double a, double b, double rel_tol) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw InvalidInputError("integrate: requires finite a < b");
    }
    std::vector<double> cuts;
    j.collect_breakpoints(cuts);
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double x) { return x < a || x > b; }),
               cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto f = [&j](double w) { return evaluate(j, w); };
    quad::Options opts;
    opts.rel_tol = rel_tol;
    double total = 0.0;
    double err = 0.0;
    bool converged = true;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        auto r = quad::integrate_adaptive(f, cuts[i], cuts[i + 1], opts);
        total += r.value;
        err += r.abs_error;
        converged = converged && r.converged;
    }
    if (!converged) {
        throw NumericError("integrate: quadrature did not converge (achieved abs error ~" +
                           std::to_string(err) + ")");
    }
    return total;
}

} // namespace fewmode::specdens

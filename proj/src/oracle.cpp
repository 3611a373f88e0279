// oracle.cpp

#include "fewmode/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "fewmode/errors.hpp"
#include "fewmode/ode.hpp"

namespace fewmode::oracle {

namespace {

constexpr std::complex<double> kImag{0.0, 1.0};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void require_initially_excited(const lindblad::EmitterParams& emitter, const char* who) {
    if (emitter.initial_state != lindblad::InitialState::excited) {
        throw InvalidInputError(std::string(who) + ": requires an initially excited emitter");
    }
}

void check_recurrence(const DiscretizedBath& bath, double t_max, double hbar,
                      Trajectory& traj) {
    if (bath.delta_omega <= 0.0) return;
    const double t_rec = 2.0 * M_PI * hbar / bath.delta_omega;
    if (t_max > 0.8 * t_rec) {
        traj.warnings.push_back("time grid extends past 80% of the discretization recurrence time (" +
                                format_double(t_rec) + ")");
    }
}

// Sparse state of a truncated Fock basis entry: emitter bit plus up to
// max_excitations occupied modes.
struct BasisState {
    int emitter{0};
    std::vector<std::pair<int, int>> occ; // (mode, occupation), sorted by mode

    int total() const {
        int t = emitter;
        for (auto& [m, n] : occ) t += n;
        return t;
    }
};

// Lexicographic order of the dense occupation vectors (emitter, n_1, ..., n_M),
// evaluated on the sparse representation.
bool lex_less(const BasisState& a, const BasisState& b) {
    if (a.emitter != b.emitter) return a.emitter < b.emitter;
    std::size_t ia = 0, ib = 0;
    while (ia < a.occ.size() || ib < b.occ.size()) {
        const int ma = ia < a.occ.size() ? a.occ[ia].first : INT32_MAX;
        const int mb = ib < b.occ.size() ? b.occ[ib].first : INT32_MAX;
        if (ma < mb) return false; // first difference at mode ma: a > 0 = b there
        if (mb < ma) return true;
        if (ma == INT32_MAX) break;
        if (a.occ[ia].second != b.occ[ib].second) return a.occ[ia].second < b.occ[ib].second;
        ++ia;
        ++ib;
    }
    return false;
}

std::uint64_t pack_key(const BasisState& s) {
    std::uint64_t key = static_cast<std::uint64_t>(s.emitter);
    int shift = 1;
    for (auto& [m, n] : s.occ) {
        key |= (static_cast<std::uint64_t>(m + 1) << shift);
        shift += 14;
        key |= (static_cast<std::uint64_t>(n) << shift);
        shift += 3;
    }
    return key;
}

void enumerate_photon_parts(int m_modes, int budget, int per_mode_cap, int start,
                            std::vector<std::pair<int, int>>& current,
                            std::vector<BasisState>& out, int emitter_bit) {
    if (budget == 0) {
        BasisState s;
        s.emitter = emitter_bit;
        s.occ = current;
        out.push_back(std::move(s));
        return;
    }
    for (int m = start; m < m_modes; ++m) {
        for (int n = 1; n <= std::min(budget, per_mode_cap); ++n) {
            current.emplace_back(m, n);
            enumerate_photon_parts(m_modes, budget - n, per_mode_cap, m + 1, current, out,
                                   emitter_bit);
            current.pop_back();
        }
    }
}

} // namespace

double DiscretizedBath::coupling_weight() const {
    double s = 0.0;
    for (double g : gs) s += g * g;
    return s;
}

DiscretizedBath discretize(const specdens::SpectralDensity& j, std::pair<double, double> range,
                           int m) {
    const auto [a, b] = range;
    if (!(a < b)) throw InvalidInputError("discretize: requires a < b");
    if (m < 1) throw InvalidInputError("discretize: need at least one mode");

    DiscretizedBath bath;
    bath.delta_omega = (b - a) / m;
    bath.omegas.resize(m);
    bath.gs.resize(m);
    for (int k = 0; k < m; ++k) {
        const double w = a + (k + 0.5) * bath.delta_omega;
        const double jv = specdens::evaluate(j, w);
        if (jv < 0.0) {
            throw InvalidInputError("discretize: spectral density negative at omega = " +
                                    format_double(w) + " (signed residuals are not discretizable)");
        }
        bath.omegas[k] = w;
        bath.gs[k] = std::sqrt(jv * bath.delta_omega);
    }
    return bath;
}

Trajectory exact_rwa(const lindblad::EmitterParams& emitter, const DiscretizedBath& bath,
                     std::span<const double> times, double hbar, const OracleOptions& opts) {
    require_initially_excited(emitter, "exact_rwa");
    const int m = bath.size();

    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.emitter_population.resize(times.size());
    traj.trace_drift.resize(times.size());
    if (!times.empty()) check_recurrence(bath, times.back(), hbar, traj);

    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(m + 1);
    c(0) = 1.0;

    const double inv_hbar = 1.0 / hbar;
    auto rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.resize(y.size());
        std::complex<double> acc = emitter.omega_e * y(0);
        for (int k = 0; k < m; ++k) acc += bath.gs[k] * y(k + 1);
        dy(0) = -kImag * inv_hbar * acc;
        for (int k = 0; k < m; ++k) {
            dy(k + 1) = -kImag * inv_hbar * (bath.omegas[k] * y(k + 1) + bath.gs[k] * y(0));
        }
    };

    auto record = [&](std::size_t idx, const Eigen::VectorXcd& y) {
        traj.emitter_population[idx] = std::norm(y(0));
        traj.trace_drift[idx] = std::abs(y.squaredNorm() - 1.0);
    };

    ode::Options oopts;
    oopts.rel_tol = opts.rel_tol;
    oopts.abs_tol = opts.abs_tol;
    ode::integrate_over_grid(rhs, c, times, record, oopts);
    return traj;
}

Trajectory exact_rwa_eigen(const lindblad::EmitterParams& emitter, const DiscretizedBath& bath,
                           std::span<const double> times, double hbar) {
    require_initially_excited(emitter, "exact_rwa_eigen");
    const int m = bath.size();
    if (m > 2000) {
        throw ResourceError("exact_rwa_eigen: diagonalization limited to 2000 bath modes");
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m + 1);
    h(0, 0) = emitter.omega_e;
    for (int k = 0; k < m; ++k) {
        h(k + 1, k + 1) = bath.omegas[k];
        h(0, k + 1) = h(k + 1, 0) = bath.gs[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    // c(0) = e_0, so c_e(t) = sum_m V(0,m)^2 e^{-i lambda_m t / hbar}
    const Eigen::VectorXd weights = es.eigenvectors().row(0).transpose();
    const Eigen::VectorXd& lambda = es.eigenvalues();

    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.emitter_population.resize(times.size());
    traj.trace_drift.assign(times.size(), 0.0);
    if (!times.empty()) check_recurrence(bath, times.back(), hbar, traj);

    for (std::size_t idx = 0; idx < times.size(); ++idx) {
        std::complex<double> ce = 0.0;
        const double t = times[idx] / hbar;
        for (int k = 0; k <= m; ++k) {
            ce += weights(k) * weights(k) * std::exp(-kImag * lambda(k) * t);
        }
        traj.emitter_population[idx] = std::norm(ce);
    }
    return traj;
}

Trajectory exact_truncated(const lindblad::EmitterParams& emitter, const DiscretizedBath& bath,
                           int max_excitations, std::span<const double> times, double hbar,
                           bool include_counterrotating, const OracleOptions& opts) {
    require_initially_excited(emitter, "exact_truncated");
    if (max_excitations < 1 || max_excitations > 3) {
        throw InvalidInputError("exact_truncated: max_excitations must be 1, 2, or 3");
    }
    const int m = bath.size();
    if (m >= (1 << 13)) {
        throw ResourceError("exact_truncated: too many bath modes for the packed basis index");
    }

    // Enumerate all configurations with total excitation <= max_excitations and
    // per-mode occupation <= max_excitations, in lexicographic occupation order.
    std::vector<BasisState> basis;
    std::vector<std::pair<int, int>> scratch;
    for (int e = 0; e <= 1; ++e) {
        for (int photons = 0; photons + e <= max_excitations; ++photons) {
            enumerate_photon_parts(m, photons, max_excitations, 0, scratch, basis, e);
        }
    }
    std::sort(basis.begin(), basis.end(), lex_less);
    const long dim = static_cast<long>(basis.size());
    if (dim > opts.state_cap) {
        throw ResourceError("exact_truncated: basis of " + std::to_string(dim) +
                            " states exceeds cap " + std::to_string(opts.state_cap) +
                            "; reduce M or max_excitations");
    }

    std::unordered_map<std::uint64_t, int> index;
    index.reserve(basis.size() * 2);
    for (long i = 0; i < dim; ++i) index[pack_key(basis[i])] = static_cast<int>(i);

    auto occupation_of = [](const BasisState& s, int mode) {
        for (auto& [mm, nn] : s.occ) {
            if (mm == mode) return nn;
        }
        return 0;
    };
    auto with_occ = [](const BasisState& s, int mode, int n_new, int e_new) {
        BasisState t;
        t.emitter = e_new;
        t.occ.reserve(s.occ.size() + 1);
        for (auto& [mm, nn] : s.occ) {
            if (mm != mode) t.occ.emplace_back(mm, nn);
        }
        if (n_new > 0) t.occ.emplace_back(mode, n_new);
        std::sort(t.occ.begin(), t.occ.end());
        return t;
    };

    using Triplet = Eigen::Triplet<std::complex<double>>;
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(dim) * (2 * m / 4 + 4));
    for (long s_idx = 0; s_idx < dim; ++s_idx) {
        const BasisState& s = basis[s_idx];
        double diag = s.emitter * emitter.omega_e;
        for (auto& [mm, nn] : s.occ) diag += nn * bath.omegas[mm];
        triplets.emplace_back(static_cast<int>(s_idx), static_cast<int>(s_idx), diag);

        const int total = s.total();
        for (int mode = 0; mode < m; ++mode) {
            const double g = bath.gs[mode];
            if (g == 0.0) continue;
            const int n = occupation_of(s, mode);
            // sigma^+ a : |0, n> -> |1, n-1>
            if (s.emitter == 0 && n >= 1) {
                const auto t = with_occ(s, mode, n - 1, 1);
                triplets.emplace_back(index.at(pack_key(t)), static_cast<int>(s_idx),
                                      g * std::sqrt(static_cast<double>(n)));
            }
            // sigma^- a^dag : |1, n> -> |0, n+1>
            if (s.emitter == 1 && n + 1 <= max_excitations) {
                const auto t = with_occ(s, mode, n + 1, 0);
                triplets.emplace_back(index.at(pack_key(t)), static_cast<int>(s_idx),
                                      g * std::sqrt(static_cast<double>(n + 1)));
            }
            if (include_counterrotating) {
                // sigma^+ a^dag : |0, n> -> |1, n+1>
                if (s.emitter == 0 && n + 1 <= max_excitations && total + 2 <= max_excitations) {
                    const auto t = with_occ(s, mode, n + 1, 1);
                    triplets.emplace_back(index.at(pack_key(t)), static_cast<int>(s_idx),
                                          g * std::sqrt(static_cast<double>(n + 1)));
                }
                // sigma^- a : |1, n> -> |0, n-1>
                if (s.emitter == 1 && n >= 1) {
                    const auto t = with_occ(s, mode, n - 1, 0);
                    triplets.emplace_back(index.at(pack_key(t)), static_cast<int>(s_idx),
                                          g * std::sqrt(static_cast<double>(n)));
                }
            }
        }
    }

    Eigen::SparseMatrix<std::complex<double>> h(dim, dim);
    h.setFromTriplets(triplets.begin(), triplets.end());
    triplets.clear();
    triplets.shrink_to_fit();

    // initial state |e> x vacuum
    BasisState init;
    init.emitter = 1;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(index.at(pack_key(init))) = 1.0;

    std::vector<char> excited(dim);
    for (long i = 0; i < dim; ++i) excited[i] = static_cast<char>(basis[i].emitter);

    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.emitter_population.resize(times.size());
    traj.trace_drift.resize(times.size());
    if (!times.empty()) check_recurrence(bath, times.back(), hbar, traj);

    const double inv_hbar = 1.0 / hbar;
    auto rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = (-kImag * inv_hbar) * (h * y);
    };
    auto record = [&](std::size_t idx, const Eigen::VectorXcd& y) {
        double pop = 0.0;
        for (long i = 0; i < dim; ++i) {
            if (excited[i]) pop += std::norm(y(i));
        }
        traj.emitter_population[idx] = pop;
        traj.trace_drift[idx] = std::abs(y.squaredNorm() - 1.0);
    };

    ode::Options oopts;
    oopts.rel_tol = opts.rel_tol;
    oopts.abs_tol = opts.abs_tol;
    ode::integrate_over_grid(rhs, psi, times, record, oopts);
    return traj;
}

double ErrorSeries::max_unflagged() const {
    double mx = 0.0;
    for (std::size_t i = 0; i < epsilon.size(); ++i) {
        if (!flagged[i]) mx = std::max(mx, epsilon[i]);
    }
    return mx;
}

double ErrorSeries::mean_unflagged() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < epsilon.size(); ++i) {
        if (!flagged[i]) {
            sum += epsilon[i];
            ++n;
        }
    }
    return n ? sum / n : 0.0;
}

double ErrorSeries::flagged_fraction() const {
    if (flagged.empty()) return 0.0;
    std::size_t n = 0;
    for (bool f : flagged) n += f;
    return static_cast<double>(n) / flagged.size();
}

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + f * (ys[hi] - ys[lo]);
}

} // namespace

ErrorSeries relative_error(const Trajectory& test, const Trajectory& reference, double threshold) {
    if (test.times.empty() || reference.times.empty()) {
        throw InvalidInputError("relative_error: empty trajectory");
    }
    const double lo = std::max(test.times.front(), reference.times.front());
    const double hi = std::min(test.times.back(), reference.times.back());
    if (!(lo <= hi)) throw InvalidInputError("relative_error: disjoint time ranges");

    ErrorSeries series;
    for (std::size_t k = 0; k < test.times.size(); ++k) {
        const double t = test.times[k];
        if (t < lo || t > hi) continue;
        const double p = test.emitter_population[k];
        const double p_ref = interpolate(reference.times, reference.emitter_population, t);
        series.times.push_back(t);
        if (p_ref < threshold) {
            series.epsilon.push_back(std::abs(p - p_ref));
            series.flagged.push_back(true);
        } else {
            series.epsilon.push_back(std::abs(p - p_ref) / p_ref);
            series.flagged.push_back(false);
        }
    }
    return series;
}

void write_error_csv(const std::string& path, const ErrorSeries& series,
                     const std::vector<std::string>& metadata) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    for (const auto& line : metadata) out << "# " << line << "\n";
    out << "# max_unflagged: " << format_double(series.max_unflagged()) << "\n";
    out << "# mean_unflagged: " << format_double(series.mean_unflagged()) << "\n";
    out << "# flagged_fraction: " << format_double(series.flagged_fraction()) << "\n";
    out << "t,epsilon_r,flag\n";
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        out << format_double(series.times[k]) << ',' << format_double(series.epsilon[k]) << ','
            << (series.flagged[k] ? 1 : 0) << "\n";
    }
}

void write_bath_csv(const std::string& path, const DiscretizedBath& bath,
                    const std::vector<std::string>& metadata) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    for (const auto& line : metadata) out << "# " << line << "\n";
    out << "# columns: omega,g\n";
    for (int k = 0; k < bath.size(); ++k) {
        out << format_double(bath.omegas[k]) << ',' << format_double(bath.gs[k]) << "\n";
    }
}

} // namespace fewmode::oracle

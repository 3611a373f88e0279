#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fewmode/errors.hpp"
#include "fewmode/lindblad.hpp"
#include "fewmode/ode.hpp"

using namespace fewmode;
using namespace fewmode::lindblad;

namespace {

fitmodel::FewModeModel single_mode(double g, double w, double k) {
    fitmodel::FewModeModel m;
    m.omega_matrix = Eigen::MatrixXd::Constant(1, 1, w);
    m.kappa = Eigen::VectorXd::Constant(1, k);
    m.g = Eigen::VectorXd::Constant(1, g);
    return m;
}

fitmodel::FewModeModel no_modes() {
    fitmodel::FewModeModel m;
    m.omega_matrix = Eigen::MatrixXd::Zero(0, 0);
    m.kappa = Eigen::VectorXd::Zero(0);
    m.g = Eigen::VectorXd::Zero(0);
    return m;
}

std::vector<double> grid(double t_max, int n) {
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k) g[k] = t_max * k / (n - 1);
    return g;
}

Matrix excitation_number(const ModeSpace& space) {
    Matrix n = emitter_operator(space, sigma_plus2() * sigma_minus2());
    const Matrix a = destroy_op(space.n_max);
    for (int i = 0; i < space.n_modes; ++i) {
        n += mode_operator(space, i, (a.adjoint() * a).eval());
    }
    return n;
}

} // namespace

TEST_CASE("decoupled spectrum: eigenvalues are m w11 + s we") {
    EmitterParams emitter{1.3, InitialState::excited, 0, 0};
    auto h = build_hs(emitter, single_mode(0.0, 0.7, 0.0), true, 3);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
    std::vector<double> expected;
    for (int s = 0; s <= 1; ++s) {
        for (int m = 0; m <= 3; ++m) expected.push_back(m * 0.7 + s * 1.3);
    }
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < 8; ++i) {
        CHECK(es.eigenvalues()(i) == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("vacuum rabi splitting of the resonant single-excitation doublet is 2g") {
    const double g = 0.13, we = 1.0;
    EmitterParams emitter{we, InitialState::excited, 0, 0};
    auto h = build_hs(emitter, single_mode(g, we, 0.0), true, 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
    // spectrum: 0, we - g, we + g, 2 we (n_max = 1)
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(we - g).epsilon(1e-12));
    CHECK(es.eigenvalues()(2) == doctest::Approx(we + g).epsilon(1e-12));
}

TEST_CASE("rwa Hamiltonian commutes with the excitation number; full coupling does not") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto model = single_mode(0.2, 1.1, 0.0);
    auto h_rwa = build_hs(emitter, model, true, 2);
    auto h_full = build_hs(emitter, model, false, 2);
    const Matrix n = excitation_number(h_rwa.space);
    const double comm_rwa = (h_rwa.matrix * n - n * h_rwa.matrix).cwiseAbs().maxCoeff();
    const double comm_full = (h_full.matrix * n - n * h_full.matrix).cwiseAbs().maxCoeff();
    CHECK(comm_rwa < 1e-12);
    CHECK(comm_full > 0.1);
    // counterrotating entries couple |g,0> and |e,1>
    CHECK(std::abs(h_full.matrix(h_full.space.mode_dim() + 1, 0)) ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(h_rwa.matrix(h_rwa.space.mode_dim() + 1, 0)) < 1e-15);
}

TEST_CASE("dimension cap produces a resource error") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    fitmodel::FewModeModel m;
    m.omega_matrix = Eigen::MatrixXd::Identity(4, 4);
    m.kappa = Eigen::VectorXd::Constant(4, 0.1);
    m.g = Eigen::VectorXd::Constant(4, 0.1);
    CHECK_THROWS_AS((void)build_hs(emitter, m, true, 9), ResourceError);
}

TEST_CASE("idle emitter stays excited") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto model = single_mode(0.0, 1.0, 0.1);
    auto h = build_hs(emitter, model, true, 2);
    markov::MarkovParams zero;
    auto traj = propagate(h, zero, model, emitter, grid(10.0, 21), Equation::rwa_eq);
    for (double p : traj.emitter_population) CHECK(p == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("no modes: emitter decays exponentially at gamma_mod") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto model = no_modes();
    auto h = build_hs(emitter, model, true, 1);
    markov::MarkovParams params;
    params.gamma_mod = 0.35;
    auto times = grid(12.0, 25);
    auto traj = propagate(h, params, model, emitter, times, Equation::rwa_eq);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(traj.emitter_population[k] ==
              doctest::Approx(std::exp(-0.35 * times[k])).epsilon(1e-6));
    }
}

TEST_CASE("jaynes-cummings exchange: population follows cos^2(g t)") {
    const double g = 0.21;
    EmitterParams emitter{1.7, InitialState::excited, 0, 0};
    auto model = single_mode(g, 1.7, 0.0);
    auto h = build_hs(emitter, model, true, 2);
    markov::MarkovParams zero;
    auto times = grid(30.0, 61);
    auto traj = propagate(h, zero, model, emitter, times, Equation::rwa_eq);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double c = std::cos(g * times[k]);
        CHECK(traj.emitter_population[k] == doctest::Approx(c * c).epsilon(1e-6));
        // exchanged population sits in the mode
        CHECK(traj.mode_populations[0][k] ==
              doctest::Approx(1.0 - c * c).epsilon(1e-6));
    }
}

TEST_CASE("time-unit conversion: hbar rescales the rabi phase") {
    const double g = 0.21, hbar = 0.6582119569;
    EmitterParams emitter{1.7, InitialState::excited, 0, 0};
    auto model = single_mode(g, 1.7, 0.0);
    auto h = build_hs(emitter, model, true, 1);
    markov::MarkovParams zero;
    auto times = grid(10.0, 11);
    auto traj = propagate(h, zero, model, emitter, times, Equation::rwa_eq, hbar);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double c = std::cos(g * times[k] / hbar);
        CHECK(traj.emitter_population[k] == doctest::Approx(c * c).epsilon(1e-6));
    }
}

TEST_CASE("excitation is conserved without dissipation under the rwa Hamiltonian") {
    EmitterParams emitter{1.2, InitialState::excited, 0, 0};
    auto model = single_mode(0.15, 1.0, 0.0);
    auto h = build_hs(emitter, model, true, 3);
    markov::MarkovParams zero;
    auto traj = propagate(h, zero, model, emitter, grid(20.0, 41), Equation::rwa_eq);
    for (std::size_t k = 0; k < traj.n_points(); ++k) {
        const double total = traj.emitter_population[k] + traj.mode_populations[0][k];
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
}

TEST_CASE("dissipative run preserves trace, hermiticity, and positivity") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto model = single_mode(0.2, 1.0, 0.15);
    auto h = build_hs(emitter, model, true, 3);
    markov::MarkovParams params;
    params.gamma_mod = 0.02;
    params.delta_mod = 0.01;
    PropagateOptions opts;
    opts.record_min_eigenvalue = true;
    auto traj = propagate(h, params, model, emitter, grid(40.0, 81), Equation::rwa_eq, 1.0, opts);
    for (std::size_t k = 0; k < traj.n_points(); ++k) {
        CHECK(traj.trace_drift[k] < 1e-8);
        CHECK(traj.min_eigenvalue[k] > -1e-10); // nonnegative rates: CP map
    }
    CHECK(traj.warnings.empty());
}

TEST_CASE("negative mirrored rate: trace still preserved, warning attached") {
    EmitterParams emitter{0.58, InitialState::excited, 0, 0};
    auto model = single_mode(0.25, 0.58, 0.1);
    auto h = build_hs(emitter, model, false, 3);
    markov::MarkovParams params;
    params.delta_mod = 0.0026;
    params.delta_mod_tilde = 0.0026;
    params.gamma_mod_tilde = -0.0046;
    auto traj = propagate(h, params, model, emitter, grid(50.0, 51), Equation::usc_eq,
                          0.6582119569);
    CHECK(!traj.warnings.empty());
    for (double d : traj.trace_drift) CHECK(d < 1e-8);
}

TEST_CASE("hermiticity of the propagated state") {
    EmitterParams emitter{1.0, InitialState::superposition, 1.1, 0.4};
    auto model = single_mode(0.2, 0.9, 0.1);
    auto h = build_hs(emitter, model, false, 2);
    markov::MarkovParams params;
    params.gamma_mod = 0.01;
    const auto liouville = assemble_liouvillian(h, params, model, Equation::rwa_eq, 1.0);
    Matrix rho = initial_density(emitter, h.space);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-14);
    Matrix drho(rho.rows(), rho.cols());
    liouville.apply(rho, drho);
    CHECK((drho - drho.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(drho.trace()) < 1e-13);
}

TEST_CASE("steady state of a decaying system is ground x vacuum") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto model = single_mode(0.2, 1.0, 0.3);
    auto h = build_hs(emitter, model, true, 2);
    markov::MarkovParams params;
    params.gamma_mod = 0.05;
    const auto liouville = assemble_liouvillian(h, params, model, Equation::rwa_eq, 1.0);
    const Matrix rho_ss = steady_state(liouville);
    CHECK(std::abs(rho_ss(0, 0).real() - 1.0) < 1e-9);
    CHECK(rho_ss.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("long-time propagation approaches the steady state in trace distance") {
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto model = single_mode(0.2, 1.05, 0.4);
    auto h = build_hs(emitter, model, true, 2);
    markov::MarkovParams params;
    params.gamma_mod = 0.08;
    const auto liouville = assemble_liouvillian(h, params, model, Equation::rwa_eq, 1.0);
    const Matrix rho_ss = steady_state(liouville);

    // propagate to t = 10 / min-rate
    const double t_end = 10.0 / 0.08;
    auto traj_grid = grid(t_end, 3);
    Matrix rho = initial_density(emitter, h.space);
    Eigen::VectorXcd y = Eigen::Map<Eigen::VectorXcd>(rho.data(), rho.size());
    Matrix deriv(rho.rows(), rho.cols());
    auto rhs = [&](double, const Eigen::VectorXcd& state, Eigen::VectorXcd& dstate) {
        const Eigen::Map<const Matrix> r(state.data(), rho.rows(), rho.cols());
        liouville.apply(r, deriv);
        dstate = Eigen::Map<const Eigen::VectorXcd>(deriv.data(), deriv.size());
    };
    ode::integrate_over_grid(rhs, y, traj_grid, [](std::size_t, const Eigen::VectorXcd&) {});
    const Eigen::Map<const Matrix> rho_end(y.data(), rho.rows(), rho.cols());

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * ((rho_end - rho_ss) +
                                                    (rho_end - rho_ss).adjoint()));
    const double trace_distance = 0.5 * es.eigenvalues().cwiseAbs().sum();
    CHECK(trace_distance < 1e-4);
}

TEST_CASE("dissipation-free generator has a degenerate null space") {
    auto model = single_mode(0.2, 1.0, 0.0);
    EmitterParams emitter{1.0, InitialState::excited, 0, 0};
    auto h = build_hs(emitter, model, true, 1);
    markov::MarkovParams zero;
    const auto liouville = assemble_liouvillian(h, zero, model, Equation::rwa_eq, 1.0);
    CHECK_THROWS_AS((void)steady_state(liouville), StructuralError);
}

TEST_CASE("emitter parameters are validated") {
    auto model = single_mode(0.2, 1.0, 0.1);
    EmitterParams bad{-1.0, InitialState::excited, 0, 0};
    CHECK_THROWS_AS((void)build_hs(bad, model, true, 2), InvalidInputError);
    CHECK_THROWS_AS((void)build_hs(EmitterParams{1.0}, model, true, 0), InvalidInputError);
}

TEST_CASE("expectation values") {
    ModeSpace space{1, 1};
    EmitterParams excited{1.0, InitialState::excited, 0, 0};
    const Matrix rho = initial_density(excited, space);
    CHECK(expectation(rho, Matrix::Identity(4, 4)).real() == doctest::Approx(1.0));
    const Matrix pop = emitter_operator(space, sigma_plus2() * sigma_minus2());
    CHECK(expectation(rho, pop).real() == doctest::Approx(1.0));

    // (1 + a^dag)/sqrt(2) |0>: mean occupation 1/2
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(1) = 1.0 / std::sqrt(2.0);
    const Matrix rho_mode = psi * psi.adjoint();
    const Matrix a = destroy_op(1);
    CHECK(expectation(rho_mode, (a.adjoint() * a).eval()).real() == doctest::Approx(0.5));

    CHECK_THROWS_AS((void)expectation(rho, Matrix::Identity(6, 6)), StructuralError);
}

TEST_CASE("fock truncation convergence for a driven-free decay scenario") {
    EmitterParams emitter{0.58, InitialState::excited, 0, 0};
    auto model = single_mode(0.25, 0.58, 0.1);
    markov::MarkovParams params;
    params.gamma_mod_tilde = -0.0046;
    params.delta_mod = 0.0026;
    params.delta_mod_tilde = 0.0026;
    auto times = grid(30.0, 31);
    auto h6 = build_hs(emitter, model, false, 6);
    auto h12 = build_hs(emitter, model, false, 12);
    auto t6 = propagate(h6, params, model, emitter, times, Equation::usc_eq, 0.6582119569);
    auto t12 = propagate(h12, params, model, emitter, times, Equation::usc_eq, 0.6582119569);
    double peak = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        peak = std::max(peak, t6.emitter_population[k]);
        diff = std::max(diff, std::abs(t6.emitter_population[k] - t12.emitter_population[k]));
    }
    CHECK(diff < 1e-4 * std::max(peak, 1.0));
}

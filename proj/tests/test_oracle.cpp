#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fewmode/errors.hpp"
#include "fewmode/oracle.hpp"
#include "fewmode/spectral_density.hpp"

using namespace fewmode;
using specdens::SpectralDensity;

namespace {

std::vector<double> grid(double t_max, int n) {
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k) g[k] = t_max * k / (n - 1);
    return g;
}

lindblad::EmitterParams excited_emitter(double we) {
    return {we, lindblad::InitialState::excited, 0, 0};
}

SpectralDensity flat_band(double height, double lo, double hi) {
    return SpectralDensity::tabulated({lo, hi}, {height, height});
}

} // namespace

TEST_CASE("single-cell discretization lands on the midpoint") {
    auto j = SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}});
    auto bath = oracle::discretize(j, {0.0, 2.0}, 1);
    CHECK(bath.size() == 1);
    CHECK(bath.omegas[0] == doctest::Approx(1.0));
    CHECK(bath.gs[0] * bath.gs[0] ==
          doctest::Approx(specdens::evaluate(j, 1.0) * 2.0).epsilon(1e-14));
}

TEST_CASE("midpoint rule is exact for a flat density") {
    auto j = flat_band(0.25, 0.0, 4.0);
    for (int m : {1, 7, 100}) {
        auto bath = oracle::discretize(j, {0.0, 4.0}, m);
        CHECK(bath.coupling_weight() == doctest::Approx(0.25 * 4.0).epsilon(1e-13));
    }
}

TEST_CASE("five-line bath weight matches adaptive quadrature within 0.5%") {
    std::vector<specdens::LorentzianMode> modes;
    for (int i = 0; i < 5; ++i) modes.push_back({0.1, 0.8 + 0.6 * i, 0.05});
    auto j = SpectralDensity::lorentzian_sum(modes);
    auto bath = oracle::discretize(j, {-1.0, 5.0}, 4000);
    const double reference = specdens::integrate(j, -1.0, 5.0);
    CHECK(bath.coupling_weight() == doctest::Approx(reference).epsilon(0.005));
}

TEST_CASE("signed residuals are not discretizable") {
    auto d = SpectralDensity::difference(SpectralDensity::lorentzian_sum({}),
                                         SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}}));
    CHECK_THROWS_AS((void)oracle::discretize(d, {0.0, 2.0}, 16), InvalidInputError);
}

TEST_CASE("decoupled bath leaves the emitter excited") {
    auto j = flat_band(0.0, 0.0, 2.0);
    auto bath = oracle::discretize(j, {0.0, 2.0}, 50);
    auto traj = oracle::exact_rwa(excited_emitter(1.0), bath, grid(10.0, 11));
    for (double p : traj.emitter_population) CHECK(p == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("flat band reproduces exponential decay (small benchmark)") {
    // gamma = 2 pi J(we) = 1 for J = 1/(2 pi); band half-width W = 30 gamma.
    // The residue renormalization bounds the deviation at ~2 gamma/(pi W) plus
    // the short-time transient, well under 0.03 for this band.
    const double we = 40.0;
    auto j = flat_band(1.0 / (2.0 * M_PI), we - 30.0, we + 30.0);
    auto bath = oracle::discretize(j, {we - 30.0, we + 30.0}, 2400);
    auto times = grid(3.0, 31);
    auto traj = oracle::exact_rwa(excited_emitter(we), bath, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(traj.emitter_population[k] - std::exp(-times[k])) < 0.03);
    }
    CHECK(traj.warnings.empty());
    for (double d : traj.trace_drift) CHECK(d < 1e-10);
}

TEST_CASE("narrow line produces damped vacuum rabi oscillations near 2g") {
    const double g = 0.1, kappa = 0.01, we = 1.0;
    auto j = SpectralDensity::lorentzian_sum({{g, we, kappa}});
    auto bath = oracle::discretize(j, {we - 2.0, we + 2.0}, 6000);
    auto times = grid(4.0 * M_PI / (2 * g), 201); // two rabi periods
    auto traj = oracle::exact_rwa(excited_emitter(we), bath, times);
    // population should come back near (damped) unity after each 2 pi / (2g)
    const double t_revival = 2.0 * M_PI / (2.0 * g);
    const double idx = t_revival / (times[1] - times[0]);
    const double p_rev = traj.emitter_population[static_cast<std::size_t>(std::lround(idx))];
    const double envelope = std::exp(-0.5 * kappa * t_revival); // amplitude e^{-k t/4}, squared
    CHECK(p_rev == doctest::Approx(envelope).epsilon(0.05));
    // and dip near zero at the half period
    const double p_dip = traj.emitter_population[static_cast<std::size_t>(std::lround(idx / 2))];
    CHECK(p_dip < 0.05);
}

TEST_CASE("amplitude integration and diagonalization give the same populations") {
    auto j = SpectralDensity::lorentzian_sum({{0.09, 1.1, 0.08}, {0.04, 1.9, 0.2}});
    auto bath = oracle::discretize(j, {-0.5, 3.5}, 400);
    auto times = grid(30.0, 31);
    auto ode_route = oracle::exact_rwa(excited_emitter(1.1), bath, times);
    auto eigen_route = oracle::exact_rwa_eigen(excited_emitter(1.1), bath, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(ode_route.emitter_population[k] - eigen_route.emitter_population[k]) <
              1e-9);
    }
    // diagonalization is capped
    auto big = oracle::discretize(j, {-0.5, 3.5}, 2401);
    CHECK_THROWS_AS((void)oracle::exact_rwa_eigen(excited_emitter(1.1), big, times),
                    ResourceError);
}

TEST_CASE("doubling the bath resolution changes populations below half a percent") {
    auto j = SpectralDensity::lorentzian_sum({{0.08, 1.0, 0.1}});
    auto times = grid(20.0, 21); // well below the recurrence time of the coarse bath
    auto coarse = oracle::discretize(j, {-1.0, 3.0}, 300);
    auto fine = oracle::discretize(j, {-1.0, 3.0}, 600);
    auto a = oracle::exact_rwa(excited_emitter(1.0), coarse, times);
    auto b = oracle::exact_rwa(excited_emitter(1.0), fine, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(a.emitter_population[k] - b.emitter_population[k]) < 0.005);
    }
}

TEST_CASE("recurrence guard warns when the grid outruns the bath") {
    auto j = flat_band(0.01, 0.0, 1.0);
    auto bath = oracle::discretize(j, {0.0, 1.0}, 10); // recurrence ~ 2 pi / 0.1 = 63
    auto traj = oracle::exact_rwa(excited_emitter(0.5), bath, grid(60.0, 7));
    CHECK(!traj.warnings.empty());
}

TEST_CASE("truncated oracle without counterrotating terms matches the rwa oracle") {
    auto j = SpectralDensity::lorentzian_sum({{0.08, 1.0, 0.1}});
    auto bath = oracle::discretize(j, {0.0, 2.0}, 40);
    auto times = grid(8.0, 17);
    auto a = oracle::exact_rwa(excited_emitter(1.0), bath, times);
    auto b = oracle::exact_truncated(excited_emitter(1.0), bath, 1, times, 1.0, false);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(a.emitter_population[k] - b.emitter_population[k]) < 1e-8);
    }
}

TEST_CASE("truncated oracle matches a dense full-space propagation at moderate coupling") {
    // single bath cell -> quantum Rabi problem; compare the 3-excitation basis
    // against a dense n_max = 8 density-matrix propagation with no dissipation
    const double we = 1.0, g = 0.1; // eta = 0.1: truncation error well below 1e-4
    auto j = flat_band(g * g / 0.5, we - 0.25, we + 0.25); // single cell -> g_1 = g
    auto bath = oracle::discretize(j, {we - 0.25, we + 0.25}, 1);
    CHECK(bath.gs[0] == doctest::Approx(g).epsilon(1e-12));
    auto times = grid(25.0, 26);
    auto truncated = oracle::exact_truncated(excited_emitter(we), bath, 3, times);

    fitmodel::FewModeModel m;
    m.omega_matrix = Eigen::MatrixXd::Constant(1, 1, bath.omegas[0]);
    m.kappa = Eigen::VectorXd::Zero(1);
    m.g = Eigen::VectorXd::Constant(1, bath.gs[0]);
    auto h = lindblad::build_hs(excited_emitter(we), m, false, 8);
    markov::MarkovParams zero;
    auto dense = lindblad::propagate(h, zero, m, excited_emitter(we), times,
                                     lindblad::Equation::rwa_eq);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(truncated.emitter_population[k] - dense.emitter_population[k]) < 1e-4);
    }
}

TEST_CASE("truncated oracle: decoupled limit stays excited, norm conserved") {
    auto j = flat_band(0.0, 0.0, 2.0);
    auto bath = oracle::discretize(j, {0.0, 2.0}, 25);
    auto traj = oracle::exact_truncated(excited_emitter(1.0), bath, 2, grid(5.0, 6));
    for (double p : traj.emitter_population) CHECK(p == doctest::Approx(1.0).epsilon(1e-10));
    for (double d : traj.trace_drift) CHECK(d < 1e-8);
}

TEST_CASE("truncated oracle enforces the basis cap") {
    auto j = flat_band(0.01, 0.0, 1.0);
    auto bath = oracle::discretize(j, {0.0, 1.0}, 3000);
    oracle::OracleOptions opts;
    opts.state_cap = 100000;
    CHECK_THROWS_AS(
        (void)oracle::exact_truncated(excited_emitter(0.5), bath, 2, grid(1.0, 2), 1.0, true, opts),
        ResourceError);
}

TEST_CASE("oracles require an initially excited emitter") {
    auto j = flat_band(0.01, 0.0, 1.0);
    auto bath = oracle::discretize(j, {0.0, 1.0}, 10);
    lindblad::EmitterParams ground{1.0, lindblad::InitialState::ground, 0, 0};
    CHECK_THROWS_AS((void)oracle::exact_rwa(ground, bath, grid(1.0, 2)), InvalidInputError);
    CHECK_THROWS_AS((void)oracle::exact_truncated(ground, bath, 2, grid(1.0, 2)),
                    InvalidInputError);
}

TEST_CASE("relative error: identical and uniformly scaled trajectories") {
    Trajectory a;
    a.times = grid(10.0, 11);
    a.emitter_population.assign(11, 0.5);
    a.trace_drift.assign(11, 0.0);
    Trajectory b = a;
    auto zero = oracle::relative_error(a, b);
    CHECK(zero.max_unflagged() == 0.0);

    for (auto& p : b.emitter_population) p *= 1.05;
    auto five = oracle::relative_error(b, a);
    CHECK(five.max_unflagged() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(five.flagged_fraction() == 0.0);
}

TEST_CASE("relative error flags points with a tiny reference") {
    Trajectory ref;
    ref.times = {0.0, 1.0, 2.0};
    ref.emitter_population = {1.0, 1e-9, 0.5};
    ref.trace_drift = {0, 0, 0};
    Trajectory test = ref;
    test.emitter_population = {1.0, 2e-9, 0.5};
    auto err = oracle::relative_error(test, ref);
    CHECK(err.flagged[1]);
    CHECK(!err.flagged[0]);
    CHECK(err.epsilon[1] == doctest::Approx(1e-9)); // absolute error at flagged points
}

TEST_CASE("relative error rejects disjoint ranges and resamples shifted grids") {
    Trajectory a, b;
    a.times = {0.0, 1.0, 2.0};
    a.emitter_population = {1.0, 0.8, 0.6};
    a.trace_drift = {0, 0, 0};
    b.times = {5.0, 6.0};
    b.emitter_population = {0.1, 0.2};
    b.trace_drift = {0, 0};
    CHECK_THROWS_AS((void)oracle::relative_error(a, b), InvalidInputError);

    b.times = {0.5, 1.5};
    auto err = oracle::relative_error(a, b); // only t = 1.0 overlaps
    CHECK(err.times.size() == 1);
    CHECK(err.epsilon[0] == doctest::Approx(std::abs(0.8 - 0.15) / 0.15).epsilon(1e-12));
}

TEST_CASE("trajectory csv round trip") {
    Trajectory traj;
    traj.times = {0.0, 0.5, 1.0};
    traj.emitter_population = {1.0, 0.7, 0.4};
    traj.mode_populations = {{0.0, 0.2, 0.5}};
    traj.trace_drift = {0.0, 1e-12, 3e-12};
    const auto path = std::filesystem::temp_directory_path() / "fewmode_traj_test.csv";
    write_trajectory_csv(path.string(), traj, {"scenario: unit-test"});
    auto back = read_trajectory_csv(path.string());
    REQUIRE(back.times.size() == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(back.times[k] == traj.times[k]);
        CHECK(back.emitter_population[k] == traj.emitter_population[k]);
        CHECK(back.mode_populations[0][k] == traj.mode_populations[0][k]);
        CHECK(back.trace_drift[k] == traj.trace_drift[k]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("bath csv dump is parseable as a tabulated density") {
    auto j = flat_band(0.2, 0.0, 1.0);
    auto bath = oracle::discretize(j, {0.0, 1.0}, 8);
    const auto path = std::filesystem::temp_directory_path() / "fewmode_bath_test.csv";
    oracle::write_bath_csv(path.string(), bath, {"test dump"});
    auto loaded = specdens::load_tabulated_file(path.string());
    // grid nodes reproduce g_k exactly
    for (int k = 0; k < bath.size(); ++k) {
        CHECK(specdens::evaluate(loaded, bath.omegas[k]) == bath.gs[k]);
    }
    std::filesystem::remove(path);
}

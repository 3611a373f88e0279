#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fewmode/errors.hpp"
#include "fewmode/spectral_density.hpp"

using namespace fewmode;
using specdens::SpectralDensity;

TEST_CASE("coupled-ohmic form vanishes at nonpositive frequencies") {
    auto j = SpectralDensity::coupled_ohmic(0.25, 0.58, 0.1);
    CHECK(specdens::evaluate(j, -0.1) == 0.0);
    CHECK(specdens::evaluate(j, 0.0) == 0.0);
    CHECK(specdens::evaluate(j, -5.0) == 0.0);
}

TEST_CASE("coupled-ohmic peak value at omega_c") {
    // 2 g^2 / (pi kappa): the resonant value of the normalized damped-mode form
    auto j = SpectralDensity::coupled_ohmic(0.25, 0.58, 0.1);
    const double expected = 2.0 * 0.25 * 0.25 / (M_PI * 0.1);
    CHECK(specdens::evaluate(j, 0.58) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("coupled-ohmic total weight approaches g^2 for narrow lines") {
    // frozen Riemann-sum oracle (4e6 uniform cells over (0, 20 wc), kappa = 0.0116):
    // 0.062104... ~ 0.9937 g^2; the deficit shrinks with kappa / omega_c
    auto j = SpectralDensity::coupled_ohmic(0.25, 0.58, 0.0116);
    const double total = specdens::integrate(j, 0.0, 20 * 0.58);
    CHECK(total == doctest::Approx(0.25 * 0.25).epsilon(0.02));
}

TEST_CASE("lorentzian peak and normalization") {
    const double g = 0.1, w0 = 1.4, k = 0.05;
    auto j = SpectralDensity::lorentzian_sum({{g, w0, k}});
    CHECK(specdens::evaluate(j, w0) ==
          doctest::Approx(2 * g * g / (M_PI * k)).epsilon(1e-14));
    // integral over +-50 widths ~ g^2 within 1%
    const double total = specdens::integrate(j, w0 - 50 * k, w0 + 50 * k);
    CHECK(total == doctest::Approx(g * g).epsilon(0.01));
}

TEST_CASE("physical variants are nonnegative on a dense scan") {
    auto j = SpectralDensity::sum({
        SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}, {0.2, -0.5, 0.3}}),
        SpectralDensity::coupled_ohmic(0.3, 0.7, 0.2),
        SpectralDensity::free_space(0.55),
    });
    for (int i = 0; i <= 2000; ++i) {
        const double w = -5.0 + 10.0 * i / 2000.0;
        CHECK(specdens::evaluate(j, w) >= 0.0);
    }
}

TEST_CASE("sum evaluates as the exact sum of its terms") {
    auto j1 = SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}});
    auto j2 = SpectralDensity::coupled_ohmic(0.3, 0.7, 0.2);
    auto s = SpectralDensity::sum({j1, j2});
    for (double w : {-1.0, 0.3, 0.7, 1.0, 2.5}) {
        CHECK(specdens::evaluate(s, w) ==
              specdens::evaluate(j1, w) + specdens::evaluate(j2, w));
    }
}

TEST_CASE("difference may be negative and is flagged as signed") {
    auto a = SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}});
    auto b = SpectralDensity::lorentzian_sum({{0.2, 1.0, 0.05}});
    auto d = SpectralDensity::difference(a, b);
    CHECK(d.is_signed());
    CHECK(!a.is_signed());
    CHECK(specdens::evaluate(d, 1.0) < 0.0);
}

TEST_CASE("free-space density: cubic frequency scaling and quadratic dipole scaling") {
    CHECK(specdens::free_space_j(0.7, 0.0) == 0.0);
    const double j1 = specdens::free_space_j(0.5, 1.3);
    const double j2 = specdens::free_space_j(1.0, 1.3);
    CHECK(j2 == doctest::Approx(4.0 * j1).epsilon(1e-14));
    CHECK(specdens::free_space_j(0.5, 2.6) == doctest::Approx(8.0 * j1).epsilon(1e-14));
    CHECK_THROWS_AS((void)specdens::free_space_j(0.5, -1.0), InvalidInputError);
}

TEST_CASE("free-space density: quantum-dot dipole at 1.1445 eV") {
    // frozen oracle: hbar * gamma_SI / (2 pi e) with
    // gamma_SI = d^2 w^3 / (3 pi eps0 hbar c^3), d = 0.55 e nm
    CHECK(specdens::free_space_j(0.55, 1.1445) ==
          doctest::Approx(1.803532729647e-08).epsilon(1e-10));
    // meV-unit evaluation scales by the squared unit
    CHECK(specdens::free_space_j(0.55, 1144.5, 1e-3) ==
          doctest::Approx(1.803532729647e-08 * 1e3).epsilon(1e-10));
}

TEST_CASE("tabulated interpolation and round trip") {
    std::istringstream csv("# demo\n1.0,0.5\n2.0,0.7\n");
    auto j = specdens::load_tabulated(csv);
    CHECK(specdens::evaluate(j, 1.5) == doctest::Approx(0.6).epsilon(1e-15));
    // outside the grid: zero by convention
    CHECK(specdens::evaluate(j, 0.99) == 0.0);
    CHECK(specdens::evaluate(j, 2.01) == 0.0);
    // bit-for-bit at the nodes
    CHECK(specdens::evaluate(j, 1.0) == 0.5);
    CHECK(specdens::evaluate(j, 2.0) == 0.7);
}

TEST_CASE("tabulated round trip is exact for random grids") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> grid, values;
    double w = 0.0;
    for (int i = 0; i < 200; ++i) {
        w += 1e-3 + u(rng);
        grid.push_back(w);
        values.push_back(u(rng) * 10.0);
    }
    auto j = SpectralDensity::tabulated(grid, values);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(specdens::evaluate(j, grid[i]) == values[i]);
    }
}

TEST_CASE("tabulated loader rejects malformed input naming the line") {
    std::istringstream single("1.0,0.5\n");
    CHECK_THROWS_AS((void)specdens::load_tabulated(single), ParseError);

    std::istringstream descending("# c\n1.0,0.5\n0.9,0.6\n");
    try {
        (void)specdens::load_tabulated(descending);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    std::istringstream negative("1.0,0.5\n2.0,-0.1\n");
    try {
        (void)specdens::load_tabulated(negative);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("negative") != std::string::npos);
    }

    std::istringstream garbage("1.0,0.5\nfoo,bar\n");
    CHECK_THROWS_AS((void)specdens::load_tabulated(garbage), ParseError);
}

TEST_CASE("non-finite evaluation points are rejected") {
    auto j = SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}});
    CHECK_THROWS_AS((void)specdens::evaluate(j, std::nan("")), InvalidInputError);
    CHECK_THROWS_AS((void)specdens::evaluate(j, INFINITY), InvalidInputError);
}

TEST_CASE("integrate of the zero density returns zero") {
    auto j = SpectralDensity::lorentzian_sum({});
    CHECK(specdens::integrate(j, -1.0, 1.0) == 0.0);
}

TEST_CASE("integrate reports non-convergence on an unresolvable feature") {
    // visible at the deepest bisection level but far too narrow to resolve
    auto j = SpectralDensity::lorentzian_sum({{0.1, 0.5, 1e-18}});
    CHECK_THROWS_AS((void)specdens::integrate(j, 0.0, 1.0, 1e-10), NumericError);
}

TEST_CASE("integrate validates its bounds") {
    auto j = SpectralDensity::lorentzian_sum({{0.1, 1.0, 0.05}});
    CHECK_THROWS_AS((void)specdens::integrate(j, 1.0, 1.0), InvalidInputError);
    CHECK_THROWS_AS((void)specdens::integrate(j, 2.0, 1.0), InvalidInputError);
}

// spectral_density.hpp — Evaluable spectral-density forms J(w)

#pragma once

#include <iosfwd>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "fewmode/few_mode_model.hpp"

namespace fewmode::specdens {

// One Lorentzian resonance: J(w) = (g^2/pi) (kappa/2) / ((w - omega0)^2 + (kappa/2)^2).
struct LorentzianMode {
    double g{0.0};      // coupling strength (energy)
    double omega0{0.0}; // center frequency (energy)
    double kappa{0.0};  // full width (energy)
};

class SpectralDensity;

struct LorentzianSum {
    std::vector<LorentzianMode> modes;
};

// Single mode at omega_c with losses kappa into an Ohmic background:
//   J(w) = theta(w) (2 g^2 / pi) kappa omega_c w / ((w^2 - omega_c^2)^2 + kappa^2 w^2),
// normalized so that the total weight approaches g^2 for kappa << omega_c.
struct CoupledOhmic {
    double g{0.0};
    double omega_c{0.0};
    double kappa{0.0};
};

// Piecewise-linear data on a strictly ascending grid; zero outside the grid range.
struct Tabulated {
    std::vector<double> omega;
    std::vector<double> value;
};

// Free-space emitter coupling J0(w) = d^2 w^3 / (6 pi^2 eps0 c^3), with the dipole
// moment in e*nm and frequencies in the declared energy unit.
struct FreeSpace {
    double dipole_e_nm{0.0};
    double energy_unit_ev{1.0};
};

// Closed-form density of a few-mode model (see eval_jfit).
struct FittedModelJ {
    fitmodel::FewModeModel model;
};

// left - right; the only signed form, used to represent residuals.
struct Difference {
    std::shared_ptr<const SpectralDensity> left;
    std::shared_ptr<const SpectralDensity> right;
};

struct SumOf {
    std::vector<std::shared_ptr<const SpectralDensity>> terms;
};

// Immutable tagged family of evaluable spectral densities. Physical variants
// (everything but Difference) are nonnegative for all frequencies.
class SpectralDensity {
public:
    using Variant = std::variant<LorentzianSum, CoupledOhmic, Tabulated, FreeSpace,
                                 FittedModelJ, Difference, SumOf>;

    static SpectralDensity lorentzian_sum(std::vector<LorentzianMode> modes);
    static SpectralDensity coupled_ohmic(double g, double omega_c, double kappa);
    static SpectralDensity tabulated(std::vector<double> omega, std::vector<double> value);
    static SpectralDensity free_space(double dipole_e_nm, double energy_unit_ev = 1.0);
    static SpectralDensity fitted_model(fitmodel::FewModeModel model);
    static SpectralDensity difference(SpectralDensity left, SpectralDensity right);
    static SpectralDensity sum(std::vector<SpectralDensity> terms);

    double operator()(double omega) const;

    const Variant& variant() const { return variant_; }

    // True when any nested term is a Difference (so values may be negative).
    bool is_signed() const;

    // True when |J| decays like a power law instead of vanishing identically
    // outside a finite interval.
    bool has_power_law_tails() const;

    // Natural subdivision points for quadrature (resonance centers, grid nodes, 0).
    void collect_breakpoints(std::vector<double>& out) const;

    // Conservative interval containing all sharp features; outside it the density
    // is either zero or a smooth tail. Also grows feature_scale to the largest
    // frequency magnitude appearing in the description.
    std::pair<double, double> core_support(double& feature_scale) const;

private:
    explicit SpectralDensity(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

// J(omega). Physical variants return values >= 0; throws InvalidInputError on
// non-finite omega.
double evaluate(const SpectralDensity& j, double omega);

// J0(w) = d^2 w^3 / (6 pi^2 eps0 c^3) with d in e*nm and w in the declared energy
// unit (result in the same unit). Throws InvalidInputError for negative w.
double free_space_j(double dipole_e_nm, double omega, double energy_unit_ev = 1.0);

// Parse two-column CSV `omega,J` (comment lines start with '#'); requires at least
// two rows, a strictly ascending grid and nonnegative values. Errors name the
// offending line.
SpectralDensity load_tabulated(std::istream& in);
SpectralDensity load_tabulated_file(const std::string& path);

// Adaptive quadrature of J over [a, b] at the requested relative tolerance.
// Throws NumericError (with the achieved tolerance) when refinement stalls.
double integrate(const SpectralDensity& j, double a, double b, double rel_tol = 1e-9);

} // namespace fewmode::specdens

// lindblad.hpp — System Hamiltonian, Liouvillian assembly, and density-matrix propagation

#pragma once

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fewmode/few_mode_model.hpp"
#include "fewmode/fock.hpp"
#include "fewmode/markov.hpp"
#include "fewmode/trajectory.hpp"

namespace fewmode::lindblad {

enum class InitialState { excited, ground, superposition };

struct EmitterParams {
    double omega_e{0.0}; // transition energy, > 0
    InitialState initial_state{InitialState::excited};
    double theta{0.0}; // superposition polar angle from |e>
    double phi{0.0};   // superposition relative phase
};

struct SystemOperator {
    ModeSpace space;
    Matrix matrix;
    long dim() const { return space.dim(); }
};

enum class Equation { rwa_eq, usc_eq };

struct PropagateOptions {
    double rel_tol{1e-10};
    double abs_tol{1e-12};
    bool record_min_eigenvalue{false};
    long dim_cap{4096};
};

// H_S = w_e s+s- + sum_ij w_ij a_i^dag a_j + sum_i g_i coupling, with the coupling
// (s+ + s-)(a_i + a_i^dag), reduced to s+ a_i + s- a_i^dag when rwa is set.
// Throws ResourceError when 2 (n_max+1)^N exceeds dim_cap.
SystemOperator build_hs(const EmitterParams& emitter, const fitmodel::FewModeModel& model,
                        bool rwa, int n_max, long dim_cap = 4096);

// Time-independent generator: d rho / dt = -i/hbar [H, rho] + sum_k rate_k/hbar D[o_k] rho.
// Rates are energies and may be negative; hbar converts to the scenario time unit.
class Liouvillian {
public:
    Liouvillian(Matrix hamiltonian, std::vector<std::pair<double, Matrix>> dissipators,
                double hbar);

    long dim() const { return h_.rows(); }
    bool has_negative_rate() const;

    void apply(const Matrix& rho, Matrix& out) const;

    // Explicit (dim^2 x dim^2) matrix acting on column-major vec(rho).
    Matrix superoperator(long dim_cap = 64) const;

private:
    Matrix h_;
    struct Channel {
        double rate;
        Matrix op;
        Matrix op_dag_op;
    };
    std::vector<Channel> channels_;
    double hbar_;
    mutable Matrix work_;
};

// Assemble the generator for the requested equation: the rwa form carries the
// shift -delta_mod s+s- and dissipators gamma_mod D[s-] + sum kappa_i D[a_i];
// the usc form adds -delta_mod_tilde s+s- and gamma_mod_tilde D[s+] (typically
// negative). A warning is attached downstream when any rate is negative.
Liouvillian assemble_liouvillian(const SystemOperator& h_s, const markov::MarkovParams& params,
                                 const fitmodel::FewModeModel& model, Equation equation,
                                 double hbar);

Matrix initial_density(const EmitterParams& emitter, const ModeSpace& space);

// Propagate over the ascending time grid and record emitter/mode populations,
// trace drift, and (optionally) the smallest eigenvalue of rho.
Trajectory propagate(const SystemOperator& h_s, const markov::MarkovParams& params,
                     const fitmodel::FewModeModel& model, const EmitterParams& emitter,
                     std::span<const double> times, Equation equation, double hbar = 1.0,
                     const PropagateOptions& opts = {});

// Null vector of the Liouvillian, normalized to unit trace. Verifies uniqueness
// of the null space and the residual |L rho| before returning; throws
// StructuralError otherwise.
Matrix steady_state(const Liouvillian& liouvillian);

std::complex<double> expectation(const Matrix& rho, const Matrix& op);

} // namespace fewmode::lindblad

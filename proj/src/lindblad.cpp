// lindblad.cpp

#include "fewmode/lindblad.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fewmode/errors.hpp"
#include "fewmode/ode.hpp"

namespace fewmode::lindblad {

namespace {

constexpr std::complex<double> kImag{0.0, 1.0};

void check_hermitian(const Matrix& h) {
    const double norm = h.cwiseAbs().maxCoeff();
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(norm, 1.0)) {
        throw StructuralError("Hamiltonian is not Hermitian");
    }
}

} // namespace

SystemOperator build_hs(const EmitterParams& emitter, const fitmodel::FewModeModel& model,
                        bool rwa, int n_max, long dim_cap) {
    if (!(emitter.omega_e > 0.0)) throw InvalidInputError("build_hs: omega_e must be positive");
    if (n_max < 1) throw InvalidInputError("build_hs: n_max must be >= 1");
    model.validate();

    ModeSpace space{model.n_modes(), n_max};
    if (space.dim() > dim_cap) {
        throw ResourceError("build_hs: Hilbert dimension " + std::to_string(space.dim()) +
                            " exceeds cap " + std::to_string(dim_cap));
    }

    const Matrix sp = sigma_plus2();
    const Matrix sm = sigma_minus2();
    Matrix h = emitter.omega_e * emitter_operator(space, sp * sm);

    const Matrix a1 = destroy_op(n_max);
    std::vector<Matrix> a(model.n_modes());
    for (int i = 0; i < model.n_modes(); ++i) a[i] = mode_operator(space, i, a1);

    for (int i = 0; i < model.n_modes(); ++i) {
        for (int j = 0; j < model.n_modes(); ++j) {
            const double w = model.omega_matrix(i, j);
            if (w != 0.0) h.noalias() += w * (a[i].adjoint() * a[j]);
        }
    }

    const Matrix sig_p = emitter_operator(space, sp);
    const Matrix sig_m = emitter_operator(space, sm);
    for (int i = 0; i < model.n_modes(); ++i) {
        const double g = model.g(i);
        if (g == 0.0) continue;
        if (rwa) {
            h.noalias() += g * (sig_p * a[i]);
            h.noalias() += g * (sig_m * a[i].adjoint());
        } else {
            const Matrix x = a[i] + a[i].adjoint();
            h.noalias() += g * ((sig_p + sig_m) * x);
        }
    }

    check_hermitian(h);
    return SystemOperator{space, std::move(h)};
}

Liouvillian::Liouvillian(Matrix hamiltonian, std::vector<std::pair<double, Matrix>> dissipators,
                         double hbar)
    : h_(std::move(hamiltonian)), hbar_(hbar) {
    if (!(hbar > 0.0)) throw InvalidInputError("Liouvillian: hbar must be positive");
    check_hermitian(h_);
    channels_.reserve(dissipators.size());
    for (auto& [rate, op] : dissipators) {
        if (op.rows() != h_.rows() || op.cols() != h_.cols()) {
            throw StructuralError("Liouvillian: dissipator dimension mismatch");
        }
        Channel c;
        c.rate = rate;
        c.op_dag_op = op.adjoint() * op;
        c.op = std::move(op);
        channels_.push_back(std::move(c));
    }
    work_.resize(h_.rows(), h_.cols());
}

bool Liouvillian::has_negative_rate() const {
    for (const auto& c : channels_) {
        if (c.rate < 0.0) return true;
    }
    return false;
}

void Liouvillian::apply(const Matrix& rho, Matrix& out) const {
    out.noalias() = h_ * rho;
    out.noalias() -= rho * h_;
    out *= -kImag;
    for (const auto& c : channels_) {
        if (c.rate == 0.0) continue;
        work_.noalias() = c.op * rho;
        out.noalias() += c.rate * (work_ * c.op.adjoint());
        work_.noalias() = c.op_dag_op * rho;
        out.noalias() -= (0.5 * c.rate) * work_;
        work_.noalias() = rho * c.op_dag_op;
        out.noalias() -= (0.5 * c.rate) * work_;
    }
    out /= hbar_;
}

Matrix Liouvillian::superoperator(long dim_cap) const {
    const long d = dim();
    if (d > dim_cap) {
        throw ResourceError("Liouvillian::superoperator: dimension " + std::to_string(d) +
                            " exceeds cap " + std::to_string(dim_cap));
    }
    const Matrix id = Matrix::Identity(d, d);
    Matrix l = -kImag * (kron(id, h_) - kron(h_.transpose(), id));
    for (const auto& c : channels_) {
        if (c.rate == 0.0) continue;
        l.noalias() += c.rate * kron(c.op.conjugate(), c.op);
        l.noalias() -= (0.5 * c.rate) * kron(id, c.op_dag_op);
        l.noalias() -= (0.5 * c.rate) * kron(c.op_dag_op.transpose(), id);
    }
    return l / hbar_;
}

Liouvillian assemble_liouvillian(const SystemOperator& h_s, const markov::MarkovParams& params,
                                 const fitmodel::FewModeModel& model, Equation equation,
                                 double hbar) {
    const ModeSpace& space = h_s.space;
    const Matrix sig_p = emitter_operator(space, sigma_plus2());
    const Matrix sig_m = emitter_operator(space, sigma_minus2());
    const Matrix pop_e = sig_p * sig_m;

    Matrix h = h_s.matrix - params.delta_mod * pop_e;
    if (equation == Equation::usc_eq) h -= params.delta_mod_tilde * pop_e;

    std::vector<std::pair<double, Matrix>> dissipators;
    dissipators.emplace_back(params.gamma_mod, sig_m);
    if (equation == Equation::usc_eq) {
        dissipators.emplace_back(params.gamma_mod_tilde, sig_p);
    }
    const Matrix a1 = destroy_op(space.n_max);
    for (int i = 0; i < model.n_modes(); ++i) {
        dissipators.emplace_back(model.kappa(i), mode_operator(space, i, a1));
    }
    return Liouvillian(std::move(h), std::move(dissipators), hbar);
}

Matrix initial_density(const EmitterParams& emitter, const ModeSpace& space) {
    Eigen::Vector2cd psi_e;
    switch (emitter.initial_state) {
        case InitialState::excited:
            psi_e << 0.0, 1.0;
            break;
        case InitialState::ground:
            psi_e << 1.0, 0.0;
            break;
        case InitialState::superposition:
            psi_e << std::sin(0.5 * emitter.theta) * std::exp(kImag * emitter.phi),
                std::cos(0.5 * emitter.theta);
            break;
    }
    const long mdim = space.dim() / 2;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.dim());
    psi(0) = psi_e(0);          // |g> x vacuum
    psi(mdim) = psi_e(1);       // |e> x vacuum
    return psi * psi.adjoint();
}

Trajectory propagate(const SystemOperator& h_s, const markov::MarkovParams& params,
                     const fitmodel::FewModeModel& model, const EmitterParams& emitter,
                     std::span<const double> times, Equation equation, double hbar,
                     const PropagateOptions& opts) {
    if (h_s.dim() > opts.dim_cap) {
        throw ResourceError("propagate: Hilbert dimension exceeds cap");
    }
    const ModeSpace& space = h_s.space;
    const Liouvillian liouville = assemble_liouvillian(h_s, params, model, equation, hbar);

    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.emitter_population.resize(times.size());
    traj.trace_drift.resize(times.size());
    traj.mode_populations.assign(model.n_modes(), std::vector<double>(times.size()));
    if (opts.record_min_eigenvalue) traj.min_eigenvalue.resize(times.size());
    if (liouville.has_negative_rate()) {
        traj.warnings.push_back("negative dissipation rate present (generalized Lindblad form)");
    }

    const Matrix pop_e_op = emitter_operator(space, sigma_plus2() * sigma_minus2());
    std::vector<Matrix> number_ops(model.n_modes());
    const Matrix a1 = destroy_op(space.n_max);
    for (int i = 0; i < model.n_modes(); ++i) {
        number_ops[i] = mode_operator(space, i, (a1.adjoint() * a1).eval());
    }

    const long d = h_s.dim();
    Matrix rho0 = initial_density(emitter, space);
    Eigen::VectorXcd y = Eigen::Map<Eigen::VectorXcd>(rho0.data(), d * d);

    Matrix deriv(d, d);
    auto rhs = [&](double, const Eigen::VectorXcd& state, Eigen::VectorXcd& dstate) {
        const Eigen::Map<const Matrix> rho(state.data(), d, d);
        liouville.apply(rho, deriv);
        dstate = Eigen::Map<const Eigen::VectorXcd>(deriv.data(), d * d);
    };

    auto record = [&](std::size_t idx, const Eigen::VectorXcd& state) {
        const Eigen::Map<const Matrix> rho(state.data(), d, d);
        traj.emitter_population[idx] = expectation(rho, pop_e_op).real();
        for (int m = 0; m < model.n_modes(); ++m) {
            traj.mode_populations[m][idx] = expectation(rho, number_ops[m]).real();
        }
        traj.trace_drift[idx] = std::abs(rho.trace() - std::complex<double>(1.0, 0.0));
        if (opts.record_min_eigenvalue) {
            const Matrix herm = 0.5 * (rho + rho.adjoint());
            Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
            traj.min_eigenvalue[idx] = es.eigenvalues().minCoeff();
        }
    };

    ode::Options oopts;
    oopts.rel_tol = opts.rel_tol;
    oopts.abs_tol = opts.abs_tol;
    ode::integrate_over_grid(rhs, y, times, record, oopts);
    return traj;
}

Matrix steady_state(const Liouvillian& liouvillian) {
    const Matrix l = liouvillian.superoperator();
    Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double tol = 1e-10 * std::max(smax, 1.0);
    int null_count = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) < tol) ++null_count;
    }
    if (null_count == 0) {
        throw StructuralError("steady_state: Liouvillian has no null vector at tolerance");
    }
    if (null_count > 1) {
        throw StructuralError("steady_state: degenerate null space (" +
                              std::to_string(null_count) + " directions)");
    }

    const long d = liouvillian.dim();
    Eigen::VectorXcd v = svd.matrixV().col(sv.size() - 1);
    Matrix rho = Eigen::Map<Matrix>(v.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const std::complex<double> tr = rho.trace();
    if (std::abs(tr) < 1e-12) {
        throw StructuralError("steady_state: null vector is traceless, not a state");
    }
    rho /= tr;

    Matrix residual(d, d);
    liouvillian.apply(rho, residual);
    const double h_scale = std::max(l.cwiseAbs().maxCoeff(), 1e-300);
    if (residual.cwiseAbs().maxCoeff() > 1e-10 * h_scale) {
        throw StructuralError("steady_state: candidate does not satisfy L[rho] = 0 within 1e-10");
    }
    return rho;
}

std::complex<double> expectation(const Matrix& rho, const Matrix& op) {
    if (rho.rows() != op.cols() || rho.cols() != op.rows()) {
        throw StructuralError("expectation: dimension mismatch");
    }
    return (op * rho).trace();
}

} // namespace fewmode::lindblad

// fock.hpp — Operators on the emitter x truncated-mode Hilbert space

#pragma once

#include <Eigen/Dense>

namespace fewmode::lindblad {

using Matrix = Eigen::MatrixXcd;

// Basis ordering: emitter (slowest index) then mode_1 ... mode_N, each mode
// truncated at occupation n_max. Emitter states: index 0 = ground, 1 = excited.
struct ModeSpace {
    int n_modes{0};
    int n_max{1};

    int mode_dim() const { return n_max + 1; }
    long dim() const {
        long d = 2;
        for (int i = 0; i < n_modes; ++i) d *= mode_dim();
        return d;
    }
};

Matrix kron(const Matrix& a, const Matrix& b);

// Single-mode annihilation operator on a (n_max+1)-dimensional Fock space.
Matrix destroy_op(int n_max);

Matrix sigma_minus2(); // 2x2 |g><e|
Matrix sigma_plus2();  // 2x2 |e><g|

// op acting on the emitter factor, identity on all modes.
Matrix emitter_operator(const ModeSpace& space, const Matrix& op2);

// op acting on mode `index`, identity elsewhere.
Matrix mode_operator(const ModeSpace& space, int index, const Matrix& op);

} // namespace fewmode::lindblad

// fock.cpp

#include "fewmode/fock.hpp"

#include <cmath>

#include "fewmode/errors.hpp"

namespace fewmode::lindblad {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix destroy_op(int n_max) {
    if (n_max < 1) throw InvalidInputError("destroy_op: n_max must be >= 1");
    Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix sigma_minus2() {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 1) = 1.0;
    return s;
}

Matrix sigma_plus2() {
    Matrix s = Matrix::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

Matrix emitter_operator(const ModeSpace& space, const Matrix& op2) {
    if (op2.rows() != 2 || op2.cols() != 2) {
        throw InvalidInputError("emitter_operator: expected a 2x2 operator");
    }
    const long mdim = space.dim() / 2;
    return kron(op2, Matrix::Identity(mdim, mdim));
}

Matrix mode_operator(const ModeSpace& space, int index, const Matrix& op) {
    if (index < 0 || index >= space.n_modes) {
        throw InvalidInputError("mode_operator: mode index out of range");
    }
    if (op.rows() != space.mode_dim() || op.cols() != space.mode_dim()) {
        throw InvalidInputError("mode_operator: operator dimension does not match n_max");
    }
    Matrix out = Matrix::Identity(2, 2);
    for (int i = 0; i < space.n_modes; ++i) {
        const long d = space.mode_dim();
        out = kron(out, i == index ? op : Matrix::Identity(d, d));
    }
    return out;
}

} // namespace fewmode::lindblad

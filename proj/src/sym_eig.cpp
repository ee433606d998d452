#include "spdflow/sym_eig.hpp"

#include <cmath>
#include <stdexcept>

namespace spdflow {

SymEig sym_eig(const Matrix3& s) {
    const Matrix3 sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix3> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigensolver failed to converge");
    }
    return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

template <typename Fn>
Matrix3 apply_to_eigenvalues(const Matrix3& s, Fn&& fn) {
    const SymEig eig = sym_eig(s);
    Vector3 mapped;
    for (int i = 0; i < 3; ++i) {
        mapped[i] = fn(eig.values[i]);
    }
    Matrix3 out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
    return 0.5 * (out + out.transpose());
}

} // namespace

Matrix3 sym_exp(const Matrix3& s) {
    return apply_to_eigenvalues(s, [](double x) { return std::exp(x); });
}

Matrix3 sym_log(const Matrix3& s) {
    return apply_to_eigenvalues(s, [](double x) {
        if (x <= 0.0) {
            throw std::domain_error("matrix logarithm requires positive eigenvalues");
        }
        return std::log(x);
    });
}

Matrix3 sym_sqrt(const Matrix3& s) {
    const double scale = s.cwiseAbs().maxCoeff();
    const double slack = -1e-14 * (scale > 0.0 ? scale : 1.0);
    return apply_to_eigenvalues(s, [slack](double x) {
        if (x < slack) {
            throw std::domain_error("matrix square root requires nonnegative eigenvalues");
        }
        return std::sqrt(x < 0.0 ? 0.0 : x);
    });
}

Matrix3 sym_inv_sqrt(const Matrix3& s) {
    return apply_to_eigenvalues(s, [](double x) {
        if (x <= 0.0) {
            throw std::domain_error("inverse square root requires positive eigenvalues");
        }
        return 1.0 / std::sqrt(x);
    });
}

} // namespace spdflow

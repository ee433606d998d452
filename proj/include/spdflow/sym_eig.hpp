#pragma once

// Small utilities built on the 3x3 symmetric eigendecomposition: matrix
// exponential, logarithm, and square root of symmetric matrices. All matrix
// functions here go through Eigen's SelfAdjointEigenSolver — never a series
// expansion — which is unconditionally accurate at this size.

#include <Eigen/Dense>

namespace spdflow {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

struct SymEig {
    Vector3 values;   // ascending
    Matrix3 vectors;  // orthonormal columns, vectors.col(i) pairs with values[i]
};

// Eigendecomposition of a symmetric 3x3 matrix. The input is symmetrized
// ((S+S^T)/2) before the solve so callers may pass products that are symmetric
// only up to round-off.
SymEig sym_eig(const Matrix3& s);

// exp(S) for symmetric S.
Matrix3 sym_exp(const Matrix3& s);

// log(S) for symmetric positive-definite S; throws std::domain_error when an
// eigenvalue is <= 0.
Matrix3 sym_log(const Matrix3& s);

// Principal square root of symmetric positive-semidefinite S; throws
// std::domain_error on a negative eigenvalue (below -1e-14 relative slack;
// tiny negatives are clamped to 0).
Matrix3 sym_sqrt(const Matrix3& s);

// Inverse principal square root of symmetric positive-definite S.
Matrix3 sym_inv_sqrt(const Matrix3& s);

} // namespace spdflow

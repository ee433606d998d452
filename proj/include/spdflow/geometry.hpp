#pragma once

// Exact differential geometry of the SPD cone P(3) under the affine-invariant
// metric ds^2 = tr(P^{-1} dP P^{-1} dP), in the reduced (vech) coordinates
//
//     v(P) = [P11, P22, P33, P12, P23, P13]
//
// (diagonal entries first, then superdiagonals). Provides duplication
// matrices, the 6x6 metric tensor G(P) and its inverse and determinant, the
// Christoffel symbols in closed form, and the base-point inner product.

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdflow/sym_eig.hpp"

namespace spdflow {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix9x6 = Eigen::Matrix<double, 9, 6>;
using Matrix6x9 = Eigen::Matrix<double, 6, 9>;

// (row, col) upper-triangle position of each vech coordinate for n=3.
inline constexpr std::array<std::pair<int, int>, 6> kVechCoords = {
    {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}}};

// Result of spd_check: minimum eigenvalue and whether it is strictly positive.
struct SpdCheck {
    bool is_spd = false;
    double min_eigenvalue = 0.0;
};

// Total on symmetric matrices: returns (min_eig > 0, min_eig). Inputs
// asymmetric beyond 1e-12 relative are reported as not SPD.
SpdCheck spd_check(const Matrix3& p);

// A validated symmetric positive-definite 3x3 matrix. Construction symmetrizes
// exactly, rejects inputs asymmetric beyond 1e-12 relative
// (std::invalid_argument), and rejects matrices that are not safely inside the
// cone: min eigenvalue < 1e-12 * (tr P / 3) is a std::domain_error
// (conditioning guard — geometry on such points returns garbage in float64).
class SpdMatrix {
  public:
    explicit SpdMatrix(const Matrix3& m);

    static SpdMatrix from_vech(const Vector6& v);

    const Matrix3& matrix() const { return mat_; }
    Vector6 vech() const;
    double min_eigenvalue() const { return min_eig_; }
    // det and adjugate by explicit cofactor expansion (exact 3x3 forms).
    double det() const;
    Matrix3 adjugate() const;
    Matrix3 inverse() const;  // adjugate()/det()

  private:
    Matrix3 mat_;
    double min_eig_;
};

// det / adjugate of an arbitrary 3x3 by cofactor expansion.
double det3(const Matrix3& m);
Matrix3 adjugate3(const Matrix3& m);

// Reduced vector of a symmetric matrix; input must be exactly symmetric
// (std::invalid_argument otherwise). unvech is its exact inverse.
Vector6 vech(const Matrix3& a);
Matrix3 unvech(const Vector6& v);

// vech coordinate order for general n: diagonal (i,i) first, then
// superdiagonals (i,i+k) for k = 1..n-1. Reproduces kVechCoords at n=3.
std::vector<std::pair<int, int>> vech_coordinates(int n);

// Duplication matrix D_n (vec A = D_n vech A for symmetric A) and its
// Moore-Penrose inverse, for the ordering above. vec is column-stacked.
struct DuplicationMatrix {
    int n = 0;
    Eigen::MatrixXd d;      // n^2 x n(n+1)/2, entries 0/1
    Eigen::MatrixXd dplus;  // (D^T D)^{-1} D^T
};

// 1 <= n <= 8 (std::invalid_argument outside).
DuplicationMatrix duplication_matrix(int n);

// Metric tensor at a base point: G(P) = D3^T (P^{-1} (x) P^{-1}) D3, so that
// v(A)^T G v(B) = tr(P^{-1} A P^{-1} B) for symmetric A, B.
struct MetricTensor {
    Matrix6 g;
    SpdMatrix base_point;
};

MetricTensor metric_tensor(const SpdMatrix& p);

// G^{-1}(P) = D3+ (P (x) P) D3+^T.
Matrix6 inverse_metric_tensor(const SpdMatrix& p);

// det G(P) = 2^{n(n-1)/2} det(P)^{-(n+1)} = 8 det(P)^{-4} for n=3.
double metric_determinant(const SpdMatrix& p);

// The six Christoffel matrices Gamma^1..Gamma^6 with
// Gamma^g[a][b] = Gamma^g_{ab} (symmetric in the lower indices), evaluated in
// closed form from s = vech(adj P) and rho = det P.
struct ChristoffelSet {
    std::array<Matrix6, 6> gammas;
    SpdMatrix base_point;
};

ChristoffelSet christoffel(const SpdMatrix& p);

// <A,B>_P = tr(P^{-1} A P^{-1} B). A and B must be symmetric within 1e-12
// relative (they are symmetrized before use).
double inner_product(const SpdMatrix& p, const Matrix3& a, const Matrix3& b);

} // namespace spdflow

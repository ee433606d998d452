#include "spdflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace spdflow {

namespace {

constexpr double kAsymmetryTol = 1e-12;   // relative, vs max |entry|
constexpr double kConditionFloor = 1e-12; // min eig >= floor * (tr/3)

bool symmetric_within(const Matrix3& a, double tol) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Kronecker product restricted to the 3x3 -> 9x9 case used here.
Eigen::Matrix<double, 9, 9> kron3(const Matrix3& a, const Matrix3& b) {
    Eigen::Matrix<double, 9, 9> out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
        }
    }
    return out;
}

// Fixed D3 / D3+ for the hot n=3 path (duplication_matrix covers general n).
const Matrix9x6& d3() {
    static const Matrix9x6 d = [] {
        Matrix9x6 m = Matrix9x6::Zero();
        for (int c = 0; c < 6; ++c) {
            const auto [i, j] = kVechCoords[c];
            m(j * 3 + i, c) = 1.0;  // vec is column-stacked: (row i, col j)
            m(i * 3 + j, c) = 1.0;
        }
        return m;
    }();
    return d;
}

const Matrix6x9& d3plus() {
    static const Matrix6x9 dp = [] {
        Matrix6x9 m = d3().transpose();
        for (int c = 3; c < 6; ++c) {
            m.row(c) *= 0.5;  // (D^T D)^{-1} = diag(1,1,1,1/2,1/2,1/2)
        }
        return m;
    }();
    return dp;
}

} // namespace

double det3(const Matrix3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Matrix3 adjugate3(const Matrix3& m) {
    Matrix3 adj;
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return adj;
}

SpdCheck spd_check(const Matrix3& p) {
    const double min_eig = sym_eig(p).values[0];
    if (!symmetric_within(p, kAsymmetryTol)) {
        return SpdCheck{false, min_eig};
    }
    return SpdCheck{min_eig > 0.0, min_eig};
}

SpdMatrix::SpdMatrix(const Matrix3& m) {
    if (!m.allFinite()) {
        throw std::invalid_argument("SpdMatrix: entries must be finite");
    }
    if (!symmetric_within(m, kAsymmetryTol)) {
        throw std::invalid_argument("SpdMatrix: input is not symmetric within tolerance");
    }
    // Exact symmetrization: average the mirrored entries once, mirror back.
    mat_ = m;
    for (const auto& [i, j] : kVechCoords) {
        if (i != j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            mat_(i, j) = v;
            mat_(j, i) = v;
        }
    }
    min_eig_ = sym_eig(mat_).values[0];
    if (!(min_eig_ >= kConditionFloor * (mat_.trace() / 3.0)) || min_eig_ <= 0.0) {
        throw std::domain_error("SpdMatrix: matrix is not (safely) positive definite");
    }
}

SpdMatrix SpdMatrix::from_vech(const Vector6& v) {
    return SpdMatrix(unvech(v));
}

Vector6 SpdMatrix::vech() const {
    return spdflow::vech(mat_);
}

double SpdMatrix::det() const {
    return det3(mat_);
}

Matrix3 SpdMatrix::adjugate() const {
    return adjugate3(mat_);
}

Matrix3 SpdMatrix::inverse() const {
    return adjugate3(mat_) / det3(mat_);
}

Vector6 vech(const Matrix3& a) {
    if (a(0, 1) != a(1, 0) || a(0, 2) != a(2, 0) || a(1, 2) != a(2, 1)) {
        throw std::invalid_argument("vech: input matrix is not symmetric");
    }
    Vector6 v;
    for (int c = 0; c < 6; ++c) {
        const auto [i, j] = kVechCoords[c];
        v[c] = a(i, j);
    }
    return v;
}

Matrix3 unvech(const Vector6& v) {
    Matrix3 a;
    for (int c = 0; c < 6; ++c) {
        const auto [i, j] = kVechCoords[c];
        a(i, j) = v[c];
        a(j, i) = v[c];
    }
    return a;
}

std::vector<std::pair<int, int>> vech_coordinates(int n) {
    std::vector<std::pair<int, int>> coords;
    coords.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (int i = 0; i < n; ++i) {
        coords.emplace_back(i, i);
    }
    for (int k = 1; k < n; ++k) {
        for (int i = 0; i + k < n; ++i) {
            coords.emplace_back(i, i + k);
        }
    }
    return coords;
}

DuplicationMatrix duplication_matrix(int n) {
    if (n < 1 || n > 8) {
        throw std::invalid_argument("duplication_matrix: n must be in [1, 8]");
    }
    const auto coords = vech_coordinates(n);
    const int d = static_cast<int>(coords.size());
    DuplicationMatrix dup;
    dup.n = n;
    dup.d = Eigen::MatrixXd::Zero(n * n, d);
    for (int c = 0; c < d; ++c) {
        const auto [i, j] = coords[static_cast<std::size_t>(c)];
        dup.d(j * n + i, c) = 1.0;  // column-stacked vec
        dup.d(i * n + j, c) = 1.0;
    }
    // D^T D is diagonal (1 for diagonal coordinates, 2 otherwise), so the
    // pseudoinverse is a row rescaling of D^T.
    dup.dplus = dup.d.transpose();
    for (int c = 0; c < d; ++c) {
        const auto [i, j] = coords[static_cast<std::size_t>(c)];
        if (i != j) {
            dup.dplus.row(c) *= 0.5;
        }
    }
    return dup;
}

MetricTensor metric_tensor(const SpdMatrix& p) {
    const Matrix3 pinv = p.inverse();
    Matrix6 g = d3().transpose() * kron3(pinv, pinv) * d3();
    g = 0.5 * (g + g.transpose()).eval();
    return MetricTensor{g, p};
}

Matrix6 inverse_metric_tensor(const SpdMatrix& p) {
    Matrix6 ginv = d3plus() * kron3(p.matrix(), p.matrix()) * d3plus().transpose();
    return 0.5 * (ginv + ginv.transpose()).eval();
}

double metric_determinant(const SpdMatrix& p) {
    const double det_p = p.det();
    return 8.0 / (det_p * det_p * det_p * det_p);
}

ChristoffelSet christoffel(const SpdMatrix& p) {
    const double rho = p.det();
    const Vector6 s = spdflow::vech(p.adjugate());
    const double s1 = s[0], s2 = s[1], s3 = s[2];
    const double s4 = s[3], s5 = s[4], s6 = s[5];
    const double a = -1.0 / rho;        // full-weight entries
    const double h = -0.5 / rho;        // half-weight entries

    std::array<Matrix6, 6> g;
    for (auto& m : g) {
        m = Matrix6::Zero();
    }

    // Closed forms in s = vech(adj P), rho = det P; upper triangles below,
    // mirrored at the end (each Gamma is symmetric in its lower indices).
    g[0](0, 0) = a * s1;
    g[0](0, 3) = a * s4;
    g[0](0, 5) = a * s6;
    g[0](3, 3) = a * s2;
    g[0](3, 5) = a * s5;
    g[0](5, 5) = a * s3;

    g[1](1, 1) = a * s2;
    g[1](1, 3) = a * s4;
    g[1](1, 4) = a * s5;
    g[1](3, 3) = a * s1;
    g[1](3, 4) = a * s6;
    g[1](4, 4) = a * s3;

    g[2](2, 2) = a * s3;
    g[2](2, 4) = a * s5;
    g[2](2, 5) = a * s6;
    g[2](4, 4) = a * s2;
    g[2](4, 5) = a * s4;
    g[2](5, 5) = a * s1;

    g[3](0, 1) = h * s4;
    g[3](0, 3) = h * s1;
    g[3](0, 4) = h * s6;
    g[3](1, 3) = h * s2;
    g[3](1, 5) = h * s5;
    g[3](3, 3) = a * s4;
    g[3](3, 4) = h * s5;
    g[3](3, 5) = h * s6;
    g[3](4, 5) = h * s3;

    g[4](1, 2) = h * s5;
    g[4](1, 4) = h * s2;
    g[4](1, 5) = h * s4;
    g[4](2, 3) = h * s6;
    g[4](2, 4) = h * s3;
    g[4](3, 4) = h * s4;
    g[4](3, 5) = h * s1;
    g[4](4, 4) = a * s5;
    g[4](4, 5) = h * s6;

    g[5](0, 2) = h * s6;
    g[5](0, 4) = h * s4;
    g[5](0, 5) = h * s1;
    g[5](2, 3) = h * s5;
    g[5](2, 5) = h * s3;
    g[5](3, 4) = h * s2;
    g[5](3, 5) = h * s4;
    g[5](4, 5) = h * s5;
    g[5](5, 5) = a * s6;

    for (auto& m : g) {
        for (int r = 0; r < 6; ++r) {
            for (int c = r + 1; c < 6; ++c) {
                m(c, r) = m(r, c);
            }
        }
    }
    return ChristoffelSet{g, p};
}

double inner_product(const SpdMatrix& p, const Matrix3& a, const Matrix3& b) {
    if (!symmetric_within(a, kAsymmetryTol) || !symmetric_within(b, kAsymmetryTol)) {
        throw std::invalid_argument("inner_product: tangent vectors must be symmetric");
    }
    const Matrix3 sa = 0.5 * (a + a.transpose());
    const Matrix3 sb = 0.5 * (b + b.transpose());
    const Matrix3 pinv = p.inverse();
    return (pinv * sa * pinv * sb).trace();
}

} // namespace spdflow

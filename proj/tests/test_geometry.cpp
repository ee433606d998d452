#include "spdflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "test_util.hpp"

namespace spdflow {
namespace {

using testutil::engine;
using testutil::random_invertible;
using testutil::random_spd;
using testutil::random_symmetric;

TEST(Vech, PaperOrdering) {
    EXPECT_EQ(vech(Matrix3::Identity()), (Vector6() << 1, 1, 1, 0, 0, 0).finished());

    Vector6 v;
    v << 1, 2, 3, 4, 5, 6;
    Matrix3 expected;
    expected << 1, 4, 6,
                4, 2, 5,
                6, 5, 3;
    EXPECT_EQ(unvech(v), expected);
    EXPECT_EQ(vech(expected), v);
}

TEST(Vech, RoundTripIsExact) {
    auto eng = engine(101);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix3 a = random_symmetric(eng);
        EXPECT_EQ(unvech(vech(a)), a) << "trial " << trial;
    }
}

TEST(Vech, RejectsAsymmetricInput) {
    Matrix3 a = Matrix3::Identity();
    a(0, 1) = 1e-9;  // a(1,0) stays 0
    EXPECT_THROW(vech(a), std::invalid_argument);
}

TEST(DuplicationMatrix, TrivialAndTwoByTwo) {
    const DuplicationMatrix d1 = duplication_matrix(1);
    EXPECT_EQ(d1.d, Eigen::MatrixXd::Ones(1, 1));
    EXPECT_EQ(d1.dplus, Eigen::MatrixXd::Ones(1, 1));

    // Ordering [a11, a22, a12] against column-stacked vec.
    const DuplicationMatrix d2 = duplication_matrix(2);
    Eigen::MatrixXd expected(4, 3);
    expected << 1, 0, 0,
                0, 0, 1,
                0, 0, 1,
                0, 1, 0;
    EXPECT_EQ(d2.d, expected);
}

TEST(DuplicationMatrix, GramIsDiagonal) {
    const DuplicationMatrix d3 = duplication_matrix(3);
    Eigen::VectorXd diag(6);
    diag << 1, 1, 1, 2, 2, 2;
    EXPECT_EQ(d3.d.transpose() * d3.d, Eigen::MatrixXd(diag.asDiagonal()));
    EXPECT_TRUE((d3.dplus * d3.d).isIdentity(0.0));
}

TEST(DuplicationMatrix, DefiningPropertyExactUpToN5) {
    auto eng = engine(102);
    for (int n = 1; n <= 5; ++n) {
        const DuplicationMatrix dup = duplication_matrix(n);
        const auto coords = vech_coordinates(n);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::MatrixXd a(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    a(i, j) = normal(eng);
                    a(j, i) = a(i, j);
                }
            }
            Eigen::VectorXd vech_a(coords.size());
            for (std::size_t c = 0; c < coords.size(); ++c) {
                vech_a[static_cast<Eigen::Index>(c)] = a(coords[c].first, coords[c].second);
            }
            Eigen::VectorXd vec_a(n * n);
            for (int col = 0; col < n; ++col) {
                vec_a.segment(col * n, n) = a.col(col);
            }
            EXPECT_EQ(dup.d * vech_a, vec_a) << "n=" << n << " trial " << trial;
        }
    }
}

TEST(DuplicationMatrix, RejectsOutOfRange) {
    EXPECT_THROW(duplication_matrix(0), std::invalid_argument);
    EXPECT_THROW(duplication_matrix(9), std::invalid_argument);
}

TEST(SpdMatrix, ValidatesInput) {
    EXPECT_NO_THROW(SpdMatrix(Matrix3::Identity()));
    Matrix3 asym = Matrix3::Identity();
    asym(0, 1) = 1e-6;
    EXPECT_THROW(SpdMatrix{asym}, std::invalid_argument);
    EXPECT_THROW(SpdMatrix{Eigen::Vector3d(1.0, 1.0, -0.1).asDiagonal().toDenseMatrix()},
                 std::domain_error);
    // Conditioning guard: inside the cone but too close to its boundary.
    EXPECT_THROW(SpdMatrix{Eigen::Vector3d(1.0, 1.0, 1e-14).asDiagonal().toDenseMatrix()},
                 std::domain_error);
}

TEST(SpdCheck, BoundaryExamples) {
    const SpdCheck identity = spd_check(Matrix3::Identity());
    EXPECT_TRUE(identity.is_spd);
    EXPECT_NEAR(identity.min_eigenvalue, 1.0, 1e-15);

    const SpdCheck boundary =
        spd_check(Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal().toDenseMatrix());
    EXPECT_FALSE(boundary.is_spd);
    EXPECT_NEAR(boundary.min_eigenvalue, 0.0, 1e-15);

    const SpdCheck indefinite =
        spd_check(Eigen::Vector3d(2.0, 1.0, -1.0).asDiagonal().toDenseMatrix());
    EXPECT_FALSE(indefinite.is_spd);
    EXPECT_NEAR(indefinite.min_eigenvalue, -1.0, 1e-15);
}

TEST(MetricTensor, IdentityBasePoint) {
    const Matrix6 g = metric_tensor(SpdMatrix(Matrix3::Identity())).g;
    Vector6 diag;
    diag << 1, 1, 1, 2, 2, 2;
    EXPECT_LT((g - Matrix6(diag.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MetricTensor, DiagonalBasePoint) {
    const Matrix6 g =
        metric_tensor(SpdMatrix(Eigen::Vector3d(1.0, 2.0, 4.0).asDiagonal())).g;
    Vector6 diag;
    diag << 1.0, 0.25, 0.0625, 1.0, 0.25, 0.5;  // 1/a^2,1/b^2,1/c^2, 2/ab,2/bc,2/ac
    EXPECT_LT((g - Matrix6(diag.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MetricTensor, QuadraticFormMatchesTraceFormula) {
    auto eng = engine(103);
    for (int trial = 0; trial < 100; ++trial) {
        const SpdMatrix p(random_spd(eng, 0.1, 10.0));
        const Matrix3 a = random_symmetric(eng);
        const Matrix6 g = metric_tensor(p).g;
        const double via_metric = vech(a).dot(g * vech(a));
        const double via_trace = oracle::quadratic_form(p.matrix(), a);
        EXPECT_NEAR(via_metric, via_trace, 1e-12 * std::max(1.0, std::abs(via_trace)))
            << "trial " << trial;
    }
}

TEST(MetricTensor, IsSpd) {
    auto eng = engine(104);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix6 g = metric_tensor(SpdMatrix(random_spd(eng, 0.05, 20.0))).g;
        Eigen::SelfAdjointEigenSolver<Matrix6> solver(g);
        EXPECT_GT(solver.eigenvalues().minCoeff(), 0.0) << "trial " << trial;
    }
}

TEST(InverseMetric, IdentityBasePoint) {
    const Matrix6 ginv = inverse_metric_tensor(SpdMatrix(Matrix3::Identity()));
    Vector6 diag;
    diag << 1, 1, 1, 0.5, 0.5, 0.5;
    EXPECT_LT((ginv - Matrix6(diag.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InverseMetric, ClosedFormEntryExample) {
    // At P = diag(1,2,4): entry (4,4) in 1-based coordinates equals
    // (p1 p2 + p4^2)/2 = 1.
    const Matrix6 ginv =
        inverse_metric_tensor(SpdMatrix(Eigen::Vector3d(1.0, 2.0, 4.0).asDiagonal()));
    EXPECT_DOUBLE_EQ(ginv(3, 3), 1.0);
}

TEST(InverseMetric, ProductWithMetricIsIdentity) {
    auto eng = engine(105);
    for (int trial = 0; trial < 200; ++trial) {
        const SpdMatrix p(random_spd(eng, 0.03, 30.0));
        const Matrix6 product = metric_tensor(p).g * inverse_metric_tensor(p);
        EXPECT_LT((product - Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-10)
            << "trial " << trial;
    }
}

TEST(MetricDeterminant, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(metric_determinant(SpdMatrix(Matrix3::Identity())), 8.0);
    EXPECT_DOUBLE_EQ(
        metric_determinant(SpdMatrix(Eigen::Vector3d(1.0, 2.0, 4.0).asDiagonal())),
        1.0 / 512.0);
}

TEST(MetricDeterminant, MatchesDenseDeterminant) {
    auto eng = engine(106);
    for (int trial = 0; trial < 100; ++trial) {
        const SpdMatrix p(random_spd(eng, 0.03, 30.0));
        const double closed = metric_determinant(p);
        const double dense = oracle::metric_determinant(p.matrix());
        EXPECT_NEAR(closed, dense, 1e-10 * std::abs(dense)) << "trial " << trial;
    }
}

TEST(Christoffel, IdentityBasePointEntries) {
    const ChristoffelSet cs = christoffel(SpdMatrix(Matrix3::Identity()));
    Matrix6 gamma1_expected = Matrix6::Zero();
    gamma1_expected(0, 0) = -1.0;
    gamma1_expected(3, 3) = -1.0;
    gamma1_expected(5, 5) = -1.0;
    EXPECT_LT((cs.gammas[0] - gamma1_expected).cwiseAbs().maxCoeff(), 1e-15);

    EXPECT_DOUBLE_EQ(cs.gammas[3](0, 3), -0.5);
    EXPECT_DOUBLE_EQ(cs.gammas[3](3, 0), -0.5);
}

TEST(Christoffel, LowerIndexSymmetryExact) {
    auto eng = engine(107);
    for (int trial = 0; trial < 20; ++trial) {
        const ChristoffelSet cs = christoffel(SpdMatrix(random_spd(eng, 0.1, 10.0)));
        for (const auto& gamma : cs.gammas) {
            EXPECT_EQ(gamma, Matrix6(gamma.transpose()));
        }
    }
}

TEST(Christoffel, ConstantScaling) {
    auto eng = engine(108);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix3 p = random_spd(eng, 0.2, 5.0);
        const double c = 3.7;
        const ChristoffelSet base = christoffel(SpdMatrix(p));
        const ChristoffelSet scaled = christoffel(SpdMatrix(c * p));
        for (int g = 0; g < 6; ++g) {
            EXPECT_LT((scaled.gammas[g] - base.gammas[g] / c).cwiseAbs().maxCoeff(),
                      1e-12 * base.gammas[g].cwiseAbs().maxCoeff() + 1e-15)
                << "trial " << trial << " gamma " << g;
        }
    }
}

TEST(Christoffel, TripleAgreement) {
    // (a) closed-form entry tables vs (b) the Kronecker formula with the
    // trace-dual basis vs (c) finite differences of the metric.
    auto eng = engine(109);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix3 p = random_spd(eng, 0.3, 3.0);
        const ChristoffelSet impl = christoffel(SpdMatrix(p));
        const auto kron = oracle::christoffel_kronecker(p);
        const auto fd = oracle::christoffel_finite_difference(p, 1e-5);
        for (int g = 0; g < 6; ++g) {
            EXPECT_LT((impl.gammas[g] - kron[g]).cwiseAbs().maxCoeff(), 1e-12)
                << "closed form vs Kronecker, trial " << trial << " gamma " << g;
            EXPECT_LT((impl.gammas[g] - fd[g]).cwiseAbs().maxCoeff(), 1e-6)
                << "closed form vs finite differences, trial " << trial << " gamma " << g;
        }
    }
}

TEST(InnerProduct, IdentityIsFrobenius) {
    auto eng = engine(110);
    const SpdMatrix identity{Matrix3::Identity()};
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix3 a = random_symmetric(eng);
        EXPECT_NEAR(inner_product(identity, a, a), a.squaredNorm(),
                    1e-13 * a.squaredNorm());
    }
}

TEST(InnerProduct, MatchesMetricContraction) {
    auto eng = engine(111);
    for (int trial = 0; trial < 100; ++trial) {
        const SpdMatrix p(random_spd(eng, 0.1, 10.0));
        const Matrix3 a = random_symmetric(eng);
        const Matrix3 b = random_symmetric(eng);
        const double direct = inner_product(p, a, b);
        const double contracted = vech(a).dot(metric_tensor(p).g * vech(b));
        EXPECT_NEAR(direct, contracted, 1e-12 * std::max(1.0, std::abs(direct)))
            << "trial " << trial;
    }
}

TEST(InnerProduct, CongruenceInvariance) {
    auto eng = engine(112);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix3 p = random_spd(eng, 0.1, 10.0);
        const Matrix3 a = random_symmetric(eng);
        const Matrix3 b = random_symmetric(eng);
        const Matrix3 l = random_invertible(eng);
        const double before = inner_product(SpdMatrix(p), a, b);
        Matrix3 lp = l * p * l.transpose();
        lp = 0.5 * (lp + lp.transpose()).eval();
        Matrix3 la = l * a * l.transpose();
        la = 0.5 * (la + la.transpose()).eval();
        Matrix3 lb = l * b * l.transpose();
        lb = 0.5 * (lb + lb.transpose()).eval();
        const double after = inner_product(SpdMatrix(lp), la, lb);
        EXPECT_NEAR(after, before, 1e-10 * std::max(1.0, std::abs(before)))
            << "trial " << trial;
    }
}

TEST(InnerProduct, InversionInvariance) {
    auto eng = engine(113);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix3 p = random_spd(eng, 0.1, 10.0);
        const Matrix3 a = random_symmetric(eng);
        const Matrix3 b = random_symmetric(eng);
        const SpdMatrix sp(p);
        const Matrix3 pinv = sp.inverse();
        const double before = inner_product(sp, a, b);

        Matrix3 ia = pinv * a * pinv;
        ia = 0.5 * (ia + ia.transpose()).eval();
        Matrix3 ib = pinv * b * pinv;
        ib = 0.5 * (ib + ib.transpose()).eval();
        Matrix3 ip = 0.5 * (pinv + pinv.transpose()).eval();
        const double after = inner_product(SpdMatrix(ip), ia, ib);
        EXPECT_NEAR(after, before, 1e-10 * std::max(1.0, std::abs(before)))
            << "trial " << trial;
    }
}

} // namespace
} // namespace spdflow

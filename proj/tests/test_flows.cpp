#include "spdflow/flows.hpp"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "spdflow/metrics.hpp"
#include "test_util.hpp"

namespace spdflow {
namespace {

using testutil::constant_field;
using testutil::engine;
using testutil::random_invertible;
using testutil::random_smooth_field;
using testutil::random_spd;

TensorField spike_field() {
    // Identity background with one strong anisotropic voxel; large Euler steps
    // on this field push the center out of the SPD cone.
    TensorField field({5, 5, 1});
    const auto& d = field.dims();
    for (int y = 0; y < d[1]; ++y) {
        for (int x = 0; x < d[0]; ++x) {
            field.set_matrix(Voxel{x, y, 0}, Matrix3::Identity());
        }
    }
    field.set_matrix(Voxel{2, 2, 0}, Eigen::Vector3d(100.0, 1.0, 1.0).asDiagonal());
    return field;
}

TEST(EdgeStopping, ClosedFormValues) {
    EXPECT_EQ(edge_stopping_c(0.0, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(edge_stopping_c(2.0, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(edge_stopping_c(1.0, 1.0), 0.5);
    EXPECT_GT(edge_stopping_c(0.5, 1.0), edge_stopping_c(1.5, 1.0));
    EXPECT_THROW(edge_stopping_c(-1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(edge_stopping_c(1.0, 0.0), std::invalid_argument);
}

TEST(GaussianSmooth, SigmaZeroIsBitwiseIdentity) {
    auto eng = engine(301);
    ScalarGrid grid({6, 5, 4});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : grid.raw()) {
        v = normal(eng);
    }
    const ScalarGrid smoothed = gaussian_smooth(grid, 0.0);
    EXPECT_EQ(smoothed.raw(), grid.raw());
}

TEST(GaussianSmooth, UnitImpulseResponse) {
    // sigma = 1 truncates at radius 3; the normalized center weight is
    // w0 = 1 / (1 + 2(e^{-1/2} + e^{-2} + e^{-9/2})) and the separable smoother
    // maps a centered 2-d impulse to w0^2 at the impulse.
    ScalarGrid grid({9, 9, 1});
    grid.at(4, 4, 0) = 1.0;
    const ScalarGrid smoothed = gaussian_smooth(grid, 1.0);

    const double w0 =
        1.0 / (1.0 + 2.0 * (std::exp(-0.5) + std::exp(-2.0) + std::exp(-4.5)));
    EXPECT_NEAR(smoothed.at(4, 4, 0), w0 * w0, 1e-15);
    // One axis over from the peak: w0 * w1.
    EXPECT_NEAR(smoothed.at(5, 4, 0), w0 * w0 * std::exp(-0.5), 1e-15);
    // Beyond the truncation radius the response is exactly zero.
    EXPECT_EQ(smoothed.at(8, 4, 0), 0.0);

    // The impulse sits >= 3 voxels from every face, so its mass is preserved.
    double mass = 0.0;
    for (double v : smoothed.raw()) {
        mass += v;
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(GaussianSmooth, MatchesDenseConvolution) {
    auto eng = engine(302);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& dims : {std::array<int, 3>{7, 6, 1}, std::array<int, 3>{5, 4, 4}}) {
        ScalarGrid grid(dims);
        for (double& v : grid.raw()) {
            v = normal(eng);
        }
        const ScalarGrid fast = gaussian_smooth(grid, 1.3);
        const ScalarGrid dense = oracle::gaussian_smooth(grid, 1.3);
        for (std::size_t i = 0; i < fast.raw().size(); ++i) {
            EXPECT_NEAR(fast.raw()[i], dense.raw()[i], 1e-12);
        }
    }
}

TEST(GaussianSmooth, RejectsNegativeSigma) {
    ScalarGrid grid({5, 5, 1});
    EXPECT_THROW(gaussian_smooth(grid, -0.5), std::invalid_argument);
}

TEST(ResolveEdgeConstant, ConstantFieldFallsBackToOne) {
    auto eng = engine(303);
    const TensorField field = constant_field({5, 5, 1}, random_spd(eng, 0.5, 2.0));
    // Zero magnitude everywhere -> median 0 -> documented fallback.
    EXPECT_EQ(resolve_edge_constant(field, 1.0), 1.0);
}

TEST(ResolveEdgeConstant, MatchesMedianOfSmoothedMagnitude) {
    auto eng = engine(304);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    const ScalarGrid smoothed = gaussian_smooth(magnitude_field(field), 1.0);
    std::vector<double> values = smoothed.raw();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double median = (n % 2 == 1)
                              ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    EXPECT_DOUBLE_EQ(resolve_edge_constant(field, 1.0), median);
}

TEST(SpdSafeguard, ClampFloorsEigenvalues) {
    const SpdMatrix p_old{Matrix3::Identity()};
    const Matrix3 bad = Eigen::Vector3d(1.0, 1.0, -0.1).asDiagonal();
    bool activated = false;
    const Matrix3 fixed =
        spd_safeguard(bad, p_old, SafeguardPolicy::clamp, 1e-8, &activated);
    EXPECT_TRUE(activated);
    Eigen::SelfAdjointEigenSolver<Matrix3> solver(fixed);
    EXPECT_NEAR(solver.eigenvalues()[0], 1e-8, 1e-20);  // floor = 1e-8 * tr(I)/3
    EXPECT_NEAR(solver.eigenvalues()[1], 1.0, 1e-12);
    EXPECT_NEAR(solver.eigenvalues()[2], 1.0, 1e-12);
}

TEST(SpdSafeguard, HealthyUpdatePassesThroughBitwise) {
    auto eng = engine(305);
    const SpdMatrix p_old{Matrix3::Identity()};
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix3 candidate = random_spd(eng, 0.1, 10.0);
        bool activated = true;
        const Matrix3 out =
            spd_safeguard(candidate, p_old, SafeguardPolicy::clamp, 1e-8, &activated);
        EXPECT_FALSE(activated);
        EXPECT_EQ(out, candidate);
    }
}

TEST(SpdSafeguard, RejectStepRestoresPreviousValue) {
    const Matrix3 old_mat = Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal();
    const SpdMatrix p_old{old_mat};
    const Matrix3 bad = Eigen::Vector3d(1.0, 1.0, -0.1).asDiagonal();
    bool activated = false;
    const Matrix3 out =
        spd_safeguard(bad, p_old, SafeguardPolicy::reject_step, 1e-8, &activated);
    EXPECT_TRUE(activated);
    EXPECT_EQ(out, old_mat);

    // A candidate inside the cone is kept even when poorly conditioned.
    const Matrix3 thin = Eigen::Vector3d(1.0, 1.0, 1e-13).asDiagonal();
    activated = true;
    const Matrix3 kept =
        spd_safeguard(thin, p_old, SafeguardPolicy::reject_step, 1e-8, &activated);
    EXPECT_FALSE(activated);
    EXPECT_EQ(kept, thin);
}

TEST(SpdSafeguard, StrictThrowsNumericalError) {
    const SpdMatrix p_old{Matrix3::Identity()};
    const Matrix3 bad = Eigen::Vector3d(1.0, 1.0, -0.1).asDiagonal();
    EXPECT_THROW(spd_safeguard(bad, p_old, SafeguardPolicy::strict, 1e-8),
                 NumericalError);
}

TEST(FlowSteps, ConstantFieldsAreExactFixedPoints) {
    auto eng = engine(306);
    for (const auto& dims : {std::array<int, 3>{5, 5, 1}, std::array<int, 3>{4, 4, 4}}) {
        const TensorField field = constant_field(dims, random_spd(eng, 0.5, 2.0));
        EXPECT_EQ(tv_step(field, 0.01).raw(), field.raw());
        EXPECT_EQ(rmc_step(field, 0.01).raw(), field.raw());
        EXPECT_EQ(modified_rmc_step(field, 0.01, 1.0, 1.0).raw(), field.raw());
        EXPECT_EQ(self_snakes_step(field, 0.01, 1.0, 1.0).raw(), field.raw());
    }
}

TEST(FlowSteps, MatchOracleRawUpdates) {
    auto eng = engine(307);
    const double dt = 0.005;
    const double k = 0.4;
    const double sigma = 1.0;
    for (const auto& dims : {std::array<int, 3>{6, 5, 1}, std::array<int, 3>{5, 5, 5}}) {
        const TensorField field = random_smooth_field(eng, dims);
        StepStats stats;

        struct Case {
            const char* name;
            TensorField stepped;
            oracle::FieldVectors expected;
        };
        const Case cases[] = {
            {"tv", tv_step(field, dt, {}, &stats), oracle::tv_step(field, dt)},
            {"rmc", rmc_step(field, dt), oracle::rmc_step(field, dt)},
            {"modified_rmc", modified_rmc_step(field, dt, k, sigma),
             oracle::modified_rmc_step(field, dt, k, sigma)},
            {"self_snakes", self_snakes_step(field, dt, k, sigma),
             oracle::self_snakes_step(field, dt, k, sigma)},
        };
        EXPECT_EQ(stats.safeguard_activations, 0);
        for (const Case& c : cases) {
            const auto& d = field.dims();
            for (int z = 0; z < d[2]; ++z) {
                for (int y = 0; y < d[1]; ++y) {
                    for (int x = 0; x < d[0]; ++x) {
                        const Voxel v{x, y, z};
                        const Vector6 got = c.stepped.vech_at(v);
                        const Vector6 want = c.expected[field.linear_index(v)];
                        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-10)
                            << c.name << " voxel " << x << "," << y << "," << z;
                    }
                }
            }
        }
    }
}

TEST(FlowSteps, TvIsCongruenceEquivariant) {
    auto eng = engine(308);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    const Matrix3 l = random_invertible(eng);
    const auto congruence = [&](const TensorField& in) {
        TensorField out(in.dims(), in.spacing());
        const auto& d = in.dims();
        for (int z = 0; z < d[2]; ++z) {
            for (int y = 0; y < d[1]; ++y) {
                for (int x = 0; x < d[0]; ++x) {
                    const Voxel v{x, y, z};
                    out.set_matrix(v, l * in.matrix_at(v) * l.transpose());
                }
            }
        }
        return out;
    };

    const TensorField step_then_map = congruence(tv_step(field, 0.01));
    const TensorField map_then_step = tv_step(congruence(field), 0.01);
    double scale = 0.0;
    for (double v : step_then_map.raw()) {
        scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < step_then_map.raw().size(); ++i) {
        EXPECT_NEAR(step_then_map.raw()[i], map_then_step.raw()[i], 1e-8 * scale);
    }
}

TEST(FlowSteps, ModifiedRmcWithHugeKMatchesRmc) {
    auto eng = engine(309);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    const TensorField rmc = rmc_step(field, 0.01);
    const TensorField mrmc = modified_rmc_step(field, 0.01, 1e12, 1.0);
    const TensorField snakes = self_snakes_step(field, 0.01, 1e12, 1.0);
    for (std::size_t i = 0; i < rmc.raw().size(); ++i) {
        EXPECT_NEAR(mrmc.raw()[i], rmc.raw()[i], 1e-10);
        EXPECT_NEAR(snakes.raw()[i], rmc.raw()[i], 1e-10);
    }
}

TEST(FlowSteps, StrictPolicyThrowsOnConeExit) {
    const TensorField field = spike_field();
    const SafeguardSpec strict{SafeguardPolicy::strict, 1e-8};
    EXPECT_THROW(tv_step(field, 1.0, strict), NumericalError);
}

TEST(FlowSteps, ClampPolicyKeepsFieldSpd) {
    const TensorField field = spike_field();
    StepStats stats;
    const TensorField stepped =
        tv_step(field, 1.0, {SafeguardPolicy::clamp, 1e-8}, &stats);
    EXPECT_GT(stats.safeguard_activations, 0);
    const auto& d = stepped.dims();
    for (int y = 0; y < d[1]; ++y) {
        for (int x = 0; x < d[0]; ++x) {
            EXPECT_TRUE(spd_check(stepped.matrix_at(Voxel{x, y, 0})).is_spd);
        }
    }
}

TEST(FlowSteps, RejectPolicyRevertsViolatingVoxels) {
    const TensorField field = spike_field();
    StepStats stats;
    const TensorField stepped =
        tv_step(field, 1.0, {SafeguardPolicy::reject_step, 1e-8}, &stats);
    EXPECT_GT(stats.safeguard_activations, 0);
    // The spike voxel's raw update leaves the cone, so it must be reverted.
    EXPECT_EQ(stepped.vech_at(Voxel{2, 2, 0}), field.vech_at(Voxel{2, 2, 0}));
}

TEST(RunFlow, ValidatesConfiguration) {
    auto eng = engine(310);
    const TensorField field = constant_field({5, 5, 1}, random_spd(eng, 0.5, 2.0));
    FlowConfig config;
    config.dt = 0.0;
    EXPECT_THROW(run_flow(field, config), std::invalid_argument);
    config = {};
    config.steps = -1;
    EXPECT_THROW(run_flow(field, config), std::invalid_argument);
    config = {};
    config.sigma = -1.0;
    EXPECT_THROW(run_flow(field, config), std::invalid_argument);
    config = {};
    config.eig_floor = 0.0;
    EXPECT_THROW(run_flow(field, config), std::invalid_argument);
    config = {};
    config.k = -2.0;
    config.kind = FlowKind::modified_rmc;
    EXPECT_THROW(run_flow(field, config), std::invalid_argument);
}

TEST(RunFlow, ZeroStepsReturnsInputBitwise) {
    auto eng = engine(311);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    FlowConfig config;
    config.kind = FlowKind::rmc;
    config.steps = 0;
    const FlowResult result = run_flow(field, config);
    EXPECT_EQ(result.field.raw(), field.raw());
    EXPECT_TRUE(result.diagnostics.steps.empty());
}

TEST(RunFlow, RecordsPerStepDiagnostics) {
    auto eng = engine(312);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    FlowConfig config;
    config.kind = FlowKind::tv;
    config.steps = 5;
    const FlowResult result = run_flow(field, config);
    ASSERT_EQ(result.diagnostics.steps.size(), 5u);
    EXPECT_DOUBLE_EQ(result.diagnostics.initial_volume_energy, volume_energy(field));
    EXPECT_TRUE(std::isnan(result.diagnostics.resolved_k));
    for (const StepRecord& record : result.diagnostics.steps) {
        EXPECT_TRUE(std::isfinite(record.volume_energy));
        EXPECT_GT(record.max_abs_curvature, 0.0);
        EXPECT_GT(record.min_eigenvalue, 0.0);
        EXPECT_GE(record.wall_seconds, 0.0);
    }
    EXPECT_EQ(result.diagnostics.total_safeguard_activations(), 0);
}

TEST(RunFlow, ResolvesKFromSmoothedMagnitudeMedian) {
    auto eng = engine(313);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    FlowConfig config;
    config.kind = FlowKind::modified_rmc;
    config.steps = 1;
    config.sigma = 1.0;
    const FlowResult result = run_flow(field, config);
    EXPECT_DOUBLE_EQ(result.diagnostics.resolved_k, resolve_edge_constant(field, 1.0));

    config.k = 0.7;
    const FlowResult pinned = run_flow(field, config);
    EXPECT_EQ(pinned.diagnostics.resolved_k, 0.7);
}

TEST(RunFlow, StrictFailuresNameTheStep) {
    const TensorField field = spike_field();
    FlowConfig config;
    config.kind = FlowKind::tv;
    config.dt = 1.0;
    config.steps = 3;
    config.safeguard = SafeguardPolicy::strict;
    try {
        run_flow(field, config);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos)
            << "message: " << e.what();
    }
}

TEST(RunFlow, RerunsAreBitwiseIdentical) {
    auto eng = engine(314);
    const TensorField field = random_smooth_field(eng, {6, 5, 1});
    for (const FlowKind kind : {FlowKind::tv, FlowKind::rmc, FlowKind::modified_rmc,
                                FlowKind::self_snakes}) {
        FlowConfig config;
        config.kind = kind;
        config.steps = 10;
        const FlowResult a = run_flow(field, config);
        const FlowResult b = run_flow(field, config);
        EXPECT_EQ(a.field.raw(), b.field.raw()) << to_string(kind);
    }
}

TEST(FlowNames, RoundTrip) {
    for (const FlowKind kind : {FlowKind::tv, FlowKind::rmc, FlowKind::modified_rmc,
                                FlowKind::self_snakes}) {
        EXPECT_EQ(flow_kind_from_string(to_string(kind)), kind);
    }
    for (const SafeguardPolicy policy :
         {SafeguardPolicy::clamp, SafeguardPolicy::reject_step, SafeguardPolicy::strict}) {
        EXPECT_EQ(safeguard_from_string(to_string(policy)), policy);
    }
    EXPECT_THROW(flow_kind_from_string("bogus"), std::invalid_argument);
    EXPECT_THROW(safeguard_from_string("bogus"), std::invalid_argument);
}

} // namespace
} // namespace spdflow

#include "spdflow/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdflow {

namespace {

// Closed-form inverse and determinant of a small (2x2 / 3x3) symmetric matrix.
void invert_small(const MatrixM& a, MatrixM& inverse, double& det) {
    const int m = static_cast<int>(a.rows());
    inverse.resize(m, m);
    if (m == 2) {
        det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        inverse(0, 0) = a(1, 1);
        inverse(1, 1) = a(0, 0);
        inverse(0, 1) = -a(0, 1);
        inverse(1, 0) = -a(1, 0);
        inverse /= det;
    } else {
        const Matrix3 full = a;
        det = det3(full);
        inverse = (adjugate3(full) / det).eval();
    }
}

struct Offset {
    int dx = 0;
    int dy = 0;
    int dz = 0;
};

Offset axis_offset(int axis, int sign) {
    Offset o;
    (axis == 0 ? o.dx : axis == 1 ? o.dy : o.dz) = sign;
    return o;
}

Voxel clamped_voxel(const TensorField& field, int x, int y, int z) {
    const auto& d = field.dims();
    return Voxel{std::clamp(x, 0, d[0] - 1), std::clamp(y, 0, d[1] - 1),
                 std::clamp(z, 0, d[2] - 1)};
}

} // namespace

GradientMatrix channel_gradient(const TensorField& field, const Voxel& v) {
    const int m = field.spatial_dim();
    const auto& h = field.spacing();
    GradientMatrix grad(6, m);
    for (int a = 0; a < m; ++a) {
        const Offset o = axis_offset(a, 1);
        const Vector6 plus = field.vech_clamped(v.x + o.dx, v.y + o.dy, v.z + o.dz);
        const Vector6 minus = field.vech_clamped(v.x - o.dx, v.y - o.dy, v.z - o.dz);
        grad.col(a) = (plus - minus) / (2.0 * h[static_cast<std::size_t>(a)]);
    }
    return grad;
}

InducedMetric induced_metric(const TensorField& field, const Voxel& v) {
    const int m = field.spatial_dim();
    const SpdMatrix p(field.matrix_at(v));
    const GradientMatrix grad = channel_gradient(field, v);
    const Matrix6 g = metric_tensor(p).g;

    InducedMetric im;
    im.gamma = MatrixM::Identity(m, m) + grad.transpose() * g * grad;
    im.gamma = (0.5 * (im.gamma + im.gamma.transpose())).eval();
    invert_small(im.gamma, im.inverse, im.det);
    return im;
}

Vector6 laplace_beltrami_with_metric(const TensorField& field, const Voxel& v,
                                     const MetricFn& metric_at) {
    const int m = field.spatial_dim();
    const auto& h = field.spacing();

    const auto metric_clamped = [&](int x, int y, int z) {
        const Voxel cv = clamped_voxel(field, x, y, z);
        return metric_at(cv.x, cv.y, cv.z);
    };

    // Coefficients w^{ab} = sqrt(det gamma) * gamma^{ab} at the voxel and its
    // 2m axis neighbors (replicated at faces).
    const InducedMetric center = metric_clamped(v.x, v.y, v.z);
    const double sqrt_det_center = std::sqrt(center.det);
    MatrixM w_center = std::sqrt(center.det) * center.inverse;
    MatrixM w_plus[3];
    MatrixM w_minus[3];
    for (int a = 0; a < m; ++a) {
        const Offset o = axis_offset(a, 1);
        const InducedMetric mp = metric_clamped(v.x + o.dx, v.y + o.dy, v.z + o.dz);
        const InducedMetric mm = metric_clamped(v.x - o.dx, v.y - o.dy, v.z - o.dz);
        w_plus[a] = std::sqrt(mp.det) * mp.inverse;
        w_minus[a] = std::sqrt(mm.det) * mm.inverse;
    }

    const Vector6 u0 = field.vech_at(v);
    Vector6 acc = Vector6::Zero();

    // Diagonal terms: conservative fluxes with face-averaged coefficients.
    // Replicate padding makes the boundary-face flux vanish identically.
    for (int a = 0; a < m; ++a) {
        const Offset o = axis_offset(a, 1);
        const double ha = h[static_cast<std::size_t>(a)];
        const Vector6 up = field.vech_clamped(v.x + o.dx, v.y + o.dy, v.z + o.dz);
        const Vector6 um = field.vech_clamped(v.x - o.dx, v.y - o.dy, v.z - o.dz);
        const double wbar_p = 0.5 * (w_center(a, a) + w_plus[a](a, a));
        const double wbar_m = 0.5 * (w_center(a, a) + w_minus[a](a, a));
        acc += (wbar_p * (up - u0) - wbar_m * (u0 - um)) / (ha * ha);
    }

    // Mixed terms: centered 4-point cross-differences,
    //   d_a ( w^{ab} d_b u ) ~ [w^{ab}(x+e_a) d_b u(x+e_a) - w^{ab}(x-e_a) d_b u(x-e_a)] / (2 h_a).
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            if (a == b) {
                continue;
            }
            const Offset oa = axis_offset(a, 1);
            const Offset ob = axis_offset(b, 1);
            const double ha = h[static_cast<std::size_t>(a)];
            const double hb = h[static_cast<std::size_t>(b)];
            const Vector6 upp = field.vech_clamped(v.x + oa.dx + ob.dx, v.y + oa.dy + ob.dy,
                                                   v.z + oa.dz + ob.dz);
            const Vector6 upm = field.vech_clamped(v.x + oa.dx - ob.dx, v.y + oa.dy - ob.dy,
                                                   v.z + oa.dz - ob.dz);
            const Vector6 ump = field.vech_clamped(v.x - oa.dx + ob.dx, v.y - oa.dy + ob.dy,
                                                   v.z - oa.dz + ob.dz);
            const Vector6 umm = field.vech_clamped(v.x - oa.dx - ob.dx, v.y - oa.dy - ob.dy,
                                                   v.z - oa.dz - ob.dz);
            acc += (w_plus[a](a, b) * (upp - upm) - w_minus[a](a, b) * (ump - umm)) /
                   (4.0 * ha * hb);
        }
    }

    return acc / sqrt_det_center;
}

Vector6 laplace_beltrami_all(const TensorField& field, const Voxel& v) {
    return laplace_beltrami_with_metric(
        field, v, [&field](int x, int y, int z) {
            return induced_metric(field, Voxel{x, y, z});
        });
}

double laplace_beltrami(const TensorField& field, int channel, const Voxel& v) {
    if (channel < 0 || channel > 5) {
        throw std::invalid_argument("laplace_beltrami: channel must be in [0, 5]");
    }
    return laplace_beltrami_all(field, v)[channel];
}

CurvatureVector mean_curvature(const TensorField& field, const Voxel& v) {
    const int m = field.spatial_dim();
    const SpdMatrix p(field.matrix_at(v));
    const GradientMatrix grad = channel_gradient(field, v);
    const InducedMetric im = induced_metric(field, v);
    const Vector6 lb = laplace_beltrami_all(field, v);
    const ChristoffelSet gammas = christoffel(p);

    CurvatureVector out;
    for (int i = 0; i < 6; ++i) {
        const MatrixM quad = grad.transpose() * gammas.gammas[static_cast<std::size_t>(i)] * grad;
        out.h[i] = lb[i] + (im.inverse.array() * quad.array()).sum();
    }
    out.h /= static_cast<double>(m);
    return out;
}

double beltrami_quadratic_form(const TensorField& field, const Voxel& v) {
    const SpdMatrix p(field.matrix_at(v));
    const GradientMatrix grad = channel_gradient(field, v);
    const InducedMetric im = induced_metric(field, v);
    const Matrix6 g = metric_tensor(p).g;

    const MatrixM quad = grad.transpose() * g * grad;
    const double q = (im.inverse.array() * quad.array()).sum();
    if (q < -1e-12) {
        throw std::runtime_error("beltrami_quadratic_form: negative quadratic form "
                                 "(broken induced-metric inverse)");
    }
    return std::max(q, 0.0);
}

double beltrami_magnitude(const TensorField& field, const Voxel& v) {
    return std::sqrt(beltrami_quadratic_form(field, v));
}

} // namespace spdflow

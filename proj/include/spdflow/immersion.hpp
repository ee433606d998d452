#pragma once

// Discrete differential operators of the image-as-immersion: the image domain
// (m = 2 or 3) is immersed in the space-feature manifold R^m x P(3) through
// the graph map x -> (x, P(x)). The domain inherits the induced metric
//
//     gamma = I_m + (grad p)^T G(P) (grad p),
//
// whose Laplace-Beltrami operator and mean curvature vector drive the flows.
// All stencils are central differences with replicate (Neumann) padding.

#include <functional>

#include <Eigen/Dense>

#include "spdflow/field.hpp"
#include "spdflow/geometry.hpp"

namespace spdflow {

// m x m matrices / m-vectors without heap allocation (m <= 3).
using MatrixM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using VectorM = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
// Channel gradient: column a holds the 6 channel derivatives along axis a.
using GradientMatrix = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, 3>;

struct InducedMetric {
    MatrixM gamma;
    MatrixM inverse;
    double det = 1.0;
};

struct CurvatureVector {
    Vector6 h = Vector6::Zero();
};

// d p / d x^a by central differences (replicate padding at faces, so a
// boundary face sees a zero normal derivative), scaled by spacing.
GradientMatrix channel_gradient(const TensorField& field, const Voxel& v);

// gamma = I_m + (grad p)^T G(P(v)) (grad p), with inverse and determinant by
// the closed-form 2x2 / 3x3 expressions.
InducedMetric induced_metric(const TensorField& field, const Voxel& v);

// Laplace-Beltrami of one channel (0-based, 0..5):
//   (1/sqrt(det gamma)) d_a ( sqrt(det gamma) gamma^{ab} d_b p^c ).
// Conservative flux form: diagonal terms use face-averaged coefficients
// w = sqrt(det gamma) * gamma^{ab} (arithmetic mean of the two adjacent voxel
// values); mixed terms use 4-point centered cross-differences.
double laplace_beltrami(const TensorField& field, int channel, const Voxel& v);

// All six channels in one pass (shares the neighbor metric evaluations).
Vector6 laplace_beltrami_all(const TensorField& field, const Voxel& v);

// Same operator with the induced metric supplied by the caller, evaluated at
// clamped grid coordinates. Lets tests drive the flat limit (gamma == I_m,
// where the stencil must reduce to the 5/7-point Laplacian) and lets the flows
// reuse precomputed metrics.
using MetricFn = std::function<InducedMetric(int x, int y, int z)>;
Vector6 laplace_beltrami_with_metric(const TensorField& field, const Voxel& v,
                                     const MetricFn& metric_at);

// Mean curvature vector of the immersion (tensor channels only; the spatial
// components of the graph map are the identity and carry no curvature):
//   H^i = (1/m) [ Delta_M p^i + gamma^{ab} Gamma^i_{jk} d_a p^j d_b p^k ].
CurvatureVector mean_curvature(const TensorField& field, const Voxel& v);

// The quadratic form gamma^{ab} g_{ij} d_a p^i d_b p^j and its square root.
// The form is clamped to 0 when negative within -1e-12; more negative values
// indicate a broken gamma inverse and raise std::runtime_error.
double beltrami_quadratic_form(const TensorField& field, const Voxel& v);
double beltrami_magnitude(const TensorField& field, const Voxel& v);

} // namespace spdflow

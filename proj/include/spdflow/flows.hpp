#pragma once

// The four curvature-driven flows as explicit forward-Euler evolutions of a
// TensorField:
//
//   tv            d_t p = H                     (volume / TV gradient descent)
//   rmc           d_t p = |grad p|_g H          (Riemannian mean curvature)
//   modified_rmc  d_t p = c(K*|grad p|_g) |grad p|_g H
//   self_snakes   d_t p = c |grad p|_g H + gamma^{ab} d_a c d_b p
//
// with |grad p|_g the Beltrami gradient magnitude, c(s) = k^2/(k^2+s^2)
// evaluated on the Gaussian-smoothed magnitude field, Neumann boundaries, and
// an SPD safeguard applied to every voxel update.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spdflow/errors.hpp"
#include "spdflow/field.hpp"
#include "spdflow/geometry.hpp"

namespace spdflow {

enum class FlowKind { tv, rmc, modified_rmc, self_snakes };

enum class SafeguardPolicy { clamp, reject_step, strict };

// How the self-snakes shock term pairs grad c with grad p: through the induced
// metric (gamma^{ab} d_a c d_b p, the default) or the bare Euclidean dot
// product, kept toggleable for comparison.
enum class ShockPairing { metric, euclidean };

struct FlowConfig {
    FlowKind kind = FlowKind::tv;
    double dt = 0.01;
    int steps = 50;
    // Edge-stopping constant; when unset, resolved as the median of the
    // initial smoothed magnitude field (1.0 if that median is 0).
    std::optional<double> k;
    double sigma = 1.0;   // Gaussian kernel std-dev, in voxels
    SafeguardPolicy safeguard = SafeguardPolicy::clamp;
    double eig_floor = 1e-8;  // relative eigenvalue floor for the clamp policy
    std::uint64_t seed = 0;   // recorded for reproducibility (flows draw no randomness)
};

struct StepRecord {
    double volume_energy = 0.0;
    double max_abs_curvature = 0.0;  // max over voxels of |H| (Euclidean 6-norm)
    int safeguard_activations = 0;
    double min_eigenvalue = 0.0;     // over all voxels after the step
    double wall_seconds = 0.0;
};

struct FlowDiagnostics {
    double initial_volume_energy = 0.0;
    // NaN when the flow has no edge-stopping constant (tv, rmc).
    double resolved_k = 0.0;
    std::vector<StepRecord> steps;

    int total_safeguard_activations() const;
};

struct StepStats {
    int safeguard_activations = 0;
    double max_abs_curvature = 0.0;
    double min_eigenvalue = 0.0;
};

// c(s) = k^2 / (k^2 + s^2); requires s >= 0, k > 0.
double edge_stopping_c(double s, double k);

// Separable discrete Gaussian, truncated at 3*sigma per side and renormalized
// to sum 1, replicate boundary; sigma = 0 is the identity. Axes of extent 1
// are skipped. Requires sigma >= 0.
ScalarGrid gaussian_smooth(const ScalarGrid& grid, double sigma);

// Beltrami gradient magnitude at every voxel.
ScalarGrid magnitude_field(const TensorField& field);

// Median of the smoothed magnitude field: the data-adaptive default for k.
// Returns 1.0 when the median is 0 (e.g. constant fields). Even voxel counts
// average the two middle order statistics.
double resolve_edge_constant(const TensorField& field, double sigma);

struct SafeguardSpec {
    SafeguardPolicy policy = SafeguardPolicy::clamp;
    double eig_floor = 1e-8;
};

// Re-enter the cone after a raw Euler update.
//   clamp:       eigenvalues floored at eig_floor * (tr P_old / 3); a healthy
//                P_new (min eig >= floor) is returned unchanged bitwise.
//   reject_step: P_old is returned when P_new fails spd_check.
//   strict:      NumericalError when P_new fails spd_check.
// *activated (optional) reports whether the policy had to intervene.
Matrix3 spd_safeguard(const Matrix3& p_new, const SpdMatrix& p_old,
                      SafeguardPolicy policy, double eig_floor,
                      bool* activated = nullptr);

// One forward-Euler step of each flow. The input field is read-only; a new
// field is returned (double buffering). stats, when given, receives the
// safeguard count, max |H| and min eigenvalue of the step.
TensorField tv_step(const TensorField& field, double dt,
                    const SafeguardSpec& guard = {}, StepStats* stats = nullptr);
TensorField rmc_step(const TensorField& field, double dt,
                     const SafeguardSpec& guard = {}, StepStats* stats = nullptr);
TensorField modified_rmc_step(const TensorField& field, double dt, double k,
                              double sigma, const SafeguardSpec& guard = {},
                              StepStats* stats = nullptr);
TensorField self_snakes_step(const TensorField& field, double dt, double k,
                             double sigma, const SafeguardSpec& guard = {},
                             StepStats* stats = nullptr,
                             ShockPairing pairing = ShockPairing::metric);

struct FlowResult {
    TensorField field;
    FlowDiagnostics diagnostics;
};

// Iterate the configured step `config.steps` times. Deterministic for fixed
// input and config; strict-mode SPD violations raise NumericalError annotated
// with the 1-based step index.
FlowResult run_flow(const TensorField& field, const FlowConfig& config);

// Name <-> enum helpers shared by the CLI and the manifest.
std::string to_string(FlowKind kind);
std::string to_string(SafeguardPolicy policy);
FlowKind flow_kind_from_string(const std::string& name);
SafeguardPolicy safeguard_from_string(const std::string& name);

} // namespace spdflow

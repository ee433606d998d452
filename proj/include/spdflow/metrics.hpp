#pragma once

// Quantitative diagnostics: the affine-invariant geodesic distance on P(3),
// field-level error statistics against a reference, the discrete volume
// energy, and SPD-violation accounting.

#include <string>

#include "spdflow/field.hpp"
#include "spdflow/geometry.hpp"

namespace spdflow {

struct ErrorReport {
    double riemannian_mse = 0.0;   // mean squared geodesic distance
    double frobenius_mse = 0.0;    // mean squared entrywise (Frobenius) distance
    double max_pointwise = 0.0;    // worst voxel geodesic distance
    int spd_violation_count = 0;   // voxels of `field` failing spd_check

    // Flat key=value lines, one per component.
    std::string to_key_values() const;
};

// d(P,Q) = ||logm(P^{-1/2} Q P^{-1/2})||_F. Symmetric, zero iff P == Q,
// invariant under congruence and inversion.
double geodesic_distance(const SpdMatrix& p, const SpdMatrix& q);

// Voxelwise aggregation of geodesic and Frobenius distances (sequential voxel
// order, deterministic). Shapes must match (std::invalid_argument). Voxels of
// `field` failing spd_check are counted and excluded from the geodesic
// aggregates (the Frobenius component still includes them).
ErrorReport field_error(const TensorField& field, const TensorField& reference);

// Sum over voxels of sqrt(det gamma) * voxel volume — the discrete volume of
// the immersed image manifold, whose gradient descent is the TV flow. At
// least the domain volume; equal to it exactly for constant fields.
double volume_energy(const TensorField& field);

struct SpdViolationReport {
    int count = 0;
    double worst_min_eigenvalue = 0.0;  // minimum over all voxels
};

SpdViolationReport spd_violations(const TensorField& field);

} // namespace spdflow

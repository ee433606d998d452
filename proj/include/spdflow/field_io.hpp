#pragma once

// Field container format (SPDF), synthetic ground-truth generators,
// geometry-respecting noise, and glyph export.
//
// SPDF file layout: a short text header followed by a raw binary payload.
//
//   SPDF 1
//   dims <nx> <ny> <nz>
//   spacing <sx> <sy> <sz>
//   ordering vech6:[11,22,33,12,23,13]
//   data
//   <nx*ny*nz*6 little-endian float64>
//
// The payload is voxel-major with the voxel index varying slowest over
// (z, y, x) and the channel fastest; nz == 1 marks a 2-D field.

#include <cstdint>
#include <optional>
#include <string>

#include "spdflow/errors.hpp"
#include "spdflow/field.hpp"

namespace spdflow {

enum class SyntheticPattern { constant, two_region, smooth_rotation, crossing };

struct SyntheticSpec {
    SyntheticPattern pattern = SyntheticPattern::constant;
    std::array<int, 3> dims = {32, 32, 1};
    std::array<double, 3> spacing = {1.0, 1.0, 1.0};
    // Primary region tensor (all patterns). Default diag(3,1,1): anisotropic,
    // long axis along x.
    Matrix3 tensor_a = Eigen::Vector3d(3.0, 1.0, 1.0).asDiagonal();
    // Secondary region tensor (two_region, crossing). Defaults to tensor_a
    // rotated by 90 degrees about z.
    std::optional<Matrix3> tensor_b;
    // smooth_rotation: total rotation in turns across the x extent.
    double rotation_rate = 0.5;
};

// Deterministic synthetic fields, SPD by construction:
//   constant         every voxel = tensor_a
//   two_region       x < nx/2 -> tensor_a, else tensor_b (sharp interface)
//   smooth_rotation  tensor_a's eigenframe rotated about z by
//                    theta(x) = 2*pi*rotation_rate*x/(nx-1)
//   crossing         tensor_a in a horizontal band, tensor_b in a vertical
//                    band, averaged where the bands overlap, isotropic
//                    (tr(tensor_a)/3 * I) background
TensorField generate_synthetic(const SyntheticSpec& spec);

enum class NoiseModel {
    // P <- P^{1/2} expm(sigma * W) P^{1/2}, W = (Z + Z^T)/2 with Z a 3x3
    // matrix of i.i.d. standard normals. Always SPD; the default.
    congruence_exponential,
    // P <- P + sigma * W with the same W, redrawn until SPD (at most 100
    // attempts per voxel, then NumericalError). For comparison only.
    additive_rejection,
};

// Deterministic per (seed, voxel): voxel i uses its own PRNG stream
// (mt19937_64 seeded with a splitmix64 hash of seed and i; normals by
// Box-Muller), so the result does not depend on evaluation order.
// sigma_noise = 0 returns the field bitwise unchanged.
TensorField add_noise(const TensorField& field, double sigma_noise,
                      std::uint64_t seed,
                      NoiseModel model = NoiseModel::congruence_exponential);

struct ReadOptions {
    // Reject files containing non-SPD voxels instead of reporting them.
    bool strict_spd = false;
};

struct ReadReport {
    int spd_violations = 0;
    double worst_min_eigenvalue = 0.0;
};

// Errors: IoError on unreadable paths, malformed headers, unknown ordering
// tags, and truncated or oversized payloads; NumericalError in strict mode
// when a voxel fails spd_check.
TensorField read_field(const std::string& path, const ReadOptions& options = {},
                       ReadReport* report = nullptr);
void write_field(const TensorField& field, const std::string& path);

// Glyph table for external plotting, one CSV row per voxel:
//   x,y,z,a1,a2,a3,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z
// Centers are voxel coordinates times spacing. Semi-axes a1<=a2<=a3 are the
// eigenvalues of P^{-1} paired with eigenvector columns e1,e2,e3 of P
// (descending eigenvalues of P). Deterministic sign convention: each of e1,e2
// has its largest-magnitude component positive; e3 = e1 x e2 (right-handed).
void export_glyphs(const TensorField& field, const std::string& path);

} // namespace spdflow

#include "spdflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "spdflow/immersion.hpp"
#include "spdflow/sym_eig.hpp"

namespace spdflow {

namespace {

std::string format_value(const char* key, double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%s=%.17g\n", key, value);
    return buffer;
}

} // namespace

std::string ErrorReport::to_key_values() const {
    std::string out;
    out += format_value("riemannian_mse", riemannian_mse);
    out += format_value("frobenius_mse", frobenius_mse);
    out += format_value("max_pointwise", max_pointwise);
    out += "spd_violation_count=" + std::to_string(spd_violation_count) + "\n";
    return out;
}

double geodesic_distance(const SpdMatrix& p, const SpdMatrix& q) {
    const Matrix3 p_inv_sqrt = sym_inv_sqrt(p.matrix());
    const Matrix3 whitened = p_inv_sqrt * q.matrix() * p_inv_sqrt;
    return sym_log(whitened).norm();
}

ErrorReport field_error(const TensorField& field, const TensorField& reference) {
    if (field.dims() != reference.dims()) {
        throw std::invalid_argument("field_error: field dimensions do not match");
    }

    const auto& d = field.dims();
    ErrorReport report;
    double riemannian_sum = 0.0;
    double frobenius_sum = 0.0;
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const Voxel v{x, y, z};
                const Matrix3 a = field.matrix_at(v);
                const Matrix3 b = reference.matrix_at(v);
                frobenius_sum += (a - b).squaredNorm();
                if (!spd_check(a).is_spd) {
                    ++report.spd_violation_count;
                    continue;  // geodesic distance undefined off the cone
                }
                double dist = 0.0;
                try {
                    dist = geodesic_distance(SpdMatrix(a), SpdMatrix(b));
                } catch (const std::domain_error&) {
                    // Inside the cone but too ill-conditioned to evaluate in
                    // float64: count it, keep the aggregates defined.
                    ++report.spd_violation_count;
                    continue;
                }
                riemannian_sum += dist * dist;
                report.max_pointwise = std::max(report.max_pointwise, dist);
            }
        }
    }

    const double n = static_cast<double>(field.voxel_count());
    report.riemannian_mse = riemannian_sum / n;
    report.frobenius_mse = frobenius_sum / n;
    return report;
}

double volume_energy(const TensorField& field) {
    const auto& d = field.dims();
    const double cell = field.voxel_volume();
    double energy = 0.0;
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                energy += std::sqrt(induced_metric(field, Voxel{x, y, z}).det) * cell;
            }
        }
    }
    return energy;
}

SpdViolationReport spd_violations(const TensorField& field) {
    const auto& d = field.dims();
    SpdViolationReport report;
    report.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const SpdCheck check = spd_check(field.matrix_at(Voxel{x, y, z}));
                report.count += check.is_spd ? 0 : 1;
                report.worst_min_eigenvalue =
                    std::min(report.worst_min_eigenvalue, check.min_eigenvalue);
            }
        }
    }
    return report;
}

} // namespace spdflow

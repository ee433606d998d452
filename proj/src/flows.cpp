#include "spdflow/flows.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spdflow/immersion.hpp"
#include "spdflow/metrics.hpp"
#include "spdflow/sym_eig.hpp"

namespace spdflow {

int FlowDiagnostics::total_safeguard_activations() const {
    int total = 0;
    for (const auto& record : steps) {
        total += record.safeguard_activations;
    }
    return total;
}

double edge_stopping_c(double s, double k) {
    if (s < 0.0 || !(k > 0.0)) {
        throw std::invalid_argument("edge_stopping_c: requires s >= 0 and k > 0");
    }
    return (k * k) / (k * k + s * s);
}

ScalarGrid gaussian_smooth(const ScalarGrid& grid, double sigma) {
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("gaussian_smooth: sigma must be >= 0");
    }
    if (sigma == 0.0) {
        return grid;
    }

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) {
        w /= sum;
    }

    const auto& d = grid.dims();
    ScalarGrid current = grid;
    for (int axis = 0; axis < 3; ++axis) {
        if (d[static_cast<std::size_t>(axis)] == 1) {
            continue;  // degenerate axis: the clamped kernel is the identity anyway
        }
        ScalarGrid next(d);
        for (int z = 0; z < d[2]; ++z) {
            for (int y = 0; y < d[1]; ++y) {
                for (int x = 0; x < d[0]; ++x) {
                    double acc = 0.0;
                    for (int i = -radius; i <= radius; ++i) {
                        const int sx = x + (axis == 0 ? i : 0);
                        const int sy = y + (axis == 1 ? i : 0);
                        const int sz = z + (axis == 2 ? i : 0);
                        acc += kernel[static_cast<std::size_t>(i + radius)] *
                               current.at_clamped(sx, sy, sz);
                    }
                    next.at(x, y, z) = acc;
                }
            }
        }
        current = std::move(next);
    }
    return current;
}

ScalarGrid magnitude_field(const TensorField& field) {
    const auto& d = field.dims();
    ScalarGrid mag(d);
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                mag.at(x, y, z) = beltrami_magnitude(field, Voxel{x, y, z});
            }
        }
    }
    return mag;
}

double resolve_edge_constant(const TensorField& field, double sigma) {
    const ScalarGrid smoothed = gaussian_smooth(magnitude_field(field), sigma);
    std::vector<double> values = smoothed.raw();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double median = (n % 2 == 1)
                              ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return median > 0.0 ? median : 1.0;
}

namespace {

struct GuardOutcome {
    Matrix3 value;
    bool activated = false;
    double min_eigenvalue = 0.0;
};

GuardOutcome apply_safeguard(const Matrix3& p_new, const SpdMatrix& p_old,
                             SafeguardPolicy policy, double eig_floor) {
    const SymEig eig = sym_eig(p_new);
    const double min_eig = eig.values[0];

    switch (policy) {
        case SafeguardPolicy::clamp: {
            const double floor_val = eig_floor * (p_old.matrix().trace() / 3.0);
            if (min_eig >= floor_val) {
                return GuardOutcome{p_new, false, min_eig};
            }
            Vector3 floored = eig.values;
            for (int i = 0; i < 3; ++i) {
                floored[i] = std::max(floored[i], floor_val);
            }
            Matrix3 out = eig.vectors * floored.asDiagonal() * eig.vectors.transpose();
            out = (0.5 * (out + out.transpose())).eval();
            return GuardOutcome{out, true, floor_val};
        }
        case SafeguardPolicy::reject_step: {
            if (min_eig > 0.0) {
                return GuardOutcome{p_new, false, min_eig};
            }
            return GuardOutcome{p_old.matrix(), true, p_old.min_eigenvalue()};
        }
        case SafeguardPolicy::strict: {
            if (min_eig > 0.0) {
                return GuardOutcome{p_new, false, min_eig};
            }
            return GuardOutcome{p_new, true, min_eig};  // caller raises
        }
    }
    throw std::logic_error("apply_safeguard: unknown policy");
}

constexpr double kNoEdgeConstant = -1.0;

// One forward-Euler step shared by all four flows. `k < 0` marks flows without
// an edge detector (tv, rmc).
TensorField euler_step(const TensorField& field, FlowKind kind, double dt, double k,
                       double sigma, const SafeguardSpec& guard, StepStats* stats,
                       ShockPairing pairing) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("flow step: dt must be positive");
    }
    const int m = field.spatial_dim();
    const auto& d = field.dims();
    const auto& h = field.spacing();
    const bool edge_weighted =
        kind == FlowKind::modified_rmc || kind == FlowKind::self_snakes;

    // Edge detector: c evaluated on the Gaussian-smoothed magnitude field.
    ScalarGrid mag;
    ScalarGrid c_field;
    if (edge_weighted) {
        mag = magnitude_field(field);
        const ScalarGrid smoothed = gaussian_smooth(mag, sigma);
        c_field = ScalarGrid(d);
        for (int z = 0; z < d[2]; ++z) {
            for (int y = 0; y < d[1]; ++y) {
                for (int x = 0; x < d[0]; ++x) {
                    c_field.at(x, y, z) = edge_stopping_c(smoothed.at(x, y, z), k);
                }
            }
        }
    }

    TensorField out = field;
    StepStats local;
    local.min_eigenvalue = std::numeric_limits<double>::infinity();

    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const Voxel v{x, y, z};
                const Vector6 curvature = mean_curvature(field, v).h;
                local.max_abs_curvature =
                    std::max(local.max_abs_curvature, curvature.norm());

                Vector6 rhs;
                switch (kind) {
                    case FlowKind::tv:
                        rhs = curvature;
                        break;
                    case FlowKind::rmc:
                        rhs = beltrami_magnitude(field, v) * curvature;
                        break;
                    case FlowKind::modified_rmc:
                        rhs = c_field.at(x, y, z) * mag.at(x, y, z) * curvature;
                        break;
                    case FlowKind::self_snakes: {
                        rhs = c_field.at(x, y, z) * mag.at(x, y, z) * curvature;
                        // Shock term: grad c paired with the channel gradients.
                        VectorM grad_c(m);
                        for (int a = 0; a < m; ++a) {
                            const int dx = a == 0 ? 1 : 0;
                            const int dy = a == 1 ? 1 : 0;
                            const int dz = a == 2 ? 1 : 0;
                            grad_c[a] = (c_field.at_clamped(x + dx, y + dy, z + dz) -
                                         c_field.at_clamped(x - dx, y - dy, z - dz)) /
                                        (2.0 * h[static_cast<std::size_t>(a)]);
                        }
                        const GradientMatrix grad_p = channel_gradient(field, v);
                        VectorM paired(m);
                        if (pairing == ShockPairing::metric) {
                            paired = induced_metric(field, v).inverse * grad_c;
                        } else {
                            paired = grad_c;
                        }
                        rhs += grad_p * paired;
                        break;
                    }
                }

                const SpdMatrix p_old(field.matrix_at(v));
                const Vector6 updated = field.vech_at(v) + dt * rhs;
                const GuardOutcome outcome =
                    apply_safeguard(unvech(updated), p_old, guard.policy, guard.eig_floor);
                if (outcome.activated && guard.policy == SafeguardPolicy::strict) {
                    throw NumericalError(
                        "voxel (" + std::to_string(x) + "," + std::to_string(y) + "," +
                        std::to_string(z) + ") left the SPD cone (min eigenvalue " +
                        std::to_string(outcome.min_eigenvalue) + ")");
                }
                local.safeguard_activations += outcome.activated ? 1 : 0;
                local.min_eigenvalue = std::min(local.min_eigenvalue, outcome.min_eigenvalue);
                // Store the guarded value; when the guard did not intervene this
                // is the raw Euler update, bitwise.
                if (outcome.activated) {
                    out.set_matrix(v, outcome.value);
                } else {
                    out.set_vech(v, updated);
                }
            }
        }
    }

    if (stats != nullptr) {
        *stats = local;
    }
    return out;
}

} // namespace

Matrix3 spd_safeguard(const Matrix3& p_new, const SpdMatrix& p_old,
                      SafeguardPolicy policy, double eig_floor, bool* activated) {
    const GuardOutcome outcome = apply_safeguard(p_new, p_old, policy, eig_floor);
    if (outcome.activated && policy == SafeguardPolicy::strict) {
        throw NumericalError("spd_safeguard: update left the SPD cone (min eigenvalue " +
                             std::to_string(outcome.min_eigenvalue) + ")");
    }
    if (activated != nullptr) {
        *activated = outcome.activated;
    }
    return outcome.value;
}

TensorField tv_step(const TensorField& field, double dt, const SafeguardSpec& guard,
                    StepStats* stats) {
    return euler_step(field, FlowKind::tv, dt, kNoEdgeConstant, 0.0, guard, stats,
                      ShockPairing::metric);
}

TensorField rmc_step(const TensorField& field, double dt, const SafeguardSpec& guard,
                     StepStats* stats) {
    return euler_step(field, FlowKind::rmc, dt, kNoEdgeConstant, 0.0, guard, stats,
                      ShockPairing::metric);
}

TensorField modified_rmc_step(const TensorField& field, double dt, double k, double sigma,
                              const SafeguardSpec& guard, StepStats* stats) {
    if (!(k > 0.0) || !(sigma >= 0.0)) {
        throw std::invalid_argument("modified_rmc_step: requires k > 0 and sigma >= 0");
    }
    return euler_step(field, FlowKind::modified_rmc, dt, k, sigma, guard, stats,
                      ShockPairing::metric);
}

TensorField self_snakes_step(const TensorField& field, double dt, double k, double sigma,
                             const SafeguardSpec& guard, StepStats* stats,
                             ShockPairing pairing) {
    if (!(k > 0.0) || !(sigma >= 0.0)) {
        throw std::invalid_argument("self_snakes_step: requires k > 0 and sigma >= 0");
    }
    return euler_step(field, FlowKind::self_snakes, dt, k, sigma, guard, stats, pairing);
}

FlowResult run_flow(const TensorField& field, const FlowConfig& config) {
    if (!(config.dt > 0.0)) {
        throw std::invalid_argument("run_flow: dt must be positive");
    }
    if (config.steps < 0) {
        throw std::invalid_argument("run_flow: steps must be >= 0");
    }
    if (!(config.sigma >= 0.0)) {
        throw std::invalid_argument("run_flow: sigma must be >= 0");
    }
    if (config.k.has_value() && !(*config.k > 0.0)) {
        throw std::invalid_argument("run_flow: k must be positive");
    }
    if (!(config.eig_floor > 0.0)) {
        throw std::invalid_argument("run_flow: eig_floor must be positive");
    }

    const bool edge_weighted =
        config.kind == FlowKind::modified_rmc || config.kind == FlowKind::self_snakes;

    FlowResult result{field, FlowDiagnostics{}};
    result.diagnostics.initial_volume_energy = volume_energy(field);
    result.diagnostics.resolved_k =
        edge_weighted ? config.k.value_or(resolve_edge_constant(field, config.sigma))
                      : std::numeric_limits<double>::quiet_NaN();
    const SafeguardSpec guard{config.safeguard, config.eig_floor};

    for (int step = 1; step <= config.steps; ++step) {
        const auto start = std::chrono::steady_clock::now();
        StepStats stats;
        try {
            switch (config.kind) {
                case FlowKind::tv:
                    result.field = tv_step(result.field, config.dt, guard, &stats);
                    break;
                case FlowKind::rmc:
                    result.field = rmc_step(result.field, config.dt, guard, &stats);
                    break;
                case FlowKind::modified_rmc:
                    result.field = modified_rmc_step(result.field, config.dt,
                                                     result.diagnostics.resolved_k,
                                                     config.sigma, guard, &stats);
                    break;
                case FlowKind::self_snakes:
                    result.field = self_snakes_step(result.field, config.dt,
                                                    result.diagnostics.resolved_k,
                                                    config.sigma, guard, &stats);
                    break;
            }
        } catch (const NumericalError& err) {
            throw NumericalError("step " + std::to_string(step) + ": " + err.what());
        }
        const auto end = std::chrono::steady_clock::now();

        StepRecord record;
        record.volume_energy = volume_energy(result.field);
        record.max_abs_curvature = stats.max_abs_curvature;
        record.safeguard_activations = stats.safeguard_activations;
        record.min_eigenvalue = stats.min_eigenvalue;
        record.wall_seconds = std::chrono::duration<double>(end - start).count();
        result.diagnostics.steps.push_back(record);
    }
    return result;
}

std::string to_string(FlowKind kind) {
    switch (kind) {
        case FlowKind::tv: return "tv";
        case FlowKind::rmc: return "rmc";
        case FlowKind::modified_rmc: return "modified_rmc";
        case FlowKind::self_snakes: return "self_snakes";
    }
    return "unknown";
}

std::string to_string(SafeguardPolicy policy) {
    switch (policy) {
        case SafeguardPolicy::clamp: return "clamp";
        case SafeguardPolicy::reject_step: return "reject_step";
        case SafeguardPolicy::strict: return "strict";
    }
    return "unknown";
}

FlowKind flow_kind_from_string(const std::string& name) {
    if (name == "tv") return FlowKind::tv;
    if (name == "rmc") return FlowKind::rmc;
    if (name == "modified_rmc") return FlowKind::modified_rmc;
    if (name == "self_snakes") return FlowKind::self_snakes;
    throw std::invalid_argument("unknown flow kind: " + name);
}

SafeguardPolicy safeguard_from_string(const std::string& name) {
    if (name == "clamp") return SafeguardPolicy::clamp;
    if (name == "reject_step") return SafeguardPolicy::reject_step;
    if (name == "strict") return SafeguardPolicy::strict;
    throw std::invalid_argument("unknown safeguard policy: " + name);
}

} // namespace spdflow

#include "spdflow/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "spdflow/sym_eig.hpp"

namespace spdflow {

namespace {

constexpr const char* kMagic = "SPDF";
constexpr int kFormatVersion = 1;
constexpr const char* kOrderingTag = "vech6:[11,22,33,12,23,13]";

// ---------------------------------------------------------------------------
// Deterministic per-voxel random streams.

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// One independent stream per (seed, voxel index); normals via Box-Muller on
// 53-bit uniforms, fixed across platforms (no std::normal_distribution, whose
// algorithm is implementation-defined).
class VoxelStream {
  public:
    VoxelStream(std::uint64_t seed, std::uint64_t voxel_index)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(voxel_index + 1))) {}

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 in [0,1)
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        have_spare_ = true;
        return r * std::cos(angle);
    }

    // Symmetrized standard-normal matrix W = (Z + Z^T)/2, Z drawn row-major.
    Matrix3 symmetric_normal() {
        Matrix3 z;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                z(i, j) = normal();
            }
        }
        return 0.5 * (z + z.transpose());
    }

  private:
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Little-endian float64 payload encoding (explicit byte order, portable).

void append_le_double(std::string& out, double value) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
}

double read_le_double(const unsigned char* bytes) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    }
    return std::bit_cast<double>(bits);
}

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

Matrix3 rotation_z(double theta) {
    Matrix3 r;
    r << std::cos(theta), -std::sin(theta), 0.0,
         std::sin(theta),  std::cos(theta), 0.0,
         0.0,              0.0,             1.0;
    return r;
}

Matrix3 validated_region_tensor(const Matrix3& tensor, const char* name) {
    try {
        return SpdMatrix(tensor).matrix();
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(name) + " is not positive definite");
    }
}

} // namespace

TensorField generate_synthetic(const SyntheticSpec& spec) {
    TensorField field(spec.dims, spec.spacing);
    const auto& d = field.dims();

    const Matrix3 a = validated_region_tensor(spec.tensor_a, "tensor_a");
    // Default secondary tensor: a quarter turn of tensor_a about z (exact,
    // entries permuted rather than multiplied through trig).
    Matrix3 b;
    if (spec.tensor_b.has_value()) {
        b = validated_region_tensor(*spec.tensor_b, "tensor_b");
    } else {
        Matrix3 r90;
        r90 << 0.0, -1.0, 0.0,
               1.0,  0.0, 0.0,
               0.0,  0.0, 1.0;
        b = r90 * a * r90.transpose();
        b = 0.5 * (b + b.transpose()).eval();
    }
    if (!std::isfinite(spec.rotation_rate)) {
        throw std::invalid_argument("rotation_rate must be finite");
    }

    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const Voxel v{x, y, z};
                switch (spec.pattern) {
                    case SyntheticPattern::constant:
                        field.set_matrix(v, a);
                        break;
                    case SyntheticPattern::two_region:
                        field.set_matrix(v, x < d[0] / 2 ? a : b);
                        break;
                    case SyntheticPattern::smooth_rotation: {
                        const double theta = 2.0 * std::numbers::pi * spec.rotation_rate *
                                             static_cast<double>(x) /
                                             static_cast<double>(d[0] - 1);
                        const Matrix3 r = rotation_z(theta);
                        field.set_matrix(v, r * a * r.transpose());
                        break;
                    }
                    case SyntheticPattern::crossing: {
                        const bool in_horizontal = y >= d[1] / 3 && y < 2 * d[1] / 3;
                        const bool in_vertical = x >= d[0] / 3 && x < 2 * d[0] / 3;
                        if (in_horizontal && in_vertical) {
                            field.set_matrix(v, 0.5 * (a + b));
                        } else if (in_horizontal) {
                            field.set_matrix(v, a);
                        } else if (in_vertical) {
                            field.set_matrix(v, b);
                        } else {
                            field.set_matrix(v, Matrix3::Identity() * (a.trace() / 3.0));
                        }
                        break;
                    }
                }
            }
        }
    }
    return field;
}

TensorField add_noise(const TensorField& field, double sigma_noise, std::uint64_t seed,
                      NoiseModel model) {
    if (!(sigma_noise >= 0.0)) {
        throw std::invalid_argument("add_noise: sigma_noise must be >= 0");
    }
    if (sigma_noise == 0.0) {
        return field;  // expm(0) = I: bitwise identity, no stream consumed
    }

    TensorField out = field;
    const auto& d = field.dims();
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const Voxel v{x, y, z};
                VoxelStream stream(seed, field.linear_index(v));
                const Matrix3 p = field.matrix_at(v);
                if (model == NoiseModel::congruence_exponential) {
                    const Matrix3 sqrt_p = sym_sqrt(p);
                    const Matrix3 kick = sym_exp(sigma_noise * stream.symmetric_normal());
                    out.set_matrix(v, sqrt_p * kick * sqrt_p);
                } else {
                    bool stored = false;
                    for (int attempt = 0; attempt < 100; ++attempt) {
                        const Matrix3 candidate =
                            p + sigma_noise * stream.symmetric_normal();
                        if (spd_check(candidate).is_spd) {
                            out.set_matrix(v, candidate);
                            stored = true;
                            break;
                        }
                    }
                    if (!stored) {
                        throw NumericalError(
                            "add_noise: additive model failed to stay SPD after "
                            "100 attempts at voxel (" +
                            std::to_string(x) + "," + std::to_string(y) + "," +
                            std::to_string(z) + ")");
                    }
                }
            }
        }
    }
    return out;
}

void write_field(const TensorField& field, const std::string& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("write_field: cannot open '" + path + "' for writing");
    }

    const auto& d = field.dims();
    const auto& s = field.spacing();
    std::ostringstream header;
    header << kMagic << " " << kFormatVersion << "\n";
    header << "dims " << d[0] << " " << d[1] << " " << d[2] << "\n";
    header << "spacing " << format_double(s[0]) << " " << format_double(s[1]) << " "
           << format_double(s[2]) << "\n";
    header << "ordering " << kOrderingTag << "\n";
    header << "data\n";
    file << header.str();

    std::string payload;
    payload.reserve(field.raw().size() * 8);
    for (double value : field.raw()) {
        append_le_double(payload, value);
    }
    file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!file) {
        throw IoError("write_field: short write to '" + path + "'");
    }
}

TensorField read_field(const std::string& path, const ReadOptions& options,
                       ReadReport* report) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("read_field: cannot open '" + path + "'");
    }

    std::string line;
    if (!std::getline(file, line)) {
        throw IoError("read_field: empty file '" + path + "'");
    }
    {
        std::istringstream first(line);
        std::string magic;
        int version = -1;
        if (!(first >> magic >> version) || magic != kMagic) {
            throw IoError("read_field: '" + path + "' is not an SPDF file");
        }
        if (version != kFormatVersion) {
            throw IoError("read_field: unsupported SPDF version " +
                          std::to_string(version));
        }
    }

    std::array<int, 3> dims = {0, 0, 0};
    std::array<double, 3> spacing = {0.0, 0.0, 0.0};
    bool have_dims = false;
    bool have_spacing = false;
    bool have_ordering = false;
    bool have_data = false;
    while (std::getline(file, line)) {
        std::istringstream tokens(line);
        std::string key;
        tokens >> key;
        if (key == "dims") {
            if (!(tokens >> dims[0] >> dims[1] >> dims[2])) {
                throw IoError("read_field: malformed header field 'dims'");
            }
            have_dims = true;
        } else if (key == "spacing") {
            if (!(tokens >> spacing[0] >> spacing[1] >> spacing[2])) {
                throw IoError("read_field: malformed header field 'spacing'");
            }
            have_spacing = true;
        } else if (key == "ordering") {
            std::string tag;
            tokens >> tag;
            if (tag != kOrderingTag) {
                throw IoError("read_field: header field 'ordering' has unknown tag '" +
                              tag + "' (expected '" + kOrderingTag + "')");
            }
            have_ordering = true;
        } else if (key == "data") {
            have_data = true;
            break;
        } else {
            throw IoError("read_field: unknown header field '" + key + "'");
        }
    }
    if (!have_data) {
        throw IoError("read_field: header has no 'data' marker");
    }
    if (!have_dims || !have_spacing || !have_ordering) {
        throw IoError(std::string("read_field: header is missing field '") +
                      (!have_dims ? "dims" : !have_spacing ? "spacing" : "ordering") +
                      "'");
    }

    TensorField field = [&] {
        try {
            return TensorField(dims, spacing);
        } catch (const std::invalid_argument& err) {
            throw IoError(std::string("read_field: invalid header: ") + err.what());
        }
    }();

    const std::size_t expected = field.raw().size() * 8;
    std::vector<unsigned char> payload(expected);
    file.read(reinterpret_cast<char*>(payload.data()),
              static_cast<std::streamsize>(expected));
    if (static_cast<std::size_t>(file.gcount()) != expected) {
        throw IoError("read_field: truncated payload (expected " +
                      std::to_string(expected) + " bytes, got " +
                      std::to_string(file.gcount()) + ")");
    }
    char extra = 0;
    if (file.read(&extra, 1); file.gcount() != 0) {
        throw IoError("read_field: payload larger than the declared dims");
    }

    for (std::size_t i = 0; i < field.raw().size(); ++i) {
        field.raw()[i] = read_le_double(payload.data() + 8 * i);
    }

    ReadReport local;
    local.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
    const auto& d = field.dims();
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const SpdCheck check = spd_check(field.matrix_at(Voxel{x, y, z}));
                if (!check.is_spd) {
                    ++local.spd_violations;
                    if (options.strict_spd) {
                        throw NumericalError(
                            "read_field: voxel (" + std::to_string(x) + "," +
                            std::to_string(y) + "," + std::to_string(z) +
                            ") is not SPD (min eigenvalue " +
                            std::to_string(check.min_eigenvalue) + ")");
                    }
                }
                local.worst_min_eigenvalue =
                    std::min(local.worst_min_eigenvalue, check.min_eigenvalue);
            }
        }
    }
    if (report != nullptr) {
        *report = local;
    }
    return field;
}

void export_glyphs(const TensorField& field, const std::string& path) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) {
        throw IoError("export_glyphs: cannot open '" + path + "' for writing");
    }
    file << "x,y,z,a1,a2,a3,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z\n";

    const auto& d = field.dims();
    const auto& s = field.spacing();
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const SymEig eig = sym_eig(field.matrix_at(Voxel{x, y, z}));
                // Columns of P's eigenframe ordered by descending eigenvalue;
                // the paired semi-axes 1/lambda (eigenvalues of P^{-1}) then
                // come out ascending: the long matrix axis is the short glyph
                // axis and vice versa.
                Vector3 e1 = eig.vectors.col(2);
                Vector3 e2 = eig.vectors.col(1);
                const auto orient = [](Vector3& e) {
                    int arg = 0;
                    for (int i = 1; i < 3; ++i) {
                        if (std::abs(e[i]) > std::abs(e[arg])) {
                            arg = i;
                        }
                    }
                    if (e[arg] < 0.0) {
                        e = -e;
                    }
                };
                orient(e1);
                orient(e2);
                const Vector3 e3 = e1.cross(e2);  // right-handed by construction

                file << format_double(x * s[0]) << "," << format_double(y * s[1]) << ","
                     << format_double(z * s[2]);
                for (int i = 2; i >= 0; --i) {
                    file << "," << format_double(1.0 / eig.values[i]);
                }
                const std::array<const Vector3*, 3> frame = {&e1, &e2, &e3};
                for (const Vector3* e : frame) {
                    for (int i = 0; i < 3; ++i) {
                        file << "," << format_double((*e)[i]);
                    }
                }
                file << "\n";
            }
        }
    }
    if (!file) {
        throw IoError("export_glyphs: short write to '" + path + "'");
    }
}

} // namespace spdflow

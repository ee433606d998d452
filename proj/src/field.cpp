#include "spdflow/field.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace spdflow {

TensorField::TensorField(std::array<int, 3> dims, std::array<double, 3> spacing)
    : spatial_dim_(dims[2] == 1 ? 2 : 3), dims_(dims), spacing_(spacing) {
    for (int a = 0; a < spatial_dim_; ++a) {
        if (dims_[static_cast<std::size_t>(a)] < 3) {
            throw std::invalid_argument(
                "TensorField: spatial extents must be >= 3 (axis " +
                std::to_string(a) + ")");
        }
    }
    if (dims_[2] < 1) {
        throw std::invalid_argument("TensorField: dims[2] must be >= 1");
    }
    for (int a = 0; a < 3; ++a) {
        if (!(spacing_[static_cast<std::size_t>(a)] > 0.0)) {
            throw std::invalid_argument("TensorField: spacing must be positive");
        }
    }
    data_.assign(voxel_count() * 6, 0.0);
}

std::size_t TensorField::voxel_count() const {
    return static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) *
           static_cast<std::size_t>(dims_[2]);
}

double TensorField::voxel_volume() const {
    double vol = 1.0;
    for (int a = 0; a < spatial_dim_; ++a) {
        vol *= spacing_[static_cast<std::size_t>(a)];
    }
    return vol;
}

bool TensorField::same_shape(const TensorField& other) const {
    return dims_ == other.dims_ && spacing_ == other.spacing_;
}

bool TensorField::contains(const Voxel& v) const {
    return v.x >= 0 && v.x < dims_[0] && v.y >= 0 && v.y < dims_[1] && v.z >= 0 &&
           v.z < dims_[2];
}

std::size_t TensorField::linear_index(const Voxel& v) const {
    if (!contains(v)) {
        throw std::out_of_range("TensorField: voxel index out of range");
    }
    return (static_cast<std::size_t>(v.z) * dims_[1] + static_cast<std::size_t>(v.y)) *
               static_cast<std::size_t>(dims_[0]) +
           static_cast<std::size_t>(v.x);
}

Vector6 TensorField::vech_at(const Voxel& v) const {
    const std::size_t base = linear_index(v) * 6;
    Vector6 out;
    for (int c = 0; c < 6; ++c) {
        out[c] = data_[base + static_cast<std::size_t>(c)];
    }
    return out;
}

void TensorField::set_vech(const Voxel& v, const Vector6& value) {
    const std::size_t base = linear_index(v) * 6;
    for (int c = 0; c < 6; ++c) {
        data_[base + static_cast<std::size_t>(c)] = value[c];
    }
}

Vector6 TensorField::vech_clamped(int x, int y, int z) const {
    return vech_at(Voxel{std::clamp(x, 0, dims_[0] - 1), std::clamp(y, 0, dims_[1] - 1),
                         std::clamp(z, 0, dims_[2] - 1)});
}

Matrix3 TensorField::matrix_at(const Voxel& v) const {
    return unvech(vech_at(v));
}

void TensorField::set_matrix(const Voxel& v, const Matrix3& value) {
    set_vech(v, vech(0.5 * (value + value.transpose())));
}

ScalarGrid::ScalarGrid(std::array<int, 3> dims) : dims_(dims) {
    for (int a = 0; a < 3; ++a) {
        if (dims_[static_cast<std::size_t>(a)] < 1) {
            throw std::invalid_argument("ScalarGrid: extents must be >= 1");
        }
    }
    data_.assign(static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) *
                     static_cast<std::size_t>(dims_[2]),
                 0.0);
}

double& ScalarGrid::at(int x, int y, int z) {
    return data_[(static_cast<std::size_t>(z) * dims_[1] + static_cast<std::size_t>(y)) *
                     static_cast<std::size_t>(dims_[0]) +
                 static_cast<std::size_t>(x)];
}

double ScalarGrid::at(int x, int y, int z) const {
    return data_[(static_cast<std::size_t>(z) * dims_[1] + static_cast<std::size_t>(y)) *
                     static_cast<std::size_t>(dims_[0]) +
                 static_cast<std::size_t>(x)];
}

double ScalarGrid::at_clamped(int x, int y, int z) const {
    return at(std::clamp(x, 0, dims_[0] - 1), std::clamp(y, 0, dims_[1] - 1),
              std::clamp(z, 0, dims_[2] - 1));
}

} // namespace spdflow

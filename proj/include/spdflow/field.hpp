#pragma once

// Grid containers: TensorField (an m-dimensional image of 3x3 SPD matrices
// stored channelwise in vech order) and ScalarGrid (same grid shape, one
// channel). Layout is voxel-major with x fastest, z slowest, channel fastest
// of all: index((x,y,z), c) = ((z*ny + y)*nx + x)*6 + c.

#include <array>
#include <cstddef>
#include <vector>

#include "spdflow/geometry.hpp"

namespace spdflow {

struct Voxel {
    int x = 0;
    int y = 0;
    int z = 0;
};

class TensorField {
  public:
    // Spatial dimension is derived from the extents: dims[2] == 1 means m=2,
    // otherwise m=3. Every spatial axis must have extent >= 3 (the stencils
    // need one interior layer); spacing must be positive.
    explicit TensorField(std::array<int, 3> dims,
                         std::array<double, 3> spacing = {1.0, 1.0, 1.0});

    int spatial_dim() const { return spatial_dim_; }
    const std::array<int, 3>& dims() const { return dims_; }
    const std::array<double, 3>& spacing() const { return spacing_; }
    std::size_t voxel_count() const;
    // Product of spacing over the m spatial axes.
    double voxel_volume() const;

    bool same_shape(const TensorField& other) const;
    bool contains(const Voxel& v) const;

    std::size_t linear_index(const Voxel& v) const;

    Vector6 vech_at(const Voxel& v) const;
    void set_vech(const Voxel& v, const Vector6& value);
    // Read with coordinates clamped to the grid (replicate padding).
    Vector6 vech_clamped(int x, int y, int z) const;

    Matrix3 matrix_at(const Voxel& v) const;
    void set_matrix(const Voxel& v, const Matrix3& value);

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

  private:
    int spatial_dim_;
    std::array<int, 3> dims_;
    std::array<double, 3> spacing_;
    std::vector<double> data_;
};

class ScalarGrid {
  public:
    ScalarGrid() = default;
    explicit ScalarGrid(std::array<int, 3> dims);

    const std::array<int, 3>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    double& at(int x, int y, int z);
    double at(int x, int y, int z) const;
    double at_clamped(int x, int y, int z) const;

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

  private:
    std::array<int, 3> dims_ = {1, 1, 1};
    std::vector<double> data_ = {0.0};
};

} // namespace spdflow

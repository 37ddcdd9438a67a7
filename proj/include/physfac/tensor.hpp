#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace physfac {

/// Extents of a 4D tensor laid out as [t, c, a, b] (temporal, channel, two spatial).
struct Shape4 {
  std::size_t tau = 1;
  std::size_t kappa = 1;
  std::size_t alpha = 1;
  std::size_t beta = 1;

  std::size_t size() const { return tau * kappa * alpha * beta; }
  std::size_t features() const { return kappa * alpha * beta; }
  std::size_t plane() const { return alpha * beta; }
  bool operator==(const Shape4&) const = default;
  std::string str() const;
};

/// Dense row-major 4D feature tensor. The object the attention pipeline acts on.
class VoxelEmbedding {
 public:
  VoxelEmbedding() = default;
  explicit VoxelEmbedding(Shape4 shape, double fill = 0.0);
  VoxelEmbedding(Shape4 shape, std::vector<double> data);

  const Shape4& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(std::size_t t, std::size_t c, std::size_t a, std::size_t b) const {
    return ((t * shape_.kappa + c) * shape_.alpha + a) * shape_.beta + b;
  }
  double operator()(std::size_t t, std::size_t c, std::size_t a, std::size_t b) const {
    return data_[index(t, c, a, b)];
  }
  double& operator()(std::size_t t, std::size_t c, std::size_t a, std::size_t b) {
    return data_[index(t, c, a, b)];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Samples ε[·, c, a, b] as a contiguous vector of length τ.
  std::vector<double> trace(std::size_t c, std::size_t a, std::size_t b) const;

  bool operator==(const VoxelEmbedding&) const = default;

 private:
  Shape4 shape_;
  std::vector<double> data_;
};

/// M×N matrix view of an embedding: rows are time, columns are (c, a, b) features.
using EmbeddingMatrix = Eigen::MatrixXd;

/// Row t, column c·(α·β) + a·β + b.
EmbeddingMatrix flatten_to_matrix(const VoxelEmbedding& eps);

/// Exact inverse of flatten_to_matrix. Throws ShapeMismatch when extents disagree.
VoxelEmbedding unflatten_to_voxel(const EmbeddingMatrix& v, Shape4 shape);

inline constexpr double kInstanceNormEpsilon = 1e-5;

/// Per-channel standardization with statistics pooled over (t, a, b).
VoxelEmbedding instance_norm(const VoxelEmbedding& eps, double epsilon = kInstanceNormEpsilon);

VoxelEmbedding hadamard(const VoxelEmbedding& a, const VoxelEmbedding& b);
VoxelEmbedding add(const VoxelEmbedding& a, const VoxelEmbedding& b);
VoxelEmbedding relu(VoxelEmbedding x);

/// y[t,o,a,b] = Σ_c mix(o,c)·x[t,c,a,b]. A 1×1×1 convolution without bias.
VoxelEmbedding channel_mix(const VoxelEmbedding& x, const Eigen::MatrixXd& mix);

}  // namespace physfac

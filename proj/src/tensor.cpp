#include "physfac/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "physfac/error.hpp"
#include "physfac/waveform.hpp"

namespace physfac {

std::string Shape4::str() const {
  return "(" + std::to_string(tau) + "," + std::to_string(kappa) + "," + std::to_string(alpha) +
         "," + std::to_string(beta) + ")";
}

namespace {

void require_extents(const Shape4& shape) {
  if (shape.tau == 0 || shape.kappa == 0 || shape.alpha == 0 || shape.beta == 0) {
    throw PreconditionError("tensor extents must all be >= 1, got " + shape.str());
  }
}

void require_same_shape(const VoxelEmbedding& a, const VoxelEmbedding& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch(std::string(op) + ": shapes " + a.shape().str() + " and " +
                        b.shape().str() + " differ");
  }
}

}  // namespace

VoxelEmbedding::VoxelEmbedding(Shape4 shape, double fill) : shape_(shape) {
  require_extents(shape_);
  data_.assign(shape_.size(), fill);
}

VoxelEmbedding::VoxelEmbedding(Shape4 shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  require_extents(shape_);
  if (data_.size() != shape_.size()) {
    throw ShapeMismatch("data length " + std::to_string(data_.size()) + " does not match shape " +
                        shape_.str());
  }
}

std::vector<double> VoxelEmbedding::trace(std::size_t c, std::size_t a, std::size_t b) const {
  std::vector<double> out(shape_.tau);
  for (std::size_t t = 0; t < shape_.tau; ++t) out[t] = (*this)(t, c, a, b);
  return out;
}

EmbeddingMatrix flatten_to_matrix(const VoxelEmbedding& eps) {
  const auto& s = eps.shape();
  const auto n = s.features();
  EmbeddingMatrix v(static_cast<Eigen::Index>(s.tau), static_cast<Eigen::Index>(n));
  const auto data = eps.data();
  for (std::size_t t = 0; t < s.tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      v(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = data[t * n + j];
    }
  }
  return v;
}

VoxelEmbedding unflatten_to_voxel(const EmbeddingMatrix& v, Shape4 shape) {
  if (static_cast<std::size_t>(v.rows()) != shape.tau ||
      static_cast<std::size_t>(v.cols()) != shape.features()) {
    throw ShapeMismatch("cannot map a " + std::to_string(v.rows()) + "x" +
                        std::to_string(v.cols()) + " matrix onto shape " + shape.str());
  }
  VoxelEmbedding out(shape);
  auto data = out.data();
  const auto n = shape.features();
  for (std::size_t t = 0; t < shape.tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      data[t * n + j] = v(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

VoxelEmbedding instance_norm(const VoxelEmbedding& eps, double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("instance_norm epsilon must be positive");
  const auto& s = eps.shape();
  const auto plane = s.plane();
  const double count = static_cast<double>(s.tau * plane);
  VoxelEmbedding out(s);
  const auto in = eps.data();
  auto dst = out.data();

  for (std::size_t c = 0; c < s.kappa; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < s.tau; ++t) {
      const double* row = in.data() + (t * s.kappa + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) mean += row[p];
    }
    mean /= count;
    double var = 0.0;
    for (std::size_t t = 0; t < s.tau; ++t) {
      const double* row = in.data() + (t * s.kappa + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) var += (row[p] - mean) * (row[p] - mean);
    }
    var /= count;
    const double scale = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t t = 0; t < s.tau; ++t) {
      const std::size_t base = (t * s.kappa + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[base + p] = (in[base + p] - mean) * scale;
    }
  }
  return out;
}

VoxelEmbedding hadamard(const VoxelEmbedding& a, const VoxelEmbedding& b) {
  require_same_shape(a, b, "hadamard");
  VoxelEmbedding out(a.shape());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(),
                 [](double x, double y) { return x * y; });
  return out;
}

VoxelEmbedding add(const VoxelEmbedding& a, const VoxelEmbedding& b) {
  require_same_shape(a, b, "add");
  VoxelEmbedding out(a.shape());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(),
                 [](double x, double y) { return x + y; });
  return out;
}

VoxelEmbedding relu(VoxelEmbedding x) {
  for (double& v : x.data()) v = std::max(v, 0.0);
  return x;
}

VoxelEmbedding channel_mix(const VoxelEmbedding& x, const Eigen::MatrixXd& mix) {
  const auto& s = x.shape();
  if (static_cast<std::size_t>(mix.cols()) != s.kappa || mix.rows() < 1) {
    throw ShapeMismatch("channel mix expects " + std::to_string(s.kappa) + " input channels, got " +
                        std::to_string(mix.cols()));
  }
  Shape4 out_shape = s;
  out_shape.kappa = static_cast<std::size_t>(mix.rows());
  VoxelEmbedding out(out_shape);
  const auto plane = s.plane();
  const auto in = x.data();
  auto dst = out.data();
  for (std::size_t t = 0; t < s.tau; ++t) {
    for (std::size_t o = 0; o < out_shape.kappa; ++o) {
      double* out_row = dst.data() + (t * out_shape.kappa + o) * plane;
      for (std::size_t c = 0; c < s.kappa; ++c) {
        const double w = mix(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(c));
        if (w == 0.0) continue;
        const double* in_row = in.data() + (t * s.kappa + c) * plane;
        for (std::size_t p = 0; p < plane; ++p) out_row[p] += w * in_row[p];
      }
    }
  }
  return out;
}

Waveform::Waveform(std::vector<double> s, double rate) : samples(std::move(s)), fs(rate) {
  if (!(fs > 0.0)) throw PreconditionError("waveform sampling rate must be positive");
  if (samples.empty()) throw PreconditionError("waveform must have at least one sample");
}

}  // namespace physfac

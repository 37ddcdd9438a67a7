#include "physfac/conv3d.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "physfac/error.hpp"

namespace physfac {

Conv3dWeights Conv3dWeights::uniform_init(std::size_t out_channels, std::size_t in_channels,
                                          std::size_t temporal_kernel,
                                          std::size_t spatial_kernel, SeededUniform& rng) {
  Conv3dWeights w;
  w.out_channels = out_channels;
  w.in_channels = in_channels;
  w.temporal_kernel = temporal_kernel;
  w.spatial_kernel = spatial_kernel;
  const std::size_t fan_in = in_channels * temporal_kernel * spatial_kernel * spatial_kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  w.kernel.resize(out_channels * fan_in);
  for (double& v : w.kernel) v = rng.between(-bound, bound);
  w.bias.resize(out_channels);
  for (double& v : w.bias) v = rng.between(-bound, bound);
  return w;
}

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t pad,
                               std::size_t stride) {
  if (stride == 0) throw PreconditionError("convolution stride must be >= 1");
  if (kernel == 0 || kernel > in + 2 * pad) {
    throw PreconditionError("kernel extent " + std::to_string(kernel) +
                            " exceeds padded input extent " + std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

namespace {

// Output indices x in [lo, hi) whose input tap x * stride + offset lies inside [0, in).
std::pair<std::ptrdiff_t, std::ptrdiff_t> valid_range(std::size_t out, std::ptrdiff_t in,
                                                      std::ptrdiff_t stride, std::ptrdiff_t offset) {
  std::ptrdiff_t lo = 0;
  while (lo * stride + offset < 0) ++lo;
  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(out);
  while (hi > lo && (hi - 1) * stride + offset >= in) --hi;
  return {lo, hi};
}

}  // namespace

VoxelEmbedding conv3d_forward(const VoxelEmbedding& input, const Conv3dWeights& weights,
                              Stride3 stride, Padding3 padding) {
  const auto& in = input.shape();
  if (in.kappa != weights.in_channels) {
    throw ShapeMismatch("convolution expects " + std::to_string(weights.in_channels) +
                        " input channels, got " + std::to_string(in.kappa));
  }
  const std::size_t kt = weights.temporal_kernel;
  const std::size_t ks = weights.spatial_kernel;
  const std::size_t fan_in = weights.in_channels * kt * ks * ks;
  if (weights.kernel.size() != weights.out_channels * fan_in) {
    throw ShapeMismatch("kernel buffer does not match its declared extents");
  }

  const std::size_t out_t = conv_output_extent(in.tau, kt, padding.temporal, stride.temporal);
  const std::size_t out_h = conv_output_extent(in.alpha, ks, padding.spatial, stride.spatial);
  const std::size_t out_w = conv_output_extent(in.beta, ks, padding.spatial, stride.spatial);

  VoxelEmbedding output(Shape4{out_t, weights.out_channels, out_h, out_w});
  const double* src = input.data().data();
  double* dst = output.data().data();
  const auto pt = static_cast<std::ptrdiff_t>(padding.temporal);
  const auto ps = static_cast<std::ptrdiff_t>(padding.spatial);
  const auto st = static_cast<std::ptrdiff_t>(stride.temporal);
  const auto ss = static_cast<std::ptrdiff_t>(stride.spatial);
  const auto in_t = static_cast<std::ptrdiff_t>(in.tau);
  const auto in_h = static_cast<std::ptrdiff_t>(in.alpha);
  const auto in_w = static_cast<std::ptrdiff_t>(in.beta);

  // im2col per output frame, then one GEMM against the (out x fan_in) kernel.
  const std::size_t positions = out_h * out_w;
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      kernel(weights.kernel.data(), static_cast<Eigen::Index>(weights.out_channels),
             static_cast<Eigen::Index>(fan_in));
  Eigen::VectorXd bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(weights.out_channels));
  for (std::size_t o = 0; o < weights.bias.size(); ++o) bias[static_cast<Eigen::Index>(o)] = weights.bias[o];

  // Row-major (fan_in x positions) so each tap row is contiguous over output positions.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cols(
      static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(positions));
  for (std::size_t to = 0; to < out_t; ++to) {
    cols.setZero();
    for (std::size_t c = 0; c < in.kappa; ++c) {
      for (std::size_t dt = 0; dt < kt; ++dt) {
        const std::ptrdiff_t ti = static_cast<std::ptrdiff_t>(to) * st + static_cast<std::ptrdiff_t>(dt) - pt;
        if (ti < 0 || ti >= in_t) continue;
        const double* in_plane = src + (static_cast<std::size_t>(ti) * in.kappa + c) * in.alpha * in.beta;
        for (std::size_t dh = 0; dh < ks; ++dh) {
          for (std::size_t dw = 0; dw < ks; ++dw) {
            double* row = cols.row(static_cast<Eigen::Index>(((c * kt + dt) * ks + dh) * ks + dw)).data();
            const auto [w_lo, w_hi] = valid_range(out_w, in_w, ss, static_cast<std::ptrdiff_t>(dw) - ps);
            for (std::size_t ho = 0; ho < out_h; ++ho) {
              const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(ho) * ss + static_cast<std::ptrdiff_t>(dh) - ps;
              if (hi < 0 || hi >= in_h) continue;
              const double* in_row = in_plane + hi * in_w + (static_cast<std::ptrdiff_t>(dw) - ps);
              double* out_row = row + ho * out_w;
              for (std::ptrdiff_t x = w_lo; x < w_hi; ++x) out_row[x] = in_row[x * ss];
            }
          }
        }
      }
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> frame(
        dst + to * weights.out_channels * positions, static_cast<Eigen::Index>(weights.out_channels),
        static_cast<Eigen::Index>(positions));
    frame.noalias() = kernel * cols;
    frame.colwise() += bias;
  }
  return output;
}

}  // namespace physfac

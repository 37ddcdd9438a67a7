#pragma once

#include <cstddef>
#include <vector>

#include "physfac/random.hpp"
#include "physfac/tensor.hpp"

namespace physfac {

/// Dense 3D kernel bank, layout [out][in][kt][kh][kw] with a square spatial window.
struct Conv3dWeights {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t temporal_kernel = 1;
  std::size_t spatial_kernel = 1;
  std::vector<double> kernel;
  std::vector<double> bias;  // empty, or one entry per output channel

  std::size_t parameter_count() const { return kernel.size() + bias.size(); }

  /// Uniform in [-k, k] with k = 1/sqrt(fan_in); bias drawn the same way.
  static Conv3dWeights uniform_init(std::size_t out_channels, std::size_t in_channels,
                                    std::size_t temporal_kernel, std::size_t spatial_kernel,
                                    SeededUniform& rng);
};

struct Stride3 {
  std::size_t temporal = 1;
  std::size_t spatial = 1;
};

struct Padding3 {
  std::size_t temporal = 0;
  std::size_t spatial = 0;
};

/// Output extent of one axis: floor((in + 2·pad − kernel)/stride) + 1.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t pad,
                               std::size_t stride);

/// Strided zero-padded cross-correlation over (t, h, w), input laid out as [t, c, h, w].
///
/// Throws ShapeMismatch on channel mismatch and PreconditionError when a kernel
/// exceeds the padded input or a stride is zero.
VoxelEmbedding conv3d_forward(const VoxelEmbedding& input, const Conv3dWeights& weights,
                              Stride3 stride, Padding3 padding);

}  // namespace physfac

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "physfac/attention.hpp"
#include "physfac/conv3d.hpp"
#include "physfac/tensor.hpp"
#include "physfac/waveform.hpp"

namespace physfac {

/// Video frames laid out [t, c, h, w] with values in [0, 1].
class VideoClip {
 public:
  /// Throws ShapeMismatch unless channels ∈ {1, 3, 4} and height = width ∈ {9, 36, 72};
  /// PreconditionError for fps <= 0 or pixels outside [0, 1].
  VideoClip(VoxelEmbedding pixels, double fps);

  std::size_t frames() const { return pixels_.shape().tau; }
  std::size_t channels() const { return pixels_.shape().kappa; }
  std::size_t height() const { return pixels_.shape().alpha; }
  std::size_t width() const { return pixels_.shape().beta; }
  double fps() const { return fps_; }
  const VoxelEmbedding& pixels() const { return pixels_; }

 private:
  VoxelEmbedding pixels_;
  double fps_;
};

/// Stacks RGB (3 channels) and thermal (1 channel) into one 4-channel clip.
VideoClip stack_modalities(const VideoClip& rgb, const VideoClip& thermal);

struct BlockSpec {
  std::size_t out_channels = 8;
  std::size_t temporal_kernel = 3;  // odd; padded to preserve length at stride 1
  std::size_t spatial_kernel = 3;   // odd
  std::size_t temporal_stride = 1;
  std::size_t spatial_stride = 2;
};

/// How input streams reach the two branches.
enum class Routing {
  shared,  ///< both branches consume one stream with `input_channels` channels
  split,   ///< BVP branch takes RGB, RSP branch takes thermal
};

struct BranchAttention {
  AttentionConfig config;
  bool omit = false;
  /// Index of the block whose output is factorized. Defaults to the penultimate block.
  std::optional<std::size_t> placement;
};

struct MiniModelConfig {
  std::size_t input_resolution = 72;
  std::size_t input_channels = 3;
  Routing routing = Routing::shared;
  std::vector<BlockSpec> bvp_blocks;
  std::vector<BlockSpec> rsp_blocks;
  std::size_t rsp_upsample_factor = 4;
  BranchAttention bvp_attention;
  BranchAttention rsp_attention;
  std::uint64_t seed = 0;

  /// BVP: channels (8,12,12,8), temporal stride 1. RSP: same channels, temporal
  /// strides (2,2,1,1), ×4 upsampling. Spatial stride 2 everywhere.
  static MiniModelConfig defaults();

  /// Throws PreconditionError when a branch contract is violated.
  void validate() const;

  std::size_t bvp_input_channels() const;
  std::size_t rsp_input_channels() const;
};

enum class AttentionMode {
  apply,  ///< run the configured attention (omitted when the config says so)
  omit,   ///< skip the attention block entirely
  zero,   ///< excite with an all-zero attention map
};

struct MultitaskOutput {
  Waveform rppg;
  Waveform rrsp;
};

/// Linear interpolation onto `out_len` samples (half-pixel aligned, edges clamped).
std::vector<double> resample_linear(std::span<const double> x, std::size_t out_len);

/// Toy-scale forward-only dual-branch 3D CNN. Weights are fixed at construction.
class DualBranchNet {
 public:
  explicit DualBranchNet(MiniModelConfig cfg);

  const MiniModelConfig& config() const { return cfg_; }
  std::size_t parameter_count() const;

  /// Keeps the temporal axis intact; output has exactly clip.frames() samples.
  Waveform bvp_forward(const VideoClip& clip,
                       std::optional<std::span<const double>> target = std::nullopt,
                       AttentionMode mode = AttentionMode::apply) const;

  /// Strides through time, then upsamples back to clip.frames() samples.
  /// Throws PreconditionError when frames are not divisible by the upsample factor.
  Waveform rsp_forward(const VideoClip& clip,
                       std::optional<std::span<const double>> target = std::nullopt,
                       AttentionMode mode = AttentionMode::apply) const;

  /// Routes the available modalities per config.routing.
  MultitaskOutput forward_multitask(const VideoClip* rgb, const VideoClip* thermal,
                                    std::optional<std::span<const double>> bvp_target = std::nullopt,
                                    std::optional<std::span<const double>> rsp_target = std::nullopt,
                                    AttentionMode mode = AttentionMode::apply) const;

 private:
  struct Branch {
    std::vector<BlockSpec> specs;
    std::vector<Conv3dWeights> convs;
    Conv3dWeights head;  // 1×1×1, last channels -> 1
    BranchAttention attention;
    std::size_t input_channels = 0;
  };

  std::vector<double> run_branch(const Branch& branch, const VideoClip& clip,
                                 std::optional<std::span<const double>> target,
                                 AttentionMode mode) const;
  void check_clip(const VideoClip& clip, std::size_t expected_channels) const;

  MiniModelConfig cfg_;
  Branch bvp_;
  Branch rsp_;
};

}  // namespace physfac

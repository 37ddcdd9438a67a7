#include "physfac/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "physfac/error.hpp"

namespace physfac {

namespace {

bool supported_resolution(std::size_t r) { return r == 9 || r == 36 || r == 72; }
bool supported_channels(std::size_t c) { return c == 1 || c == 3 || c == 4; }

void validate_blocks(const std::vector<BlockSpec>& blocks, const char* branch) {
  if (blocks.empty()) throw PreconditionError(std::string(branch) + " branch has no blocks");
  for (const auto& b : blocks) {
    if (b.out_channels == 0) throw PreconditionError(std::string(branch) + " block has 0 channels");
    if (b.temporal_kernel % 2 == 0 || b.spatial_kernel % 2 == 0) {
      throw PreconditionError(std::string(branch) + " kernels must have odd extents");
    }
    if (b.temporal_stride == 0 || b.spatial_stride == 0) {
      throw PreconditionError(std::string(branch) + " strides must be >= 1");
    }
  }
}

std::size_t placement_of(const BranchAttention& att, std::size_t blocks) {
  if (att.placement) return *att.placement;
  return blocks >= 2 ? blocks - 2 : 0;
}

}  // namespace

VideoClip::VideoClip(VoxelEmbedding pixels, double fps) : pixels_(std::move(pixels)), fps_(fps) {
  const auto& s = pixels_.shape();
  if (!supported_channels(s.kappa)) {
    throw ShapeMismatch("video clips carry 1, 3 or 4 channels, got " + std::to_string(s.kappa));
  }
  if (s.alpha != s.beta || !supported_resolution(s.alpha)) {
    throw ShapeMismatch("video frames must be 9x9, 36x36 or 72x72, got " + std::to_string(s.alpha) +
                        "x" + std::to_string(s.beta));
  }
  if (!(fps_ > 0.0)) throw PreconditionError("video frame rate must be positive");
  for (double v : pixels_.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("pixel values must lie in [0, 1]");
  }
}

VideoClip stack_modalities(const VideoClip& rgb, const VideoClip& thermal) {
  if (rgb.channels() != 3 || thermal.channels() != 1) {
    throw ShapeMismatch("stacking expects a 3-channel RGB clip and a 1-channel thermal clip");
  }
  if (rgb.frames() != thermal.frames() || rgb.height() != thermal.height()) {
    throw ShapeMismatch("RGB and thermal clips differ in frames or resolution");
  }
  Shape4 shape = rgb.pixels().shape();
  shape.kappa = 4;
  VoxelEmbedding out(shape);
  for (std::size_t t = 0; t < shape.tau; ++t) {
    for (std::size_t a = 0; a < shape.alpha; ++a) {
      for (std::size_t b = 0; b < shape.beta; ++b) {
        for (std::size_t c = 0; c < 3; ++c) out(t, c, a, b) = rgb.pixels()(t, c, a, b);
        out(t, 3, a, b) = thermal.pixels()(t, 0, a, b);
      }
    }
  }
  return VideoClip(std::move(out), rgb.fps());
}

MiniModelConfig MiniModelConfig::defaults() {
  MiniModelConfig cfg;
  const std::size_t channels[] = {8, 12, 12, 8};
  const std::size_t rsp_strides[] = {2, 2, 1, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    cfg.bvp_blocks.push_back(BlockSpec{channels[i], 3, 3, 1, 2});
    cfg.rsp_blocks.push_back(BlockSpec{channels[i], 3, 3, rsp_strides[i], 2});
  }
  cfg.rsp_upsample_factor = 4;
  cfg.bvp_attention.config.grbf_sigma = 2.0;
  cfg.bvp_attention.config.grbf_delta_t = 4;
  cfg.rsp_attention.config = cfg.bvp_attention.config;
  return cfg;
}

std::size_t MiniModelConfig::bvp_input_channels() const {
  return routing == Routing::split ? 3 : input_channels;
}

std::size_t MiniModelConfig::rsp_input_channels() const {
  return routing == Routing::split ? 1 : input_channels;
}

void MiniModelConfig::validate() const {
  if (!supported_resolution(input_resolution)) {
    throw PreconditionError("input resolution must be 9, 36 or 72");
  }
  if (!supported_channels(input_channels)) {
    throw PreconditionError("input channels must be 1, 3 or 4");
  }
  if (routing == Routing::split && input_channels != 4) {
    throw PreconditionError("split routing needs 4 input channels (RGB + thermal)");
  }
  validate_blocks(bvp_blocks, "BVP");
  validate_blocks(rsp_blocks, "RSP");
  for (const auto& b : bvp_blocks) {
    if (b.temporal_stride != 1) {
      throw PreconditionError("BVP blocks must keep temporal stride 1");
    }
  }
  std::size_t product = 1;
  for (const auto& b : rsp_blocks) product *= b.temporal_stride;
  if (product != rsp_upsample_factor) {
    throw PreconditionError("RSP temporal strides multiply to " + std::to_string(product) +
                            " but the upsample factor is " + std::to_string(rsp_upsample_factor));
  }
  if (placement_of(bvp_attention, bvp_blocks.size()) >= bvp_blocks.size() ||
      placement_of(rsp_attention, rsp_blocks.size()) >= rsp_blocks.size()) {
    throw PreconditionError("attention placement index is past the last block");
  }
  // Every block must still see a non-empty spatial plane.
  for (const auto* blocks : {&bvp_blocks, &rsp_blocks}) {
    std::size_t extent = input_resolution;
    for (const auto& b : *blocks) {
      extent = conv_output_extent(extent, b.spatial_kernel, b.spatial_kernel / 2, b.spatial_stride);
    }
  }
}

std::vector<double> resample_linear(std::span<const double> x, std::size_t out_len) {
  if (x.empty() || out_len == 0) throw PreconditionError("resampling needs non-empty input and output");
  std::vector<double> out(out_len);
  if (x.size() == 1) {
    std::fill(out.begin(), out.end(), x[0]);
    return out;
  }
  const double scale = static_cast<double>(x.size()) / static_cast<double>(out_len);
  const double last = static_cast<double>(x.size() - 1);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double src = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    const double frac = src - static_cast<double>(lo);
    out[i] = x[lo] * (1.0 - frac) + x[hi] * frac;
  }
  return out;
}

DualBranchNet::DualBranchNet(MiniModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  SeededUniform rng(cfg_.seed);
  auto build = [&rng](Branch& br, const std::vector<BlockSpec>& specs, std::size_t in_channels,
                      const BranchAttention& att) {
    br.specs = specs;
    br.attention = att;
    br.input_channels = in_channels;
    std::size_t c = in_channels;
    for (const auto& s : specs) {
      br.convs.push_back(
          Conv3dWeights::uniform_init(s.out_channels, c, s.temporal_kernel, s.spatial_kernel, rng));
      c = s.out_channels;
    }
    br.head = Conv3dWeights::uniform_init(1, c, 1, 1, rng);
  };
  build(bvp_, cfg_.bvp_blocks, cfg_.bvp_input_channels(), cfg_.bvp_attention);
  build(rsp_, cfg_.rsp_blocks, cfg_.rsp_input_channels(), cfg_.rsp_attention);
}

std::size_t DualBranchNet::parameter_count() const {
  std::size_t n = 0;
  for (const Branch* br : {&bvp_, &rsp_}) {
    for (const auto& c : br->convs) n += c.parameter_count();
    n += br->head.parameter_count();
  }
  return n;
}

void DualBranchNet::check_clip(const VideoClip& clip, std::size_t expected_channels) const {
  if (clip.height() != cfg_.input_resolution) {
    throw ShapeMismatch("model expects " + std::to_string(cfg_.input_resolution) + "x" +
                        std::to_string(cfg_.input_resolution) + " frames, got " +
                        std::to_string(clip.height()) + "x" + std::to_string(clip.width()));
  }
  if (clip.channels() != expected_channels) {
    throw ShapeMismatch("branch expects " + std::to_string(expected_channels) +
                        " channels, got " + std::to_string(clip.channels()));
  }
}

std::vector<double> DualBranchNet::run_branch(const Branch& branch, const VideoClip& clip,
                                              std::optional<std::span<const double>> target,
                                              AttentionMode mode) const {
  if (target && target->size() != clip.frames()) {
    throw ShapeMismatch("target has " + std::to_string(target->size()) + " samples, clip has " +
                        std::to_string(clip.frames()) + " frames");
  }
  const std::size_t placement = placement_of(branch.attention, branch.specs.size());
  const auto& att = branch.attention.config;
  // Without ground truth, tsfm has nothing to constrain against and is skipped.
  const bool run_attention = mode == AttentionMode::apply && !branch.attention.omit &&
                             !(att.variant == AttentionVariant::tsfm && !target);

  VoxelEmbedding x = clip.pixels();
  for (std::size_t i = 0; i < branch.specs.size(); ++i) {
    const auto& s = branch.specs[i];
    x = conv3d_forward(x, branch.convs[i], Stride3{s.temporal_stride, s.spatial_stride},
                       Padding3{s.temporal_kernel / 2, s.spatial_kernel / 2});
    for (double& v : x.data()) v = std::tanh(v);

    if (i != placement) continue;
    if (mode == AttentionMode::zero) {
      x = excite(x, VoxelEmbedding(x.shape(), 0.0));
    } else if (run_attention) {
      std::optional<std::vector<double>> local;
      if (target) local = resample_linear(*target, x.shape().tau);
      std::optional<std::span<const double>> tspan;
      if (local) tspan = std::span<const double>(*local);
      x = compute_attention(x, att, tspan).excited;
    }
  }

  // Spatial mean, then the 1×1×1 head.
  const auto& s = x.shape();
  std::vector<double> out(s.tau);
  const double inv_plane = 1.0 / static_cast<double>(s.plane());
  for (std::size_t t = 0; t < s.tau; ++t) {
    double acc = branch.head.bias[0];
    for (std::size_t c = 0; c < s.kappa; ++c) {
      double mean = 0.0;
      for (std::size_t a = 0; a < s.alpha; ++a) {
        for (std::size_t b = 0; b < s.beta; ++b) mean += x(t, c, a, b);
      }
      acc += branch.head.kernel[c] * mean * inv_plane;
    }
    out[t] = acc;
  }
  return out;
}

Waveform DualBranchNet::bvp_forward(const VideoClip& clip,
                                    std::optional<std::span<const double>> target,
                                    AttentionMode mode) const {
  check_clip(clip, bvp_.input_channels);
  return Waveform(run_branch(bvp_, clip, target, mode), clip.fps());
}

Waveform DualBranchNet::rsp_forward(const VideoClip& clip,
                                    std::optional<std::span<const double>> target,
                                    AttentionMode mode) const {
  check_clip(clip, rsp_.input_channels);
  if (clip.frames() % cfg_.rsp_upsample_factor != 0) {
    throw PreconditionError(std::to_string(clip.frames()) + " frames are not divisible by the RSP "
                            "upsample factor " + std::to_string(cfg_.rsp_upsample_factor));
  }
  const auto coarse = run_branch(rsp_, clip, target, mode);
  return Waveform(resample_linear(coarse, clip.frames()), clip.fps());
}

MultitaskOutput DualBranchNet::forward_multitask(const VideoClip* rgb, const VideoClip* thermal,
                                                 std::optional<std::span<const double>> bvp_target,
                                                 std::optional<std::span<const double>> rsp_target,
                                                 AttentionMode mode) const {
  if (!rgb && !thermal) throw PreconditionError("no input modality supplied");
  if (rgb && thermal && rgb->frames() != thermal->frames()) {
    throw ShapeMismatch("RGB and thermal clips have different frame counts");
  }

  if (cfg_.routing == Routing::split) {
    if (!rgb || !thermal) throw PreconditionError("split routing needs both RGB and thermal clips");
    return {bvp_forward(*rgb, bvp_target, mode), rsp_forward(*thermal, rsp_target, mode)};
  }

  switch (cfg_.input_channels) {
    case 4: {
      if (!rgb || !thermal) throw PreconditionError("a 4-channel model needs RGB and thermal clips");
      const VideoClip both = stack_modalities(*rgb, *thermal);
      return {bvp_forward(both, bvp_target, mode), rsp_forward(both, rsp_target, mode)};
    }
    case 3:
      if (!rgb) throw PreconditionError("a 3-channel model needs an RGB clip");
      if (thermal) throw PreconditionError("a 3-channel model does not consume a thermal clip");
      return {bvp_forward(*rgb, bvp_target, mode), rsp_forward(*rgb, rsp_target, mode)};
    default:
      if (!thermal) throw PreconditionError("a 1-channel model needs a thermal clip");
      if (rgb) throw PreconditionError("a 1-channel model does not consume an RGB clip");
      return {bvp_forward(*thermal, bvp_target, mode), rsp_forward(*thermal, rsp_target, mode)};
  }
}

}  // namespace physfac

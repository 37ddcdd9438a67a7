#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "physfac/factorize.hpp"
#include "physfac/tensor.hpp"

namespace physfac {

/// Which factorization backs the attention map.
enum class AttentionVariant {
  fsam,  ///< unconstrained NMF
  grbf,  ///< NMF constrained to a Gaussian radial basis (smooth NMF)
  tsfm,  ///< NMF constrained to the target physiological signal
};

std::string_view to_string(AttentionVariant v);
/// Throws PreconditionError for unknown names.
AttentionVariant parse_variant(std::string_view name);

struct AttentionConfig {
  AttentionVariant variant = AttentionVariant::tsfm;
  Eigen::Index rank = kDefaultRank;
  int iterations = kDefaultIterations;
  double epsilon = kDenominatorGuard;
  std::optional<double> grbf_sigma;
  std::optional<int> grbf_delta_t;
  /// κ×κ weights of the pre/post 1×1×1 convolutions. Empty means identity.
  Eigen::MatrixXd pre_mix;
  Eigen::MatrixXd post_mix;
  std::uint64_t seed = 0;
};

struct AttentionOutput {
  VoxelEmbedding attended;  ///< back-mapped low-rank attention, same shape as the input
  VoxelEmbedding excited;   ///< ε + IN(ε ⊙ attended)
  FactorizationResult factorization;
};

/// Channel mixing by cfg.pre_mix followed by ReLU.
VoxelEmbedding xi_pre(const VoxelEmbedding& eps, const AttentionConfig& cfg);
/// Channel mixing by cfg.post_mix followed by ReLU.
VoxelEmbedding xi_post(const VoxelEmbedding& eps, const AttentionConfig& cfg);

/// Factorize-and-excite. The result is a constant with respect to any
/// differentiation of the surrounding network; the solver runs gradient-free.
///
/// Throws PreconditionError when the tsfm variant has no target or the grbf
/// variant lacks sigma/spacing, and ShapeMismatch when the target length is not τ.
AttentionOutput compute_attention(const VoxelEmbedding& eps, const AttentionConfig& cfg,
                                  std::optional<std::span<const double>> target = std::nullopt);

/// eps + instance_norm(eps ⊙ attended).
VoxelEmbedding excite(const VoxelEmbedding& eps, const VoxelEmbedding& attended);

/// Absolute cosine similarity of every temporal trace against a reference signal.
struct CsimMap {
  std::size_t kappa = 0;
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::vector<double> values;  // row-major (c, a, b)

  double at(std::size_t c, std::size_t a, std::size_t b) const {
    return values[(c * alpha + a) * beta + b];
  }
};

/// Zero-norm traces map to 0. Throws PreconditionError for an all-zero target
/// and ShapeMismatch when the target length is not τ.
CsimMap csim_map(const VoxelEmbedding& eps, std::span<const double> target);

}  // namespace physfac

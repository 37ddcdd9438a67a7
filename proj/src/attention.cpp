#include "physfac/attention.hpp"

#include <cmath>
#include <string>

#include "physfac/error.hpp"

namespace physfac {

std::string_view to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::fsam: return "fsam";
    case AttentionVariant::grbf: return "grbf";
    case AttentionVariant::tsfm: return "tsfm";
  }
  return "unknown";
}

AttentionVariant parse_variant(std::string_view name) {
  if (name == "fsam") return AttentionVariant::fsam;
  if (name == "grbf") return AttentionVariant::grbf;
  if (name == "tsfm") return AttentionVariant::tsfm;
  throw PreconditionError("unknown attention variant '" + std::string(name) +
                          "' (expected fsam, grbf or tsfm)");
}

namespace {

VoxelEmbedding mix_then_relu(const VoxelEmbedding& eps, const Eigen::MatrixXd& mix,
                             const char* which) {
  const auto kappa = static_cast<Eigen::Index>(eps.shape().kappa);
  if (mix.size() == 0) return relu(eps);
  if (mix.rows() != kappa || mix.cols() != kappa) {
    throw ShapeMismatch(std::string(which) + " weights must be " + std::to_string(kappa) + "x" +
                        std::to_string(kappa) + ", got " + std::to_string(mix.rows()) + "x" +
                        std::to_string(mix.cols()));
  }
  return relu(channel_mix(eps, mix));
}

}  // namespace

VoxelEmbedding xi_pre(const VoxelEmbedding& eps, const AttentionConfig& cfg) {
  return mix_then_relu(eps, cfg.pre_mix, "pre_mix");
}

VoxelEmbedding xi_post(const VoxelEmbedding& eps, const AttentionConfig& cfg) {
  return mix_then_relu(eps, cfg.post_mix, "post_mix");
}

AttentionOutput compute_attention(const VoxelEmbedding& eps, const AttentionConfig& cfg,
                                  std::optional<std::span<const double>> target) {
  if (cfg.iterations < 1) throw PreconditionError("attention iterations must be >= 1");
  const auto& shape = eps.shape();
  const auto m = static_cast<Eigen::Index>(shape.tau);

  const EmbeddingMatrix v = flatten_to_matrix(xi_pre(eps, cfg));

  FactorizationResult fr;
  switch (cfg.variant) {
    case AttentionVariant::fsam:
      // Narrow embeddings clamp the rank to min(M, N).
      fr = nmf_mu(v, std::min<Eigen::Index>(cfg.rank, std::min(v.rows(), v.cols())),
                  cfg.iterations, cfg.seed, cfg.epsilon);
      break;
    case AttentionVariant::grbf: {
      if (!cfg.grbf_sigma || !cfg.grbf_delta_t) {
        throw PreconditionError("grbf attention requires grbf_sigma and grbf_delta_t");
      }
      const GrbfBasis phi = grbf_basis(m, *cfg.grbf_sigma, *cfg.grbf_delta_t);
      fr = constrained_nmf_mu(v, phi.phi, cfg.rank, cfg.iterations, cfg.seed, cfg.epsilon);
      break;
    }
    case AttentionVariant::tsfm: {
      if (!target) throw PreconditionError("tsfm attention requires a target signal");
      const TargetConstraint tc = target_basis(*target, m);
      fr = constrained_nmf_mu(v, tc.as_matrix(), cfg.rank, cfg.iterations, cfg.seed, cfg.epsilon);
      break;
    }
  }

  AttentionOutput out;
  out.attended = xi_post(unflatten_to_voxel(fr.low_rank, shape), cfg);
  out.excited = excite(eps, out.attended);
  out.factorization = std::move(fr);
  return out;
}

VoxelEmbedding excite(const VoxelEmbedding& eps, const VoxelEmbedding& attended) {
  return add(eps, instance_norm(hadamard(eps, attended)));
}

CsimMap csim_map(const VoxelEmbedding& eps, std::span<const double> target) {
  const auto& s = eps.shape();
  if (target.size() != s.tau) {
    throw ShapeMismatch("CSIM target has " + std::to_string(target.size()) +
                        " samples, embedding has tau = " + std::to_string(s.tau));
  }
  double ynorm = 0.0;
  for (double y : target) ynorm += y * y;
  ynorm = std::sqrt(ynorm);
  if (ynorm == 0.0) throw PreconditionError("CSIM target is all zeros");

  const auto n = s.features();
  std::vector<double> dot(n, 0.0);
  std::vector<double> sq(n, 0.0);
  const auto data = eps.data();
  for (std::size_t t = 0; t < s.tau; ++t) {
    const double* row = data.data() + t * n;
    for (std::size_t j = 0; j < n; ++j) {
      dot[j] += row[j] * target[t];
      sq[j] += row[j] * row[j];
    }
  }

  CsimMap map{s.kappa, s.alpha, s.beta, std::vector<double>(n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    if (sq[j] > 0.0) map.values[j] = std::min(1.0, std::abs(dot[j]) / (std::sqrt(sq[j]) * ynorm));
  }
  return map;
}

}  // namespace physfac

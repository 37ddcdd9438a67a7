#include "doctest.h"
#include "helpers.hpp"

#include "physfac/attention.hpp"
#include "physfac/error.hpp"
#include "physfac/synth.hpp"

using namespace physfac;

namespace {

std::vector<double> pulse_target(std::size_t n) {
  return testutil::tone(25.0, 1.2, n);
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (auto v : {AttentionVariant::fsam, AttentionVariant::grbf, AttentionVariant::tsfm})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK_THROWS_AS(parse_variant("mhsa"), PreconditionError);
}

TEST_CASE("xi_pre is mix then relu") {
  AttentionConfig cfg;
  const auto pos = testutil::random_voxel(Shape4{4, 3, 2, 2}, 1, 0.1, 1.0);
  CHECK(xi_pre(pos, cfg) == pos);

  const auto mixed = testutil::random_voxel(Shape4{4, 3, 2, 2}, 2);
  const auto out = xi_pre(mixed, cfg);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == std::max(0.0, mixed.data()[i]));

  cfg.pre_mix = -Eigen::MatrixXd::Identity(3, 3);
  const auto zeroed = xi_pre(pos, cfg);
  for (double v : zeroed.data()) CHECK(v == 0.0);

  cfg.pre_mix = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(xi_pre(pos, cfg), ShapeMismatch);
}

TEST_CASE("compute_attention shape contract per variant") {
  const Shape4 s{20, 4, 3, 3};
  const auto eps = testutil::random_voxel(s, 3, 0.0, 1.0);
  const auto y = pulse_target(20);

  AttentionConfig cfg;
  const auto tsfm = compute_attention(eps, cfg, y);
  CHECK(tsfm.attended.shape() == s);
  CHECK(tsfm.excited.shape() == s);
  CHECK(tsfm.factorization.error_trace.size() == 4);
  for (double v : tsfm.attended.data()) CHECK(v >= 0.0);

  cfg.variant = AttentionVariant::fsam;
  const auto fsam = compute_attention(eps, cfg);
  CHECK(fsam.excited.shape() == s);

  cfg.variant = AttentionVariant::grbf;
  CHECK_THROWS_AS(compute_attention(eps, cfg), PreconditionError);
  cfg.grbf_sigma = 2.0;
  cfg.grbf_delta_t = 4;
  CHECK(compute_attention(eps, cfg).attended.shape() == s);
}

TEST_CASE("tsfm target preconditions") {
  const auto eps = testutil::random_voxel(Shape4{20, 4, 3, 3}, 4, 0.0, 1.0);
  AttentionConfig cfg;
  CHECK_THROWS_AS(compute_attention(eps, cfg), PreconditionError);
  CHECK_THROWS_AS(compute_attention(eps, cfg, pulse_target(19)), ShapeMismatch);
  CHECK_THROWS_AS(compute_attention(eps, cfg, std::vector<double>(20, 1.0)), PreconditionError);
}

TEST_CASE("tsfm low-rank columns are parallel to the target basis") {
  const Shape4 s{40, 2, 3, 3};
  const auto eps = testutil::random_voxel(s, 5, 0.0, 1.0);
  const auto y = pulse_target(40);
  const auto out = compute_attention(eps, AttentionConfig{}, y);
  const auto basis = target_basis(y, 40).basis;
  const auto& lr = out.factorization.low_rank;
  for (Eigen::Index j = 0; j < lr.cols(); ++j) {
    const double cs = lr.col(j).dot(basis) / (lr.col(j).norm() * basis.norm());
    CHECK(std::abs(cs - 1.0) < 1e-6);
  }
}

TEST_CASE("excite") {
  const Shape4 s{6, 2, 2, 2};
  const auto eps = testutil::random_voxel(s, 6);
  CHECK(excite(eps, VoxelEmbedding(s, 0.0)) == eps);
  CHECK(excite(eps, VoxelEmbedding(s, 1.0)) == add(eps, instance_norm(eps)));
  CHECK_THROWS_AS(excite(eps, VoxelEmbedding(Shape4{6, 2, 2, 1})), ShapeMismatch);
}

TEST_CASE("attention is deterministic") {
  const auto eps = testutil::random_voxel(Shape4{20, 4, 3, 3}, 7, 0.0, 1.0);
  const auto y = pulse_target(20);
  CHECK(compute_attention(eps, {}, y).excited == compute_attention(eps, {}, y).excited);
}

TEST_CASE("csim_map") {
  const std::size_t n = 100;
  const auto s = testutil::tone(25.0, 1.0, n);
  const auto c = testutil::tone(25.0, 1.0, n, 1.0, std::numbers::pi / 2.0);
  VoxelEmbedding e(Shape4{n, 1, 1, 3});
  for (std::size_t t = 0; t < n; ++t) {
    e(t, 0, 0, 0) = s[t];
    e(t, 0, 0, 1) = -s[t];
    e(t, 0, 0, 2) = c[t];
  }
  const auto m = csim_map(e, s);
  CHECK(m.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.at(0, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m.at(0, 0, 2)) < 1e-6);

  CHECK(csim_map(VoxelEmbedding(Shape4{n, 1, 1, 1}), s).values[0] == 0.0);
  CHECK_THROWS_AS(csim_map(e, std::vector<double>(n, 0.0)), PreconditionError);
  CHECK_THROWS_AS(csim_map(e, std::vector<double>(n - 1, 1.0)), ShapeMismatch);
}

TEST_CASE("tsfm raises planted-location selectivity on a single seed") {
  const Shape4 s{160, 4, 6, 6};
  const Waveform y = gen_pulse(25.0, 72.0, 160.0 / 25.0, 0.0, 0.0, 0);
  const auto pe = gen_planted_embedding(PlantSpec{s, quadrant_mask(s), y, 0.3, 11});
  const auto out = compute_attention(pe.embedding, AttentionConfig{}, y.view());
  const auto m = csim_map(out.excited, y.samples);
  double ps = 0, bs = 0;
  std::size_t pn = 0, bn = 0;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (pe.planted[i]) {
      ps += m.values[i];
      ++pn;
    } else {
      bs += m.values[i];
      ++bn;
    }
  }
  CHECK(ps / static_cast<double>(pn) - bs / static_cast<double>(bn) > 0.2);
}

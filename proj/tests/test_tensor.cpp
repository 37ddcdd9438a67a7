#include "doctest.h"
#include "helpers.hpp"

#include "physfac/error.hpp"
#include "physfac/tensor.hpp"

using namespace physfac;

TEST_CASE("flatten places (t,c,a,b) at row t, column c*ab + a*b + b") {
  const VoxelEmbedding e(Shape4{2, 1, 1, 2}, std::vector<double>{1, 2, 3, 4});
  const auto v = flatten_to_matrix(e);
  REQUIRE(v.rows() == 2);
  REQUIRE(v.cols() == 2);
  CHECK(v(0, 0) == 1);
  CHECK(v(0, 1) == 2);
  CHECK(v(1, 0) == 3);
  CHECK(v(1, 1) == 4);
  CHECK(unflatten_to_voxel(v, Shape4{2, 1, 1, 2}) == e);

  const auto r = testutil::random_voxel(Shape4{20, 4, 3, 3}, 3);
  const auto m = flatten_to_matrix(r);
  CHECK(m.rows() == 20);
  CHECK(m.cols() == 36);
  CHECK(m(7, 2 * 9 + 1 * 3 + 2) == r(7, 2, 1, 2));
}

TEST_CASE("unflatten rejects a product mismatch") {
  const Eigen::MatrixXd v = Eigen::MatrixXd::Zero(20, 36);
  CHECK_NOTHROW(unflatten_to_voxel(v, Shape4{20, 4, 3, 3}));
  CHECK_THROWS_AS(unflatten_to_voxel(v, Shape4{20, 4, 3, 4}), ShapeMismatch);
  CHECK_THROWS_AS(unflatten_to_voxel(v, Shape4{21, 4, 3, 3}), ShapeMismatch);
}

TEST_CASE("flatten round trip over random tensors") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Shape4 s{1 + seed % 7, 1 + seed % 3, 1 + seed % 4, 1 + seed % 5};
    const auto e = testutil::random_voxel(s, seed);
    CHECK(unflatten_to_voxel(flatten_to_matrix(e), s) == e);
  }
}

TEST_CASE("flatten is linear") {
  const Shape4 s{5, 2, 3, 2};
  const auto a = testutil::random_voxel(s, 1);
  const auto b = testutil::random_voxel(s, 2);
  VoxelEmbedding comb(s);
  for (std::size_t i = 0; i < comb.size(); ++i) comb.data()[i] = 2.5 * a.data()[i] - 0.5 * b.data()[i];
  const Eigen::MatrixXd expect = 2.5 * flatten_to_matrix(a) - 0.5 * flatten_to_matrix(b);
  CHECK((flatten_to_matrix(comb) - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("instance_norm") {
  SUBCASE("zeros stay zero") {
    const VoxelEmbedding z(Shape4{4, 2, 2, 2}, 0.0);
    CHECK(instance_norm(z) == z);
  }
  SUBCASE("constant maps to zero") {
    const auto out = instance_norm(VoxelEmbedding(Shape4{4, 2, 2, 2}, 5.0));
    for (double v : out.data()) CHECK(v == 0.0);
  }
  SUBCASE("per-channel mean 0 and variance 1") {
    const auto e = testutil::random_voxel(Shape4{30, 3, 4, 4}, 11, -5.0, 5.0);
    const auto out = instance_norm(e);
    const auto& s = out.shape();
    for (std::size_t c = 0; c < s.kappa; ++c) {
      double sum = 0, sq = 0;
      const double n = static_cast<double>(s.tau * s.plane());
      for (std::size_t t = 0; t < s.tau; ++t)
        for (std::size_t a = 0; a < s.alpha; ++a)
          for (std::size_t b = 0; b < s.beta; ++b) sum += out(t, c, a, b);
      const double mean = sum / n;
      for (std::size_t t = 0; t < s.tau; ++t)
        for (std::size_t a = 0; a < s.alpha; ++a)
          for (std::size_t b = 0; b < s.beta; ++b) sq += (out(t, c, a, b) - mean) * (out(t, c, a, b) - mean);
      CHECK(std::abs(mean) < 1e-6);
      CHECK(std::abs(sq / n - 1.0) < 1e-3);
    }
  }
  SUBCASE("invariant to per-channel shifts") {
    const auto e = testutil::random_voxel(Shape4{10, 2, 3, 3}, 4, -3.0, 3.0);
    VoxelEmbedding shifted = e;
    for (std::size_t t = 0; t < 10; ++t)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
          shifted(t, 0, a, b) += 7.0;
          shifted(t, 1, a, b) -= 2.0;
        }
    const auto x = instance_norm(e);
    const auto y = instance_norm(shifted);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x.data()[i] - y.data()[i]) < 1e-6);
  }
}

TEST_CASE("hadamard, add and relu") {
  const Shape4 s{2, 1, 1, 2};
  const auto a = testutil::random_voxel(s, 5);
  CHECK(hadamard(a, VoxelEmbedding(s, 1.0)) == a);
  CHECK(hadamard(a, VoxelEmbedding(s, 0.0)) == VoxelEmbedding(s, 0.0));
  CHECK_THROWS_AS(hadamard(a, VoxelEmbedding(Shape4{2, 1, 2, 1})), ShapeMismatch);
  CHECK_THROWS_AS(add(a, VoxelEmbedding(Shape4{2, 1, 2, 1})), ShapeMismatch);
  const auto r = relu(a);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(r.data()[i] == std::max(0.0, a.data()[i]));
}

TEST_CASE("channel_mix applies a per-voxel kappa x kappa matrix") {
  const auto e = testutil::random_voxel(Shape4{3, 2, 2, 2}, 9);
  Eigen::MatrixXd mix(2, 2);
  mix << 1.0, 2.0, -1.0, 0.5;
  const auto out = channel_mix(e, mix);
  CHECK(out(1, 0, 1, 0) == doctest::Approx(e(1, 0, 1, 0) + 2.0 * e(1, 1, 1, 0)));
  CHECK(out(1, 1, 1, 0) == doctest::Approx(-e(1, 0, 1, 0) + 0.5 * e(1, 1, 1, 0)));
  CHECK_THROWS_AS(channel_mix(e, Eigen::MatrixXd::Identity(3, 3)), ShapeMismatch);
}

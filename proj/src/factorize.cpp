#include "physfac/factorize.hpp"

#include <cmath>
#include <string>

#include "physfac/error.hpp"
#include "physfac/random.hpp"

namespace physfac {

namespace {

Matrix random_factor(Eigen::Index rows, Eigen::Index cols, SeededUniform& rng) {
  Matrix out(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.open_unit();
  }
  return out;
}

void require_non_negative(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw PreconditionError(std::string(what) + " contains non-finite entries");
  if (m.size() > 0 && m.minCoeff() < 0.0) {
    throw PreconditionError(std::string(what) + " must be non-negative");
  }
}

void require_common(Eigen::Index rank, int iterations) {
  if (rank < 1) throw PreconditionError("factorization rank must be >= 1");
  if (iterations < 1) throw PreconditionError("iteration count must be >= 1");
}

}  // namespace

FactorizationResult nmf_mu(const Matrix& v, Eigen::Index rank, int iterations,
                           std::uint64_t seed, double guard) {
  require_non_negative(v, "input matrix");
  require_common(rank, iterations);
  if (rank > std::min(v.rows(), v.cols())) {
    throw PreconditionError("rank " + std::to_string(rank) + " exceeds min(M, N) = " +
                            std::to_string(std::min(v.rows(), v.cols())));
  }

  SeededUniform rng(seed);
  Matrix w = random_factor(v.rows(), rank, rng);
  Matrix h = random_factor(rank, v.cols(), rng);

  FactorizationResult result;
  result.error_trace.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    const Matrix wtw = w.transpose() * w;
    h.array() *= (w.transpose() * v).array() / ((wtw * h).array() + guard);

    const Matrix hht = h * h.transpose();
    w.array() *= (v * h.transpose()).array() / ((w * hht).array() + guard);

    result.error_trace.push_back((v - w * h).norm());
  }

  result.low_rank = w * h;
  result.factors = FactorPair{std::move(w), std::move(h), rank};
  result.iterations = iterations;
  result.seed = seed;
  return result;
}

FactorizationResult constrained_nmf_mu(const Matrix& v, const Matrix& basis, Eigen::Index rank,
                                       int iterations, std::uint64_t seed, double guard) {
  require_non_negative(v, "input matrix");
  require_non_negative(basis, "constraint basis");
  require_common(rank, iterations);
  if (basis.rows() != v.rows()) {
    throw ShapeMismatch("constraint basis has " + std::to_string(basis.rows()) +
                        " rows, input has " + std::to_string(v.rows()));
  }
  if (basis.cols() < 1) throw ShapeMismatch("constraint basis has no columns");

  SeededUniform rng(seed);
  Matrix p = random_factor(basis.cols(), rank, rng);
  Matrix q = random_factor(rank, v.cols(), rng);

  // Substituting W = B·P into the Frobenius updates; B stays fixed.
  const Matrix btb = basis.transpose() * basis;
  const Matrix btv = basis.transpose() * v;

  FactorizationResult result;
  result.error_trace.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    const Matrix qqt = q * q.transpose();
    p.array() *= (btv * q.transpose()).array() / ((btb * p * qqt).array() + guard);

    const Matrix ptbtb_p = p.transpose() * btb * p;
    q.array() *= (p.transpose() * btv).array() / ((ptbtb_p * q).array() + guard);

    result.error_trace.push_back((v - basis * (p * q)).norm());
  }

  result.low_rank = basis * (p * q);
  result.factors = FactorPair{std::move(p), std::move(q), rank};
  result.iterations = iterations;
  result.seed = seed;
  return result;
}

GrbfBasis grbf_basis(Eigen::Index m, double sigma, int delta_t) {
  if (m < 2) throw PreconditionError("GRBF basis length must be >= 2");
  if (delta_t < 1) throw PreconditionError("GRBF spacing must be >= 1");
  if (!(sigma > 0.0)) throw PreconditionError("GRBF sigma must be positive");

  GrbfBasis g;
  g.sigma = sigma;
  g.delta_t = delta_t;
  g.k = (m - 1) / delta_t + 1;
  g.phi.resize(m, g.k);
  const double denom = 2.0 * sigma * sigma;
  for (Eigen::Index k = 0; k < g.k; ++k) {
    const double center = static_cast<double>(k * delta_t);
    for (Eigen::Index row = 0; row < m; ++row) {
      const double d = static_cast<double>(row) - center;
      g.phi(row, k) = std::exp(-(d * d) / denom);
    }
  }
  return g;
}

TargetConstraint target_basis(std::span<const double> y, Eigen::Index m, double floor) {
  if (static_cast<Eigen::Index>(y.size()) != m) {
    throw ShapeMismatch("target signal has " + std::to_string(y.size()) + " samples, expected " +
                        std::to_string(m));
  }
  if (!(floor > 0.0 && floor < 1.0)) throw PreconditionError("target floor must lie in (0, 1)");
  if (y.empty()) throw PreconditionError("target signal is empty");

  double lo = y[0];
  double hi = y[0];
  for (double s : y) {
    if (!std::isfinite(s)) throw PreconditionError("target signal contains non-finite samples");
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (!(hi > lo)) throw PreconditionError("target signal is constant");

  TargetConstraint tc;
  tc.floor = floor;
  tc.basis.resize(m);
  const double range = hi - lo;
  for (Eigen::Index i = 0; i < m; ++i) {
    tc.basis(i) = floor + (1.0 - floor) * (y[static_cast<std::size_t>(i)] - lo) / range;
  }
  return tc;
}

}  // namespace physfac

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace physfac {

using Matrix = Eigen::MatrixXd;

/// Guard added to every multiplicative-update denominator.
inline constexpr double kDenominatorGuard = 1e-6;
/// "Three to four" update sweeps is enough inside the attention module.
inline constexpr int kDefaultIterations = 4;
inline constexpr Eigen::Index kDefaultRank = 8;

/// Non-negative factors. For the unconstrained solver `w` is M×L; for the
/// basis-constrained solver it holds the K×L inner gains (P) so that the
/// reconstruction is B·w·h.
struct FactorPair {
  Matrix w;
  Matrix h;
  Eigen::Index rank = 0;
};

struct FactorizationResult {
  FactorPair factors;
  Matrix low_rank;
  /// ‖V − V̂‖_F after each full update sweep.
  std::vector<double> error_trace;
  int iterations = 0;
  std::uint64_t seed = 0;
};

/// Lee-Seung Frobenius updates: H first, then W.
///
/// Throws PreconditionError for negative entries, rank < 1, rank > min(M, N),
/// or iterations < 1.
FactorizationResult nmf_mu(const Matrix& v, Eigen::Index rank, int iterations,
                           std::uint64_t seed, double guard = kDenominatorGuard);

/// Minimizes ‖V − B·P·Q‖_F over non-negative P (K×L) and Q (L×N) with the
/// basis B (M×K) held fixed. Every column of the reconstruction lies in span(B).
///
/// Throws PreconditionError for negative entries in V or B, and ShapeMismatch
/// when B does not have M rows.
FactorizationResult constrained_nmf_mu(const Matrix& v, const Matrix& basis, Eigen::Index rank,
                                       int iterations, std::uint64_t seed,
                                       double guard = kDenominatorGuard);

/// Bank of K shifted Gaussians spaced delta_t samples apart.
struct GrbfBasis {
  Matrix phi;  // M×K
  double sigma = 0.0;
  int delta_t = 0;
  Eigen::Index k = 0;
};

GrbfBasis grbf_basis(Eigen::Index m, double sigma, int delta_t);

/// Target signal min-max normalized into [floor, 1], used as a single fixed basis column.
struct TargetConstraint {
  Eigen::VectorXd basis;
  double floor = 0.0;

  Matrix as_matrix() const { return basis; }
};

inline constexpr double kTargetFloor = 1e-3;

/// Throws ShapeMismatch when y.size() != m and PreconditionError when y is
/// constant or floor is outside (0, 1).
TargetConstraint target_basis(std::span<const double> y, Eigen::Index m,
                              double floor = kTargetFloor);

}  // namespace physfac

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace physfac {

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  ///< d loss / d pred
};

/// 1 − Pearson r, in [0, 2]. A zero-variance prediction (or reference) gives
/// loss 1 with a zero gradient instead of failing.
///
/// Throws ShapeMismatch on length mismatch and PreconditionError for fewer than 3 samples.
LossResult neg_pearson_loss(std::span<const double> pred, std::span<const double> gt);

/// Mean Smooth L1: 0.5·d² inside |d| < 1, |d| − 0.5 outside.
LossResult smooth_l1_loss(std::span<const double> pred, std::span<const double> gt);

enum class LossKind { neg_pearson, smooth_l1 };

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Indices skipped because the central difference straddles a kink.
  std::vector<std::size_t> excluded;
};

/// Compares central differences against the analytic gradient with relative
/// error |fd − g| / max(|g|, 1e-8). For smooth_l1, samples whose |diff| lies
/// within `step` of the knee are reported in `excluded`.
GradCheckReport fd_gradient_check(LossKind kind, std::span<const double> pred,
                                  std::span<const double> gt, double step);

}  // namespace physfac

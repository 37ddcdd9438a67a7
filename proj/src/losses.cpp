#include "physfac/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "physfac/error.hpp"

namespace physfac {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeMismatch(std::string(op) + ": prediction has " + std::to_string(a.size()) +
                        " samples, reference has " + std::to_string(b.size()));
  }
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

LossResult neg_pearson_loss(std::span<const double> pred, std::span<const double> gt) {
  require_same_length(pred, gt, "neg_pearson_loss");
  if (pred.size() < 3) throw PreconditionError("neg_pearson_loss needs at least 3 samples");
  const std::size_t n = pred.size();
  const double mx = mean_of(pred);
  const double my = mean_of(gt);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = pred[i] - mx;
    const double b = gt[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }

  LossResult out;
  out.grad.assign(n, 0.0);
  if (sxx == 0.0 || syy == 0.0) {
    out.loss = 1.0;
    return out;
  }
  const double nx = std::sqrt(sxx);
  const double ny = std::sqrt(syy);
  const double r = sxy / (nx * ny);
  out.loss = 1.0 - r;
  // dr/dx_i = b_i/(|a||b|) − r·a_i/|a|²; centering drops out since Σa = Σb = 0.
  for (std::size_t i = 0; i < n; ++i) {
    const double a = pred[i] - mx;
    const double b = gt[i] - my;
    out.grad[i] = -(b / (nx * ny) - r * a / sxx);
  }
  return out;
}

LossResult smooth_l1_loss(std::span<const double> pred, std::span<const double> gt) {
  require_same_length(pred, gt, "smooth_l1_loss");
  if (pred.empty()) throw PreconditionError("smooth_l1_loss needs at least 1 sample");
  const auto n = static_cast<double>(pred.size());
  LossResult out;
  out.grad.resize(pred.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    if (std::abs(d) < 1.0) {
      total += 0.5 * d * d;
      out.grad[i] = d / n;
    } else {
      total += std::abs(d) - 0.5;
      out.grad[i] = (d > 0.0 ? 1.0 : -1.0) / n;
    }
  }
  out.loss = total / n;
  return out;
}

GradCheckReport fd_gradient_check(LossKind kind, std::span<const double> pred,
                                  std::span<const double> gt, double step) {
  if (!(step > 0.0)) throw PreconditionError("finite-difference step must be positive");
  auto eval = [kind](std::span<const double> p, std::span<const double> g) {
    return kind == LossKind::neg_pearson ? neg_pearson_loss(p, g) : smooth_l1_loss(p, g);
  };

  const LossResult analytic = eval(pred, gt);
  std::vector<double> probe(pred.begin(), pred.end());
  GradCheckReport report;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    if (kind == LossKind::smooth_l1 && std::abs(std::abs(pred[i] - gt[i]) - 1.0) <= step) {
      report.excluded.push_back(i);
      continue;
    }
    const double x0 = probe[i];
    probe[i] = x0 + step;
    const double up = eval(probe, gt).loss;
    probe[i] = x0 - step;
    const double down = eval(probe, gt).loss;
    probe[i] = x0;

    const double fd = (up - down) / (2.0 * step);
    const double g = analytic.grad[i];
    const double rel = std::abs(fd - g) / std::max(std::abs(g), 1e-8);
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace physfac

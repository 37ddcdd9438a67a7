#include "physfac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "physfac/error.hpp"

namespace physfac {

std::string_view to_string(RateKind kind) { return kind == RateKind::hr ? "hr" : "rr"; }

RateKind parse_rate_kind(std::string_view name) {
  if (name == "hr") return RateKind::hr;
  if (name == "rr") return RateKind::rr;
  throw PreconditionError("unknown rate kind '" + std::string(name) + "' (expected hr or rr)");
}

void RateBand::validate() const {
  if (!(lo_hz > 0.0 && hi_hz > lo_hz)) {
    throw PreconditionError("rate band must satisfy 0 < lo < hi");
  }
}

namespace {

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

MetricStat mean_and_se(std::span<const double> terms) {
  double m = 0.0;
  for (double v : terms) m += v;
  m /= static_cast<double>(terms.size());
  return {m, sample_sd(terms) / std::sqrt(static_cast<double>(terms.size()))};
}

void require_band_below_nyquist(const RateBand& band, double fs) {
  band.validate();
  if (band.hi_hz > fs / 2.0) {
    throw PreconditionError("band upper edge " + std::to_string(band.hi_hz) +
                            " Hz exceeds Nyquist " + std::to_string(fs / 2.0) + " Hz");
  }
}

}  // namespace

Waveform concat_windows(std::span<const Waveform> segments, double window_s) {
  if (segments.empty()) throw PreconditionError("no segments to concatenate");
  if (!(window_s > 0.0)) throw PreconditionError("window length must be positive");
  const double fs = segments.front().fs;
  std::vector<double> all;
  for (const auto& s : segments) {
    if (s.fs != fs) throw PreconditionError("segments have mixed sampling rates");
    all.insert(all.end(), s.samples.begin(), s.samples.end());
  }
  const auto cap = static_cast<std::size_t>(std::floor(window_s * fs));
  if (all.size() > cap) all.resize(cap);
  return Waveform(std::move(all), fs);
}

double estimate_rate_fft(const Waveform& wave, const RateBand& band, int pad_factor) {
  if (wave.duration_s() < kMinRateDurationS) {
    throw PreconditionError("signal too short for rate estimation: " +
                            std::to_string(wave.duration_s()) + " s < 10 s");
  }
  require_band_below_nyquist(band, wave.fs);
  const PowerSpectrum ps = power_spectrum(wave.view(), wave.fs, pad_factor);

  std::size_t best = 0;
  double best_power = -1.0;
  for (std::size_t k = 0; k < ps.power.size(); ++k) {
    const double f = ps.frequency(k);
    if (f < band.lo_hz || f > band.hi_hz) continue;
    if (ps.power[k] > best_power) {
      best_power = ps.power[k];
      best = k;
    }
  }
  if (best_power < 0.0) throw PreconditionError("band contains no spectral bins");
  return 60.0 * ps.frequency(best);
}

double snr_db(const Waveform& pred, double ref_rate_per_min, const RateBand& band,
              int pad_factor) {
  require_band_below_nyquist(band, pred.fs);
  const double f0 = ref_rate_per_min / 60.0;
  if (f0 < band.lo_hz || f0 > band.hi_hz) {
    throw PreconditionError("SNR reference rate " + std::to_string(ref_rate_per_min) +
                            "/min lies outside the band");
  }
  const PowerSpectrum ps = power_spectrum(pred.view(), pred.fs, pad_factor);

  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t k = 0; k < ps.power.size(); ++k) {
    const double f = ps.frequency(k);
    const bool in_signal = std::abs(f - f0) <= kFundamentalHalfWidthHz ||
                           std::abs(f - 2.0 * f0) <= kHarmonicHalfWidthHz;
    if (in_signal) {
      signal += ps.power[k];
    } else if (f >= band.lo_hz && f <= band.hi_hz) {
      noise += ps.power[k];
    }
  }
  if (noise <= 0.0) return signal > 0.0 ? kSnrCeilingDb : kSnrFloorDb;
  if (signal <= 0.0) return kSnrFloorDb;
  return std::clamp(10.0 * std::log10(signal / noise), kSnrFloorDb, kSnrCeilingDb);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw ShapeMismatch("pearson: length mismatch");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] - mx;
    const double b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double macc(const Waveform& pred, const Waveform& gt, double max_lag_s) {
  if (pred.fs != gt.fs) throw ShapeMismatch("MACC inputs have different sampling rates");
  if (pred.size() != gt.size()) throw ShapeMismatch("MACC inputs have different lengths");
  if (!(max_lag_s >= 0.0)) throw PreconditionError("MACC lag budget must be >= 0");

  const auto n = static_cast<std::ptrdiff_t>(pred.size());
  const auto max_lag = std::min<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::floor(max_lag_s * pred.fs)), n);
  double best = 0.0;
  for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
    const std::ptrdiff_t len = n - std::abs(lag);
    if (len < 3) continue;
    // Positive lag: pred runs `lag` samples behind gt.
    const auto p0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(lag, 0));
    const auto g0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(-lag, 0));
    const auto r = pearson(pred.view().subspan(p0, static_cast<std::size_t>(len)),
                           gt.view().subspan(g0, static_cast<std::size_t>(len)));
    if (r) best = std::max(best, std::abs(*r));
  }
  return best;
}

ErrorMetrics error_metrics(std::span<const double> preds, std::span<const double> gts,
                           CorrPolicy policy) {
  if (preds.empty()) throw PreconditionError("MAE: no rate estimates to score");
  if (preds.size() != gts.size()) {
    throw ShapeMismatch("MAE: " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(gts.size()) + " references");
  }
  const std::size_t n = preds.size();
  std::vector<double> abs_err(n), sq_err(n), pct_err(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = preds[i] - gts[i];
    abs_err[i] = std::abs(e);
    sq_err[i] = e * e;
    if (gts[i] == 0.0) throw PreconditionError("MAPE: reference rate is zero");
    pct_err[i] = 100.0 * std::abs(e) / std::abs(gts[i]);
  }

  ErrorMetrics out;
  out.n = n;
  out.mae = mean_and_se(abs_err);
  const MetricStat mse = mean_and_se(sq_err);
  // SE of the squared errors is mapped back to rate units by a square root.
  out.rmse = {std::sqrt(mse.avg), std::sqrt(sample_sd(sq_err) / std::sqrt(static_cast<double>(n)))};
  out.mape = mean_and_se(pct_err);

  if (n < 3) {
    if (policy == CorrPolicy::require) throw PreconditionError("Corr: needs at least 3 items");
    return out;
  }
  const auto r = pearson(preds, gts);
  if (!r) {
    if (policy == CorrPolicy::require) throw PreconditionError("Corr: constant series");
    return out;
  }
  const double se = std::sqrt(std::max(0.0, 1.0 - *r * *r) / static_cast<double>(n - 2));
  out.corr = MetricStat{*r, se};
  return out;
}

MetricsReport evaluate_recording(const Waveform& pred, const Waveform& gt, const RateBand& band,
                                 const EvaluationOptions& options) {
  if (pred.fs != gt.fs) throw ShapeMismatch("prediction and reference sampling rates differ");
  if (!(options.window_s > 0.0)) throw PreconditionError("window length must be positive");
  const double fs = gt.fs;
  const std::size_t total = std::min(pred.size(), gt.size());
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(options.window_s * fs)));
  const auto min_len = static_cast<std::size_t>(std::ceil(kMinRateDurationS * fs));
  const double max_lag = options.max_lag_s.value_or(options.window_s / 2.0);

  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t start = 0; start < total; start += window) {
    const std::size_t len = std::min(window, total - start);
    if (len >= min_len || (spans.empty() && start + len == total)) spans.emplace_back(start, len);
  }

  MetricsReport report;
  std::vector<double> snrs, maccs;
  for (const auto& [start, len] : spans) {
    const auto slice = [&](const Waveform& w) {
      return Waveform(std::vector<double>(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                          w.samples.begin() + static_cast<std::ptrdiff_t>(start + len)),
                      fs);
    };
    const Waveform p = slice(pred);
    const Waveform g = slice(gt);
    const double gt_rate = estimate_rate_fft(g, band, options.pad_factor);
    report.pred_rates.push_back(estimate_rate_fft(p, band, options.pad_factor));
    report.gt_rates.push_back(gt_rate);
    snrs.push_back(snr_db(p, gt_rate, band, options.pad_factor));
    maccs.push_back(macc(p, g, max_lag));
  }

  report.errors = error_metrics(report.pred_rates, report.gt_rates, CorrPolicy::optional);
  report.snr = mean_and_se(snrs);
  report.macc = mean_and_se(maccs);
  report.n = spans.size();
  return report;
}

}  // namespace physfac

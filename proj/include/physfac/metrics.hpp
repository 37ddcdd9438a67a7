#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "physfac/spectrum.hpp"
#include "physfac/waveform.hpp"

namespace physfac {

enum class RateKind { hr, rr };

std::string_view to_string(RateKind kind);
RateKind parse_rate_kind(std::string_view name);

/// Physiological frequency band in Hz.
struct RateBand {
  double lo_hz = 0.6;
  double hi_hz = 3.3;
  RateKind kind = RateKind::hr;

  /// [0.6, 3.3] Hz, 36-198 beats/min.
  static RateBand heart() { return {0.6, 3.3, RateKind::hr}; }
  /// [0.1, 0.5] Hz, 6-30 breaths/min.
  static RateBand respiration() { return {0.1, 0.5, RateKind::rr}; }
  static RateBand for_kind(RateKind kind) {
    return kind == RateKind::hr ? heart() : respiration();
  }

  /// Throws PreconditionError unless 0 < lo < hi.
  void validate() const;
};

inline constexpr double kWindowSeconds = 30.0;
inline constexpr double kMinRateDurationS = 10.0;

/// Concatenates segments and truncates to min(window_s·fs, total) samples.
/// Throws PreconditionError when segments disagree on fs or the list is empty.
Waveform concat_windows(std::span<const Waveform> segments, double window_s = kWindowSeconds);

/// Peak of the zero-padded magnitude spectrum inside the band, in per-minute units.
///
/// Throws PreconditionError when the signal is shorter than 10 s or the band
/// reaches past Nyquist.
double estimate_rate_fft(const Waveform& wave, const RateBand& band,
                         int pad_factor = kDefaultPadFactor);

/// Harmonic-window SNR in dB: power within ±0.1 Hz of the fundamental and
/// ±0.2 Hz of its second harmonic over the remaining in-band power, clipped
/// to [−20, 40].
///
/// Throws PreconditionError when ref_rate lies outside the band.
double snr_db(const Waveform& pred, double ref_rate_per_min, const RateBand& band,
              int pad_factor = kDefaultPadFactor);

inline constexpr double kSnrFloorDb = -20.0;
inline constexpr double kSnrCeilingDb = 40.0;
inline constexpr double kFundamentalHalfWidthHz = 0.1;
inline constexpr double kHarmonicHalfWidthHz = 0.2;

/// Pearson r. Returns nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Max |Pearson r| over integer lags |ℓ| ≤ max_lag_s·fs. Overlaps shorter than
/// 3 samples are skipped. Throws ShapeMismatch on length or fs mismatch.
double macc(const Waveform& pred, const Waveform& gt, double max_lag_s);

struct MetricStat {
  double avg = 0.0;
  double se = 0.0;
};

enum class CorrPolicy {
  require,   ///< fewer than 3 items or a constant series is an error
  optional,  ///< leave Corr empty instead
};

struct ErrorMetrics {
  MetricStat mae;
  MetricStat rmse;
  MetricStat mape;  ///< percent
  std::optional<MetricStat> corr;
  std::size_t n = 0;
};

/// MAE/RMSE/MAPE/Corr over paired rate estimates. Errors name the failing metric.
ErrorMetrics error_metrics(std::span<const double> preds, std::span<const double> gts,
                           CorrPolicy policy = CorrPolicy::require);

struct MetricsReport {
  ErrorMetrics errors;
  MetricStat snr;
  MetricStat macc;
  std::vector<double> pred_rates;
  std::vector<double> gt_rates;
  std::size_t n = 0;  ///< evaluation windows
};

struct EvaluationOptions {
  double window_s = kWindowSeconds;
  int pad_factor = kDefaultPadFactor;
  /// Defaults to half the window duration.
  std::optional<double> max_lag_s;
};

/// Splits a recording into non-overlapping windows and scores each one. A
/// trailing remainder shorter than 10 s is dropped unless it is the only window.
MetricsReport evaluate_recording(const Waveform& pred, const Waveform& gt, const RateBand& band,
                                 const EvaluationOptions& options = {});

}  // namespace physfac

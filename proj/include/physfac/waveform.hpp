#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace physfac {

/// Uniformly sampled physiological signal.
struct Waveform {
  std::vector<double> samples;
  double fs = 0.0;

  Waveform() = default;
  /// Throws PreconditionError unless fs > 0 and samples is non-empty.
  Waveform(std::vector<double> samples, double fs);

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / fs; }
  std::span<const double> view() const { return samples; }

  bool operator==(const Waveform&) const = default;
};

}  // namespace physfac

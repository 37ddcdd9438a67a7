#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace physfac {

inline constexpr int kDefaultPadFactor = 8;

/// One-sided power spectrum |X_k|², k = 0..N/2, of a mean-removed, zero-padded signal.
struct PowerSpectrum {
  std::vector<double> power;
  double bin_hz = 0.0;
  std::size_t padded_length = 0;

  double frequency(std::size_t k) const { return static_cast<double>(k) * bin_hz; }
};

/// pad_factor × the next power of two ≥ n.
std::size_t padded_fft_length(std::size_t n, int pad_factor = kDefaultPadFactor);

PowerSpectrum power_spectrum(std::span<const double> x, double fs,
                             int pad_factor = kDefaultPadFactor);

/// Zeroes every unpadded DFT bin outside [lo_hz, hi_hz] and transforms back.
std::vector<double> spectral_bandpass(std::span<const double> x, double fs, double lo_hz,
                                      double hi_hz);

}  // namespace physfac

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "physfac/tensor.hpp"

namespace testutil {

inline Eigen::MatrixXd random_nonneg(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(gen);
  return m;
}

inline physfac::VoxelEmbedding random_voxel(physfac::Shape4 s, std::uint64_t seed, double lo = -1.0,
                                            double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  physfac::VoxelEmbedding e(s);
  for (double& v : e.data()) v = u(gen);
  return e;
}

inline std::vector<double> tone(double fs, double hz, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs + phase);
  return x;
}

// Naive O(N^2) one-sided power spectrum |X_k|^2 of the mean-removed, zero-padded signal.
inline std::vector<double> naive_power(const std::vector<double>& x, std::size_t padded) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> out(padded / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * i % padded) /
                         static_cast<double>(padded);
      acc += (x[i] - mean) * std::polar(1.0, ang);
    }
    out[k] = std::norm(acc);
  }
  return out;
}

// Naive SNR: direct summation over bins of the oracle spectrum.
inline double naive_snr_db(const std::vector<double>& x, double fs, double ref_bpm, double lo_hz,
                           double hi_hz, std::size_t padded) {
  const auto p = naive_power(x, padded);
  const double bin = fs / static_cast<double>(padded);
  const double f0 = ref_bpm / 60.0;
  double sig = 0.0, noise = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double f = static_cast<double>(k) * bin;
    const bool in_sig = std::abs(f - f0) <= 0.1 || std::abs(f - 2.0 * f0) <= 0.2;
    const bool in_band = f >= lo_hz && f <= hi_hz;
    if (in_sig) sig += p[k];
    else if (in_band) noise += p[k];
  }
  if (noise <= 0.0) return sig > 0.0 ? 40.0 : -20.0;
  if (sig <= 0.0) return -20.0;
  return std::clamp(10.0 * std::log10(sig / noise), -20.0, 40.0);
}

}  // namespace testutil

#include "physfac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "physfac/error.hpp"

namespace physfac {

namespace {

Waveform tone(double fs, double rate_per_min, double duration_s, double harmonic_ratio,
              double noise_sigma, std::uint64_t seed) {
  if (!(fs > 0.0)) throw PreconditionError("sampling rate must be positive");
  if (!(duration_s >= 1.0)) throw PreconditionError("duration must be at least 1 s");
  if (!(noise_sigma >= 0.0)) throw PreconditionError("noise sigma must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(fs * duration_s));
  const double f = rate_per_min / 60.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double phase = 2.0 * std::numbers::pi * f * t;
    x[i] = std::sin(phase) + harmonic_ratio * std::sin(2.0 * phase);
    if (noise_sigma > 0.0) x[i] += noise_sigma * noise(rng);
  }
  return Waveform(std::move(x), fs);
}

}  // namespace

Waveform gen_pulse(double fs, double rate_bpm, double duration_s, double harmonic_ratio,
                   double noise_sigma, std::uint64_t seed) {
  if (!(rate_bpm >= 30.0 && rate_bpm <= 220.0)) {
    throw PreconditionError("pulse rate " + std::to_string(rate_bpm) + " outside [30, 220] BPM");
  }
  return tone(fs, rate_bpm, duration_s, harmonic_ratio, noise_sigma, seed);
}

Waveform gen_respiration(double fs, double rate_bpm, double duration_s, double harmonic_ratio,
                         double noise_sigma, std::uint64_t seed) {
  if (!(rate_bpm >= 4.0 && rate_bpm <= 40.0)) {
    throw PreconditionError("respiration rate " + std::to_string(rate_bpm) +
                            " outside [4, 40] breaths/min");
  }
  return tone(fs, rate_bpm, duration_s, harmonic_ratio, noise_sigma, seed);
}

PlantedEmbedding gen_planted_embedding(const PlantSpec& spec) {
  const Shape4& s = spec.shape;
  if (spec.mask.empty()) throw PreconditionError("planting mask is empty");
  if (!(spec.noise_sigma >= 0.0)) throw PreconditionError("noise sigma must be >= 0");
  if (spec.signal.size() != s.tau) {
    throw ShapeMismatch("planted signal has " + std::to_string(spec.signal.size()) +
                        " samples, embedding has tau = " + std::to_string(s.tau));
  }

  PlantedEmbedding out{VoxelEmbedding(s), std::vector<bool>(s.features(), false)};
  for (const auto& [c, a, b] : spec.mask) {
    if (c >= s.kappa || a >= s.alpha || b >= s.beta) {
      throw PreconditionError("planting coordinate outside shape " + s.str());
    }
    out.planted[(c * s.alpha + a) * s.beta + b] = true;
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto data = out.embedding.data();
  const auto n = s.features();
  for (std::size_t t = 0; t < s.tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = spec.noise_sigma * noise(rng);
      if (out.planted[j]) v += spec.signal.samples[t];
      data[t * n + j] = v;
    }
  }
  const double lo = *std::min_element(data.begin(), data.end());
  for (double& v : data) v -= lo;
  return out;
}

std::vector<Coord3> quadrant_mask(const Shape4& shape, double fraction) {
  const auto ea = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(shape.alpha * fraction)));
  const auto eb = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(shape.beta * fraction)));
  std::vector<Coord3> mask;
  for (std::size_t c = 0; c < shape.kappa; ++c) {
    for (std::size_t a = 0; a < std::min(ea, shape.alpha); ++a) {
      for (std::size_t b = 0; b < std::min(eb, shape.beta); ++b) mask.push_back({c, a, b});
    }
  }
  return mask;
}

VideoClip gen_video_clip(std::size_t frames, std::size_t resolution, std::size_t channels,
                         double fps, const Waveform& pulse, const Waveform& respiration,
                         double noise_sigma, std::uint64_t seed) {
  if (pulse.size() < frames || respiration.size() < frames) {
    throw ShapeMismatch("driving signals are shorter than the requested clip");
  }
  VoxelEmbedding px(Shape4{frames, channels, resolution, resolution});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double centre = (static_cast<double>(resolution) - 1.0) / 2.0;
  const double radius = static_cast<double>(resolution) / 3.0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      // Thermal-like channel (the 4th, or the only one) carries respiration; colour carries pulse.
      const bool thermal = channels == 1 || c == 3;
      const double drive = thermal ? respiration.samples[t] : pulse.samples[t];
      for (std::size_t a = 0; a < resolution; ++a) {
        for (std::size_t b = 0; b < resolution; ++b) {
          const double da = static_cast<double>(a) - centre;
          const double db = static_cast<double>(b) - centre;
          const double weight = std::exp(-(da * da + db * db) / (2.0 * radius * radius));
          double v = 0.5 + 0.05 * weight * drive;
          if (noise_sigma > 0.0) v += noise_sigma * noise(rng);
          px(t, c, a, b) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return VideoClip(std::move(px), fps);
}

}  // namespace physfac

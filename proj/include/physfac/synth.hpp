#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "physfac/network.hpp"
#include "physfac/tensor.hpp"
#include "physfac/waveform.hpp"

namespace physfac {

/// Unit-amplitude sinusoid at rate_bpm plus harmonic_ratio × its second
/// harmonic plus seeded Gaussian noise. Rate must lie in [30, 220] per minute.
Waveform gen_pulse(double fs, double rate_bpm, double duration_s, double harmonic_ratio,
                   double noise_sigma, std::uint64_t seed);

/// Same generator validated against the respiratory range [4, 40] per minute.
Waveform gen_respiration(double fs, double rate_bpm, double duration_s, double harmonic_ratio,
                         double noise_sigma, std::uint64_t seed);

/// (c, a, b) location of a planted trace.
using Coord3 = std::array<std::size_t, 3>;

struct PlantSpec {
  Shape4 shape;
  std::vector<Coord3> mask;
  Waveform signal;  // τ samples
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct PlantedEmbedding {
  VoxelEmbedding embedding;
  /// One flag per (c, a, b) feature column, row-major.
  std::vector<bool> planted;
};

/// Planted traces carry signal + noise, the rest pure noise; the whole tensor is
/// then shifted by its global minimum so every entry is ≥ 0.
///
/// Throws PreconditionError for an empty or out-of-range mask or negative noise,
/// and ShapeMismatch when the signal length is not τ.
PlantedEmbedding gen_planted_embedding(const PlantSpec& spec);

/// Mask covering the top-left `fraction` of every channel's spatial plane.
std::vector<Coord3> quadrant_mask(const Shape4& shape, double fraction = 0.5);

/// Toy face video: every pixel carries a small pulse-modulated intensity
/// (strongest in a central "skin" region), a slow respiratory drift, and noise.
VideoClip gen_video_clip(std::size_t frames, std::size_t resolution, std::size_t channels,
                         double fps, const Waveform& pulse, const Waveform& respiration,
                         double noise_sigma, std::uint64_t seed);

}  // namespace physfac

#pragma once

#include <cstdint>
#include <random>

namespace physfac {

/// Seeded generator with a portable bit-to-real mapping, so factor
/// initializations are identical across standard library implementations.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1].
  double open_unit() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double between(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace physfac

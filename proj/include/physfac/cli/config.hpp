#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "physfac/attention.hpp"
#include "physfac/metrics.hpp"
#include "physfac/network.hpp"

namespace physfac::cli {

/// Environment variable naming a config file when --config is absent.
inline constexpr const char* kConfigEnvVar = "PHYSFAC_CONFIG";

struct AttentionSection {
  std::string variant = "tsfm";
  long rank = kDefaultRank;
  int iterations = kDefaultIterations;
  double epsilon = kDenominatorGuard;
  double grbf_sigma = 2.0;
  int grbf_delta_t = 4;
  bool omit = false;

  bool operator==(const AttentionSection&) const = default;
};

struct ModelSection {
  std::size_t resolution = 72;
  std::size_t channels = 3;
  std::string routing = "shared";
  std::vector<std::size_t> bvp_channels{8, 12, 12, 8};
  std::vector<std::size_t> bvp_temporal_kernels{3, 3, 3, 3};
  std::vector<std::size_t> bvp_spatial_kernels{3, 3, 3, 3};
  std::vector<std::size_t> bvp_spatial_strides{2, 2, 2, 2};
  std::vector<std::size_t> rsp_channels{8, 12, 12, 8};
  std::vector<std::size_t> rsp_temporal_kernels{3, 3, 3, 3};
  std::vector<std::size_t> rsp_spatial_kernels{3, 3, 3, 3};
  std::vector<std::size_t> rsp_temporal_strides{2, 2, 1, 1};
  std::vector<std::size_t> rsp_spatial_strides{2, 2, 2, 2};
  std::size_t upsample_factor = 4;
  std::optional<std::size_t> attention_index;  // "auto" = penultimate block
  std::size_t frames = 160;
  double fps = 30.0;

  bool operator==(const ModelSection&) const = default;
};

struct MetricsSection {
  std::vector<double> hr_band{0.6, 3.3};
  std::vector<double> rr_band{0.1, 0.5};
  double window_s = kWindowSeconds;
  int pad_factor = kDefaultPadFactor;
  double max_lag_s = kWindowSeconds / 2.0;
  bool bandpass = false;

  bool operator==(const MetricsSection&) const = default;
};

/// Sectioned run configuration: [attention], [model], [metrics], [rng].
struct RunConfig {
  AttentionSection attention;
  ModelSection model;
  MetricsSection metrics;
  std::uint64_t seed = 0;

  /// Parses INI text. Unknown sections or keys and malformed values throw ParseError.
  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::string& path);

  /// Fully commented INI listing every key with its current value.
  std::string dump() const;

  AttentionConfig attention_config() const;
  MiniModelConfig model_config() const;
  RateBand band(RateKind kind) const;
  EvaluationOptions evaluation_options() const;

  bool operator==(const RunConfig&) const = default;
};

}  // namespace physfac::cli

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "physfac/cli/config.hpp"
#include "physfac/cli/report.hpp"

namespace physfac::cli {

/// Exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitDomainError = 1,
  kExitIoError = 2,
};

/// Runs the driver on argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct BenchReport {
  std::vector<double> samples_ms;
  double min_ms = 0.0;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  std::size_t parameter_count = 0;
  std::size_t frames = 0;
  std::size_t resolution = 0;
};

/// Times forward_multitask on a synthetic clip: 3 untimed warm-up passes, then
/// `repeats` timed passes. Throws PreconditionError when repeats is 0.
BenchReport bench_forward(const RunConfig& cfg, std::size_t repeats);

Json bench_json(const BenchReport& report);

}  // namespace physfac::cli

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace physfac::cli {

/// One sample per line, or (time, value) pairs. An optional header line is skipped.
struct SignalCsv {
  std::vector<double> values;
  /// Derived from the time column of two-column files.
  std::optional<double> inferred_fs;
};

/// Throws ParseError naming the offending line.
SignalCsv read_signal_csv(std::istream& in);
SignalCsv read_signal_csv_file(const std::string& path);

/// Rectangular numeric table with an optional header.
Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);

void write_signal_csv(std::ostream& out, std::span<const double> values);
void write_columns_csv(std::ostream& out, const std::vector<std::string>& header,
                       const std::vector<std::span<const double>>& columns);
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace physfac::cli

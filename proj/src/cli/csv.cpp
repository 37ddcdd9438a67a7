#include "physfac/cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "physfac/error.hpp"

namespace physfac::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_field(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Rows of numeric fields; a non-numeric first data line is treated as a header.
std::vector<std::vector<double>> read_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_field(fields[i], row[i]);
    if (!numeric) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      throw ParseError("non-numeric value in '" + trim(line) + "'", line_no);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("expected " + std::to_string(rows.front().size()) + " columns, found " +
                           std::to_string(row.size()),
                       line_no);
    }
    seen_content = true;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no numeric rows");
  return rows;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

}  // namespace

SignalCsv read_signal_csv(std::istream& in) {
  const auto rows = read_rows(in);
  SignalCsv out;
  const std::size_t cols = rows.front().size();
  if (cols == 1) {
    for (const auto& r : rows) out.values.push_back(r[0]);
    return out;
  }
  if (cols != 2) throw ParseError("signal files have one or two columns, found " + std::to_string(cols));
  for (const auto& r : rows) out.values.push_back(r[1]);
  if (rows.size() >= 2) {
    const double span = rows.back()[0] - rows.front()[0];
    if (!(span > 0.0)) throw ParseError("time column is not increasing");
    double fs = static_cast<double>(rows.size() - 1) / span;
    // Printed timestamps carry rounding; snap to a whole rate when that close.
    if (std::abs(fs - std::round(fs)) < 1e-6 * fs) fs = std::round(fs);
    out.inferred_fs = fs;
  }
  return out;
}

SignalCsv read_signal_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  try {
    return read_signal_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  const auto rows = read_rows(in);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  try {
    return read_matrix_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_signal_csv(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    put(out, v);
    out << '\n';
  }
}

void write_columns_csv(std::ostream& out, const std::vector<std::string>& header,
                       const std::vector<std::span<const double>>& columns) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::size_t rows = 0;
  for (const auto& c : columns) rows = std::max(rows, c.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ',';
      if (r < columns[i].size()) put(out, columns[i][r]);
    }
    out << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      put(out, m(i, j));
    }
    out << '\n';
  }
}

}  // namespace physfac::cli

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace shrinksel::csv {

/// A header line plus a dense block of numeric cells.
struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x header.size()

  /// Column position of `name`, or -1.
  [[nodiscard]] int find(std::string_view name) const;
};

std::vector<std::string> split_line(std::string_view line);

/// Parses a comma-separated numeric file. Errors name the 1-based file line.
NumericTable read_numeric(const std::filesystem::path& path);
NumericTable parse_numeric(std::string_view text, const std::string& source = "<memory>");

/// Strict full-cell parse; rejects empty cells, trailing junk and non-finite values.
bool parse_real(std::string_view cell, double& out);

}  // namespace shrinksel::csv

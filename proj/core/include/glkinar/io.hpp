#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "glkinar/inar.hpp"

namespace glkinar {

/// Parses a count series from CSV text. Accepted layouts:
///   value            one integer per row
///   date,value       labels kept verbatim, must be strictly increasing
/// A `value` column is located by header name, so extra columns are tolerated
/// when `column` names one explicitly.
/// Throws ParseError (with the 1-based line) for bad rows, DomainError when empty.
CountSeries parse_count_series(std::istream& in, std::string_view column = "value");
CountSeries read_count_series(const std::filesystem::path& path, std::string_view column = "value");

/// Writes `value` CSV, or `date,value` when the series carries labels.
void write_count_series(std::ostream& out, const CountSeries& series);

struct ChainTable {
  std::vector<std::string> names;
  Eigen::MatrixXd draws;  ///< rows = draws
};

/// One row per draw, header = parameter names; doubles in shortest round-trip form.
void write_chain_csv(std::ostream& out, const std::vector<std::string>& names,
                     const Eigen::MatrixXd& draws);
ChainTable parse_chain_csv(std::istream& in);
ChainTable read_chain_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace glkinar

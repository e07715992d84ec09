#include "glkinar/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "glkinar/error.hpp"

namespace glkinar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string strip_bom(std::string line) {
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  return line;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

CountSeries parse_count_series(std::istream& in, std::string_view column) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DomainError("input is empty");
  ++line_no;
  line = strip_bom(line);
  const auto header = split(line);
  std::size_t value_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) value_col = i;
  }
  if (value_col == header.size()) {
    throw ParseError(line_no, "header has no '" + std::string(column) + "' column");
  }
  const bool dated = header.size() >= 2 && header[0] == "date" && value_col != 0;

  std::vector<std::int64_t> values;
  std::vector<std::string> dates;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    }
    const std::string_view cell = cells[value_col];
    if (cell.empty()) throw ParseError(line_no, "missing value");
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw ParseError(line_no, "'" + std::string(cell) + "' is not an integer");
    }
    if (v < 0) throw ParseError(line_no, "negative count " + std::to_string(v));
    if (dated) {
      if (cells[0].empty()) throw ParseError(line_no, "missing date");
      if (!dates.empty() && !(dates.back() < cells[0])) {
        throw ParseError(line_no, "date '" + std::string(cells[0]) + "' is not after '" +
                                      dates.back() + "'");
      }
      dates.emplace_back(cells[0]);
    }
    values.push_back(v);
  }
  if (values.empty()) throw DomainError("input has a header but no observations");
  if (dated) return CountSeries(std::move(values), std::move(dates));
  return CountSeries(std::move(values));
}

CountSeries read_count_series(const std::filesystem::path& path, std::string_view column) {
  auto in = open(path);
  return parse_count_series(in, column);
}

void write_count_series(std::ostream& out, const CountSeries& series) {
  const auto& dates = series.timestamps();
  out << (dates ? "date,value\n" : "value\n");
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (dates) out << (*dates)[t] << ',';
    out << series.values()[t] << '\n';
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw NumericalError("cannot format number");
  return std::string(buf, ptr);
}

void write_chain_csv(std::ostream& out, const std::vector<std::string>& names,
                     const Eigen::MatrixXd& draws) {
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    for (Eigen::Index c = 0; c < draws.cols(); ++c) {
      out << (c ? "," : "") << format_double(draws(r, c));
    }
    out << '\n';
  }
}

ChainTable parse_chain_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw DomainError("chain file is empty");
  ChainTable table;
  line = strip_bom(line);
  for (auto cell : split(line)) {
    if (cell.empty()) throw ParseError(line_no, "empty column name");
    table.names.emplace_back(cell);
  }
  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.names.size()) {
      throw ParseError(line_no, "expected " + std::to_string(table.names.size()) +
                                    " cells, found " + std::to_string(cells.size()));
    }
    for (auto cell : cells) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(line_no, "'" + std::string(cell) + "' is not a finite number");
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DomainError("chain file has no draws");
  table.draws = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(table.names.size()));
  return table;
}

ChainTable read_chain_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_chain_csv(in);
}

}  // namespace glkinar

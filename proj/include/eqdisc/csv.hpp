#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eqdisc/core.hpp"

namespace eqdisc {

namespace detail {

[[nodiscard]] inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[nodiscard]] inline double parse_double(std::string_view cell, std::size_t line_no,
                                         std::size_t column) {
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw IoError("csv: line " + std::to_string(line_no) + ", column " + std::to_string(column + 1) +
                  ": non-numeric cell '" + std::string(cell) + "'");
  return value;
}

[[nodiscard]] inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Load a dataset from `path_id,t,x1,...,xp` rows sorted by (path_id, t).
/// Every path must share one strictly increasing time grid.
[[nodiscard]] inline Dataset load_csv(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw IoError("csv: cannot open '" + filename + "' for reading");

  std::string line;
  std::size_t line_no = 0;

  // Header: path_id,t,x1,...,xp
  if (!std::getline(in, line)) throw IoError("csv: '" + filename + "' is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "path_id" || header[1] != "t")
    throw IoError("csv: line 1: expected header 'path_id,t,x1,...,xp', got '" + line + "'");
  const std::size_t p = header.size() - 2;
  for (std::size_t j = 0; j < p; ++j)
    if (header[j + 2] != "x" + std::to_string(j + 1))
      throw IoError("csv: line 1: state column " + std::to_string(j + 3) + " must be named 'x" +
                    std::to_string(j + 1) + "'");

  struct RawPath {
    std::vector<double> times;
    std::vector<double> values;  // row-major: per time point, p values
    std::size_t first_line = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, RawPath> raw;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != p + 2)
      throw IoError("csv: line " + std::to_string(line_no) + ": expected " +
                    std::to_string(p + 2) + " cells, got " + std::to_string(cells.size()));
    std::string id(cells[0]);
    if (id.empty()) throw IoError("csv: line " + std::to_string(line_no) + ": empty path_id");
    auto [it, inserted] = raw.try_emplace(id);
    if (inserted) {
      order.push_back(id);
      it->second.first_line = line_no;
    }
    const double t = detail::parse_double(cells[1], line_no, 1);
    if (!it->second.times.empty() && !(t > it->second.times.back()))
      throw IoError("csv: line " + std::to_string(line_no) + ": times of path '" + id +
                    "' must be strictly increasing");
    it->second.times.push_back(t);
    for (std::size_t j = 0; j < p; ++j)
      it->second.values.push_back(detail::parse_double(cells[j + 2], line_no, j + 2));
  }
  if (order.empty()) throw IoError("csv: '" + filename + "' contains no data rows");

  const RawPath& first = raw.at(order.front());
  std::vector<SamplePath> paths;
  paths.reserve(order.size());
  for (const auto& id : order) {
    const RawPath& rp = raw.at(id);
    if (rp.times != first.times)
      throw IoError("csv: path '" + id + "' (starting at line " + std::to_string(rp.first_line) +
                    ") does not share the time grid of path '" + order.front() + "'");
    const auto n = static_cast<Eigen::Index>(rp.times.size());
    Vector times(n);
    Matrix values(static_cast<Eigen::Index>(p), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      times[i] = rp.times[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < p; ++j)
        values(static_cast<Eigen::Index>(j), i) = rp.values[static_cast<std::size_t>(i) * p + j];
    }
    paths.emplace_back(std::move(times), std::move(values));
  }
  return Dataset(std::move(paths));
}

/// Write a dataset in the load_csv format with full double precision, so a
/// save/load round trip reproduces values bit for bit.
inline void save_csv(const Dataset& data, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw IoError("csv: cannot open '" + filename + "' for writing");
  const Eigen::Index p = data.state_dim();
  out << "path_id,t";
  for (Eigen::Index j = 0; j < p; ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < data.path_count(); ++i) {
    const auto& path = data.paths[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < path.length(); ++t) {
      out << i << ',' << detail::format_double(path.times[t]);
      for (Eigen::Index j = 0; j < p; ++j) out << ',' << detail::format_double(path.values(j, t));
      out << "\n";
    }
  }
  if (!out) throw IoError("csv: failed while writing '" + filename + "'");
}

}  // namespace eqdisc

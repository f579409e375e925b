#ifndef BOUNDARY_INTERCEPT_CSV_HPP
#define BOUNDARY_INTERCEPT_CSV_HPP

#include <charconv>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"

namespace boundary_intercept {

class csv_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto &cell : out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
  }
  return out;
}

inline double parse_cell(std::string_view cell, std::size_t row, const std::string &column) {
  double value = 0.0;
  const auto *first = cell.data();
  const auto *last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last)
    throw csv_error("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" +
                    std::string(cell) + "' as a number");
  return value;
}

} // namespace detail

/// Reads a dataset with header y,d,x1..xp[,z1..zq]. Columns are recognized by
/// name; x and z columns keep their header order. Rows are numbered from 1
/// (the header) in error messages.
inline Dataset read_dataset_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line).front().empty())
    throw csv_error("empty dataset");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header;
  for (auto cell : detail::split_csv_line(line)) header.emplace_back(cell);

  int y_col = -1, d_col = -1;
  std::vector<int> x_cols, z_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto &h = header[c];
    if (h == "y") y_col = static_cast<int>(c);
    else if (h == "d") d_col = static_cast<int>(c);
    else if (h.size() > 1 && h[0] == 'x') x_cols.push_back(static_cast<int>(c));
    else if (h.size() > 1 && h[0] == 'z') z_cols.push_back(static_cast<int>(c));
    else throw csv_error("header: unrecognized column '" + h + "' (expected y, d, x*, z*)");
  }
  if (y_col < 0 || d_col < 0 || x_cols.empty())
    throw csv_error("header: need columns y, d and at least one x column");

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw csv_error("row " + std::to_string(row_no) + ": expected " + std::to_string(header.size()) +
                      " columns, found " + std::to_string(cells.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      values[c] = detail::parse_cell(cells[c], row_no, header[c]);
    const double d = values[static_cast<std::size_t>(d_col)];
    if (d != 0.0 && d != 1.0)
      throw csv_error("row " + std::to_string(row_no) + ", column 'd': must be 0 or 1");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw csv_error("empty dataset");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Dataset data;
  data.y.resize(n);
  data.d.resize(n);
  data.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  data.z.resize(n, static_cast<Eigen::Index>(z_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &r = rows[static_cast<std::size_t>(i)];
    data.y[i] = r[static_cast<std::size_t>(y_col)];
    data.d[i] = static_cast<int>(r[static_cast<std::size_t>(d_col)]);
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      data.x(i, static_cast<Eigen::Index>(k)) = r[static_cast<std::size_t>(x_cols[k])];
    for (std::size_t k = 0; k < z_cols.size(); ++k)
      data.z(i, static_cast<Eigen::Index>(k)) = r[static_cast<std::size_t>(z_cols[k])];
  }
  return data;
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_CSV_HPP

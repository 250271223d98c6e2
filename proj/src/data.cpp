#include "elicit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "elicit/io.hpp"

namespace elicit {

void Dataset::validate() const {
  if (y.size() == 0) throw EmptyInput("dataset needs at least one row");
  if (x.rows() != y.size()) throw DimensionMismatch("x/y row counts differ");
  if (!x.allFinite() || !y.allFinite())
    throw NonFiniteValue("dataset contains non-finite entries");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = (b == std::string::npos) ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size())
    throw ParseError("row " + std::to_string(row) + ", column " + col +
                     ": cannot parse '" + cell + "' as a number");
  if (!std::isfinite(v))
    throw NonFiniteValue("row " + std::to_string(row) + ", column " + col +
                         ": non-finite value");
  return v;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::string line;
  do {
    if (!std::getline(in, line)) throw EmptyInput("'" + path + "' has no header row");
  } while (!line.empty() && line[0] == '#');

  auto header = split_csv_line(line);
  std::ptrdiff_t y_col = -1;
  std::vector<std::ptrdiff_t> x_cols;  // x_cols[k] = column index of x{k+1}
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      if (y_col >= 0) throw ParseError("duplicate column 'y'");
      y_col = static_cast<std::ptrdiff_t>(c);
    } else if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc{} && p == name.data() + name.size() && idx >= 1) {
        if (static_cast<std::size_t>(idx) > x_cols.size()) x_cols.resize(idx, -1);
        if (x_cols[idx - 1] >= 0) throw ParseError("duplicate column '" + name + "'");
        x_cols[idx - 1] = static_cast<std::ptrdiff_t>(c);
      }
    }
  }
  if (y_col < 0) throw ParseError("missing required column 'y'");
  for (std::size_t k = 0; k < x_cols.size(); ++k)
    if (x_cols[k] < 0)
      throw ParseError("covariate columns must be consecutive: missing 'x" +
                       std::to_string(k + 1) + "'");

  std::vector<double> ys;
  std::vector<double> xs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++row;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    ys.push_back(parse_cell(cells[y_col], row, "y"));
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      xs.push_back(parse_cell(cells[x_cols[k]], row, "x" + std::to_string(k + 1)));
  }
  if (ys.empty()) throw EmptyInput("'" + path + "' has no data rows");

  Dataset data;
  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto d = static_cast<Eigen::Index>(x_cols.size());
  data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  data.x.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) data.x(i, j) = xs[i * d + j];
  data.validate();
  return data;
}

void save_dataset(const Dataset& data, const std::string& path,
                  const std::vector<std::string>& meta) {
  std::ostringstream out;
  for (const auto& m : meta) out << "# " << m << "\n";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  char buf[40];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.x(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.y[i]);
    out << buf << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace elicit

#include "cas4dl/tabulated.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cas4dl {

namespace {

bool parse_field(const std::string& field, double& out) {
  const char* begin = field.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

Eigen::MatrixXd read_indexed_table(const std::filesystem::path& file, const char* what) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + std::string(what) + " file " + file.string());

  std::vector<std::vector<double>> rows;
  std::vector<long> indices;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      double v = 0.0;
      if (!parse_field(field, v)) {
        numeric = false;
        break;
      }
      fields.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && indices.empty()) continue;  // header
      throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (fields.size() < 2)
      throw std::runtime_error(file.string() + ":" + std::to_string(line_no) +
                               ": expected an index and at least one value");
    if (width == 0) width = fields.size() - 1;
    if (fields.size() - 1 != width)
      throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": ragged row");
    const double index = fields.front();
    if (index < 0 || index != std::floor(index))
      throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": bad index");
    for (std::size_t j = 1; j < fields.size(); ++j)
      if (!std::isfinite(fields[j]))
        throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": non-finite entry");
    indices.push_back(static_cast<long>(index));
    rows.emplace_back(fields.begin() + 1, fields.end());
  }
  if (rows.empty()) throw std::runtime_error(file.string() + ": table has no rows");

  const auto count = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd table(count, static_cast<Eigen::Index>(width));
  std::vector<bool> seen(rows.size(), false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const long idx = indices[r];
    if (idx >= count || seen[static_cast<std::size_t>(idx)])
      throw std::runtime_error(file.string() + ": indices must cover 0.." + std::to_string(count - 1) +
                               " exactly once");
    seen[static_cast<std::size_t>(idx)] = true;
    for (std::size_t j = 0; j < width; ++j)
      table(idx, static_cast<Eigen::Index>(j)) = rows[r][j];
  }
  return table;
}

void write_indexed_table(const std::filesystem::path& file, const Eigen::MatrixXd& table,
                         const char* prefix) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "index";
  for (Eigen::Index j = 0; j < table.cols(); ++j) out << ',' << prefix << (j + 1);
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", table(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace

Eigen::MatrixXd read_point_table(const std::filesystem::path& file) {
  return read_indexed_table(file, "grid");
}

Eigen::MatrixXd read_value_table(const std::filesystem::path& file) {
  return read_indexed_table(file, "value");
}

void write_point_table(const std::filesystem::path& file, const Eigen::MatrixXd& points) {
  write_indexed_table(file, points, "coord_");
}

void write_value_table(const std::filesystem::path& file, const Eigen::MatrixXd& values) {
  write_indexed_table(file, values, "val_");
}

TabulatedOracle load_tabulated(const std::filesystem::path& grid_file,
                               const std::filesystem::path& value_file,
                               const std::filesystem::path& test_grid_file,
                               const std::filesystem::path& test_value_file,
                               int expected_dimension) {
  Eigen::MatrixXd points = read_point_table(grid_file);
  Eigen::MatrixXd values = read_value_table(value_file);
  if (values.rows() != points.rows())
    throw std::runtime_error("value table has " + std::to_string(values.rows()) +
                             " rows but the grid has " + std::to_string(points.rows()));
  if (expected_dimension > 0 && points.cols() != expected_dimension)
    throw std::runtime_error("grid dimension " + std::to_string(points.cols()) +
                             " does not match configured dimension " +
                             std::to_string(expected_dimension));

  TabulatedOracle oracle{Grid(std::move(points)), std::move(values), std::nullopt};
  if (!test_grid_file.empty() || !test_value_file.empty()) {
    if (test_grid_file.empty() || test_value_file.empty())
      throw std::runtime_error("a tabulated test set needs both a grid and a value file");
    TestSet test;
    test.points = read_point_table(test_grid_file);
    test.values = read_value_table(test_value_file);
    if (test.values.rows() != test.points.rows())
      throw std::runtime_error("test value table row count does not match its grid");
    if (test.points.cols() != oracle.grid.dimension())
      throw std::runtime_error("test grid dimension does not match the training grid");
    if (test.values.cols() != oracle.values.cols())
      throw std::runtime_error("test values have a different output dimension");
    oracle.test = std::move(test);
  }
  return oracle;
}

}  // namespace cas4dl

#pragma once

#include <filesystem>
#include <optional>

#include <Eigen/Dense>

#include "cas4dl/metrics.hpp"
#include "cas4dl/sample_grid.hpp"

namespace cas4dl {

/// Precomputed target values on every grid point, standing in for an
/// expensive external solver. Sampling selects rows of the table.
struct TabulatedOracle {
  Grid grid;
  Eigen::MatrixXd values;  // K x J
  std::optional<TestSet> test;

  int output_dim() const { return static_cast<int>(values.cols()); }
  Eigen::RowVectorXd value(Eigen::Index l) const { return values.row(l); }
};

/// Reads `index,coord_1..coord_d` rows. A header line is optional; indices
/// are 0-based and must cover 0..K-1 exactly once, in any order.
Eigen::MatrixXd read_point_table(const std::filesystem::path& file);

/// Reads `index,val_1..val_J` rows with the same index rules.
Eigen::MatrixXd read_value_table(const std::filesystem::path& file);

void write_point_table(const std::filesystem::path& file, const Eigen::MatrixXd& points);
void write_value_table(const std::filesystem::path& file, const Eigen::MatrixXd& values);

/// Loads grid and values (and optionally a separate test table). Rejects row
/// count mismatches, non-finite values and, when `expected_dimension` > 0, a
/// grid of the wrong dimension.
TabulatedOracle load_tabulated(const std::filesystem::path& grid_file,
                               const std::filesystem::path& value_file,
                               const std::filesystem::path& test_grid_file = {},
                               const std::filesystem::path& test_value_file = {},
                               int expected_dimension = 0);

}  // namespace cas4dl

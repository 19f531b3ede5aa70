#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cas4dl/random.hpp"

namespace cas4dl {

/// Finite grid Z of K points in [-1,1]^d carrying the discrete uniform measure.
/// Immutable after construction.
class Grid {
 public:
  Grid(Eigen::MatrixXd points, std::uint64_t seed = 0);

  Eigen::Index size() const { return points_.rows(); }
  int dimension() const { return static_cast<int>(points_.cols()); }
  std::uint64_t seed() const { return seed_; }

  /// K x d, one point per row.
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::RowVectorXd point(Eigen::Index l) const { return points_.row(l); }

  /// Rows of the grid at the given indices.
  Eigen::MatrixXd gather(std::span<const Eigen::Index> indices) const;

 private:
  Eigen::MatrixXd points_;
  std::uint64_t seed_;
};

/// K i.i.d. uniform points on [-1,1]^d; bit-identical for equal (d, K, seed).
Grid build_grid(int dimension, Eigen::Index size, std::uint64_t seed);

/// Grid size used when a configuration does not set one.
Eigen::Index default_grid_size(int dimension);

/// Probability vector over grid indices with a cumulative table for
/// O(log K) inverse-CDF draws.
class DiscreteDistribution {
 public:
  /// Rejects negative or non-finite entries and zero total mass. Sums within
  /// 1e-8 of one are renormalized; larger deviations are rejected unless
  /// `normalize` is set, in which case any positive mass is accepted.
  explicit DiscreteDistribution(std::vector<double> probabilities, bool normalize = false);

  static DiscreteDistribution uniform(Eigen::Index size);

  Eigen::Index size() const { return static_cast<Eigen::Index>(probabilities_.size()); }
  const std::vector<double>& probabilities() const { return probabilities_; }
  double probability(Eigen::Index l) const { return probabilities_[static_cast<std::size_t>(l)]; }

  Eigen::Index draw(RandomStream& stream) const;

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  Eigen::Index last_positive_ = 0;
};

/// `count` i.i.d. draws from `dist`, consuming `stream`.
std::vector<Eigen::Index> draw_indices(const DiscreteDistribution& dist, std::size_t count,
                                       RandomStream& stream);

/// `count` i.i.d. uniform indices in [0, size).
std::vector<Eigen::Index> draw_uniform_indices(Eigen::Index size, std::size_t count,
                                               RandomStream& stream);

}  // namespace cas4dl

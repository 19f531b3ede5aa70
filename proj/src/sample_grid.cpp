#include "cas4dl/sample_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cas4dl {

Grid::Grid(Eigen::MatrixXd points, std::uint64_t seed) : points_(std::move(points)), seed_(seed) {
  if (points_.rows() < 1) throw std::invalid_argument("grid must contain at least one point");
  if (points_.cols() < 1) throw std::invalid_argument("grid dimension must be >= 1");
  if (!points_.allFinite()) throw std::invalid_argument("grid contains non-finite coordinates");
  if (points_.cwiseAbs().maxCoeff() > 1.0)
    throw std::invalid_argument("grid coordinates must lie in [-1,1]");
}

Eigen::MatrixXd Grid::gather(std::span<const Eigen::Index> indices) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), points_.cols());
  for (std::size_t i = 0; i < indices.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = points_.row(indices[i]);
  return out;
}

Grid build_grid(int dimension, Eigen::Index size, std::uint64_t seed) {
  if (dimension < 1) throw std::invalid_argument("grid dimension must be >= 1");
  if (size < 1) throw std::invalid_argument("grid size must be >= 1");
  RandomStream stream(seed);
  Eigen::MatrixXd points(size, dimension);
  // Row-major fill so that a point's coordinates are consecutive draws.
  for (Eigen::Index l = 0; l < size; ++l)
    for (int j = 0; j < dimension; ++j) points(l, j) = stream.uniform(-1.0, 1.0);
  return Grid(std::move(points), seed);
}

Eigen::Index default_grid_size(int dimension) {
  if (dimension <= 2) return 10000;
  if (dimension <= 4) return 20000;
  if (dimension <= 8) return 50000;
  return 100000;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> probabilities, bool normalize)
    : probabilities_(std::move(probabilities)) {
  if (probabilities_.empty()) throw std::invalid_argument("distribution over an empty index set");
  double total = 0.0;
  for (double p : probabilities_) {
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument("distribution has a negative or non-finite entry");
    total += p;
  }
  if (total <= 0.0) throw std::invalid_argument("distribution has zero total mass");
  if (!normalize && std::abs(total - 1.0) > 1e-8)
    throw std::invalid_argument("distribution sums to " + std::to_string(total) + ", not 1");
  for (double& p : probabilities_) p /= total;

  cumulative_.resize(probabilities_.size());
  double running = 0.0;
  for (std::size_t l = 0; l < probabilities_.size(); ++l) {
    running += probabilities_[l];
    cumulative_[l] = running;
    if (probabilities_[l] > 0.0) last_positive_ = static_cast<Eigen::Index>(l);
  }
}

DiscreteDistribution DiscreteDistribution::uniform(Eigen::Index size) {
  if (size < 1) throw std::invalid_argument("uniform distribution over an empty index set");
  return DiscreteDistribution(std::vector<double>(static_cast<std::size_t>(size), 1.0), true);
}

Eigen::Index DiscreteDistribution::draw(RandomStream& stream) const {
  const double u = stream.uniform01() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return last_positive_;
  return static_cast<Eigen::Index>(it - cumulative_.begin());
}

std::vector<Eigen::Index> draw_indices(const DiscreteDistribution& dist, std::size_t count,
                                       RandomStream& stream) {
  std::vector<Eigen::Index> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(dist.draw(stream));
  return out;
}

std::vector<Eigen::Index> draw_uniform_indices(Eigen::Index size, std::size_t count,
                                               RandomStream& stream) {
  if (size < 1) throw std::invalid_argument("uniform draw over an empty index set");
  std::vector<Eigen::Index> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(static_cast<Eigen::Index>(stream.uniform_index(static_cast<std::uint64_t>(size))));
  return out;
}

}  // namespace cas4dl

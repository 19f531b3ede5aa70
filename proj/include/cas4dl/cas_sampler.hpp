#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cas4dl/random.hpp"
#include "cas4dl/subspace.hpp"

namespace cas4dl {

/// Drawn grid indices with their weights and provenance. Duplicates are kept.
struct SampleSet {
  std::vector<Eigen::Index> indices;
  std::vector<double> weights;
  std::vector<int> stages;    // draw stage of each sample
  std::vector<int> measures;  // induced measure each sample came from, -1 if uniform

  std::size_t size() const { return indices.size(); }
  void append(const SampleSet& other);
};

/// Per-measure draw counts for m samples over n measures: k = floor(m/n)
/// each, plus one extra for the first s = m - k n measures.
std::vector<std::size_t> allocation_counts(std::size_t m, std::size_t n);

/// Draws m samples from the induced measures of `fact` in measure order,
/// weighting each by the reciprocal Christoffel value at its grid index.
SampleSet cas_draw(const SubspaceFactorization& fact, std::size_t m, RandomStream& stream,
                   int stage = 0);

/// Factorizes the dictionary and draws m samples (Christoffel adaptive sampling).
SampleSet cas_draw(const DictionaryEvaluation& dictionary, std::size_t m, double eps_tol,
                   RandomStream& stream, int stage = 0);

/// m uniform draws from a grid of `grid_size` points with unit weights.
SampleSet uniform_draw(Eigen::Index grid_size, std::size_t m, RandomStream& stream, int stage = 0);

}  // namespace cas4dl

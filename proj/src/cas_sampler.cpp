#include "cas4dl/cas_sampler.hpp"

#include <stdexcept>

namespace cas4dl {

void SampleSet::append(const SampleSet& other) {
  indices.insert(indices.end(), other.indices.begin(), other.indices.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  stages.insert(stages.end(), other.stages.begin(), other.stages.end());
  measures.insert(measures.end(), other.measures.begin(), other.measures.end());
}

std::vector<std::size_t> allocation_counts(std::size_t m, std::size_t n) {
  if (n == 0) throw std::invalid_argument("allocation over zero measures");
  const std::size_t k = m / n;
  const std::size_t s = m - k * n;
  std::vector<std::size_t> counts(n, k);
  for (std::size_t t = 0; t < s; ++t) ++counts[t];
  return counts;
}

SampleSet cas_draw(const SubspaceFactorization& fact, std::size_t m, RandomStream& stream,
                   int stage) {
  const auto n = static_cast<std::size_t>(fact.numerical_dim);
  const std::vector<DiscreteDistribution> measures = induced_measures(fact);
  const Eigen::VectorXd weights = weight_values(fact);

  SampleSet out;
  out.indices.reserve(m);
  const std::size_t k = m / n;
  const std::size_t s = m - k * n;
  auto take = [&](std::size_t j) {
    const Eigen::Index l = measures[j].draw(stream);
    out.indices.push_back(l);
    out.weights.push_back(weights(l));
    out.stages.push_back(stage);
    out.measures.push_back(static_cast<int>(j));
  };
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < k; ++i) take(j);
  for (std::size_t t = 0; t < s; ++t) take(t);
  return out;
}

SampleSet cas_draw(const DictionaryEvaluation& dictionary, std::size_t m, double eps_tol,
                   RandomStream& stream, int stage) {
  return cas_draw(factorize(dictionary, eps_tol), m, stream, stage);
}

SampleSet uniform_draw(Eigen::Index grid_size, std::size_t m, RandomStream& stream, int stage) {
  SampleSet out;
  out.indices = draw_uniform_indices(grid_size, m, stream);
  out.weights.assign(m, 1.0);
  out.stages.assign(m, stage);
  out.measures.assign(m, -1);
  return out;
}

}  // namespace cas4dl

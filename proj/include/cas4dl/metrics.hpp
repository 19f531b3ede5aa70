#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "cas4dl/cas_sampler.hpp"
#include "cas4dl/subspace.hpp"
#include "cas4dl/test_functions.hpp"

namespace cas4dl {

/// Equal-weight test points with target values. Drawn uniformly on the cube
/// from a stream disjoint from the training grid's.
struct TestSet {
  Eigen::MatrixXd points;  // M x d
  Eigen::MatrixXd values;  // M x J
  std::uint64_t seed = 0;
};

TestSet make_test_set(const TargetFunction& target, Eigen::Index size, std::uint64_t seed);

/// sqrt(sum_i |f(y_i) - g(y_i)|^2) / sqrt(sum_i |f(y_i)|^2) over rows.
double relative_l2_error(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target);

using Predictor = std::function<Eigen::VectorXd(std::span<const double>)>;
double relative_l2_error(const Predictor& predict, const TestSet& test);

/// Relative L2 error of each output component separately.
Eigen::VectorXd componentwise_relative_l2_error(const Eigen::MatrixXd& predicted,
                                                const Eigen::MatrixXd& target);

/// Smallest singular value of the m x n matrix sqrt(w_i/m) phi_j(y_i), with
/// phi_j the orthonormal basis of `fact` at the sample indices and w_i the
/// stored per-sample weights (or 1 when `unit_weights`). Zero when m < n.
double stability_constant(const SubspaceFactorization& fact, const SampleSet& samples,
                          bool unit_weights = false);

}  // namespace cas4dl

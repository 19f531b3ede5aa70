#include "cas4dl/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "cas4dl/random.hpp"

namespace cas4dl {

TestSet make_test_set(const TargetFunction& target, Eigen::Index size, std::uint64_t seed) {
  if (size < 1) throw std::invalid_argument("test set size must be >= 1");
  RandomStream stream(seed);
  TestSet test;
  test.seed = seed;
  test.points.resize(size, target.dimension());
  for (Eigen::Index i = 0; i < size; ++i)
    for (int j = 0; j < target.dimension(); ++j) test.points(i, j) = stream.uniform(-1.0, 1.0);
  test.values = target.eval_rows(test.points);
  return test;
}

double relative_l2_error(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    throw std::invalid_argument("prediction and target shapes differ");
  const double denominator = target.norm();
  if (!(denominator > 0.0)) throw std::domain_error("target has zero norm on the test set");
  return (predicted - target).norm() / denominator;
}

double relative_l2_error(const Predictor& predict, const TestSet& test) {
  Eigen::MatrixXd predicted(test.values.rows(), test.values.cols());
  for (Eigen::Index i = 0; i < test.points.rows(); ++i) {
    const Eigen::RowVectorXd y = test.points.row(i);
    predicted.row(i) = predict(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())))
                           .transpose();
  }
  return relative_l2_error(predicted, test.values);
}

Eigen::VectorXd componentwise_relative_l2_error(const Eigen::MatrixXd& predicted,
                                                const Eigen::MatrixXd& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    throw std::invalid_argument("prediction and target shapes differ");
  Eigen::VectorXd out(target.cols());
  for (Eigen::Index k = 0; k < target.cols(); ++k)
    out(k) = relative_l2_error(predicted.col(k), target.col(k));
  return out;
}

double stability_constant(const SubspaceFactorization& fact, const SampleSet& samples,
                          bool unit_weights) {
  const auto m = static_cast<Eigen::Index>(samples.size());
  if (m < 1) throw std::invalid_argument("stability constant needs at least one sample");
  const Eigen::Index n = fact.numerical_dim;
  if (m < n) return 0.0;

  const double root_k = std::sqrt(static_cast<double>(fact.grid_size));
  Eigen::MatrixXd matrix(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = unit_weights ? 1.0 : samples.weights[static_cast<std::size_t>(i)];
    const double scale = std::sqrt(w / static_cast<double>(m)) * root_k;
    matrix.row(i) = scale * fact.left_vectors.row(samples.indices[static_cast<std::size_t>(i)]);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(matrix);
  const Eigen::MatrixXd r_factor = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(r_factor).singularValues().minCoeff();
}

}  // namespace cas4dl

#include "cas4dl/subspace.hpp"

#include <cmath>
#include <string>

namespace cas4dl {

DictionaryEvaluation::DictionaryEvaluation(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw std::invalid_argument("dictionary evaluation must be non-empty");
  if (values_.cols() > values_.rows())
    throw std::invalid_argument("dictionary size N=" + std::to_string(values_.cols()) +
                                " exceeds grid size K=" + std::to_string(values_.rows()));
  if (!values_.allFinite()) throw std::invalid_argument("dictionary has a non-finite value");
}

Eigen::MatrixXd SubspaceFactorization::basis_values() const {
  return std::sqrt(static_cast<double>(grid_size)) * left_vectors;
}

Eigen::MatrixXd assemble_matrix(const DictionaryEvaluation& dictionary) {
  return dictionary.values() / std::sqrt(static_cast<double>(dictionary.grid_size()));
}

SubspaceFactorization factorize(const Eigen::MatrixXd& scaled_matrix, double eps_tol) {
  if (!(eps_tol > 0.0 && eps_tol < 1.0)) throw std::invalid_argument("eps_tol must lie in (0, 1)");
  if (!scaled_matrix.allFinite()) throw std::invalid_argument("matrix has a non-finite entry");
  const Eigen::Index rows = scaled_matrix.rows();
  const Eigen::Index cols = scaled_matrix.cols();
  if (rows < 1 || cols < 1) throw std::invalid_argument("empty matrix");
  if (cols > rows) throw std::invalid_argument("factorize requires N <= K");

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled_matrix);
  const Eigen::MatrixXd r_factor =
      qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r_factor, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SubspaceFactorization fact;
  fact.grid_size = rows;
  fact.eps_tol = eps_tol;
  fact.singular_values = svd.singularValues();
  const double sigma_max = fact.singular_values(0);
  if (!(sigma_max > 0.0)) throw TrivialSubspaceError("dictionary spans only the zero function");

  Eigen::Index n = 0;
  while (n < cols && fact.singular_values(n) / sigma_max > eps_tol) ++n;
  fact.numerical_dim = n;

  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(rows, n);
  left.topRows(cols) = svd.matrixU().leftCols(n);
  left.applyOnTheLeft(qr.householderQ());
  Eigen::MatrixXd right = svd.matrixV().leftCols(n);

  // Fix signs so the entry of largest magnitude in each left vector is positive.
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index arg = 0;
    left.col(j).cwiseAbs().maxCoeff(&arg);
    if (left(arg, j) < 0.0) {
      left.col(j) *= -1.0;
      right.col(j) *= -1.0;
    }
  }
  fact.left_vectors = std::move(left);
  fact.right_vectors = std::move(right);
  return fact;
}

Eigen::VectorXd christoffel_values(const SubspaceFactorization& fact) {
  const double scale =
      static_cast<double>(fact.grid_size) / static_cast<double>(fact.numerical_dim);
  return scale * fact.left_vectors.rowwise().squaredNorm();
}

Eigen::VectorXd weight_values(const SubspaceFactorization& fact) {
  Eigen::VectorXd christoffel = christoffel_values(fact);
  for (Eigen::Index l = 0; l < christoffel.size(); ++l)
    christoffel(l) = christoffel(l) > 0.0 ? 1.0 / christoffel(l) : kZeroChristoffelWeight;
  return christoffel;
}

std::vector<DiscreteDistribution> induced_measures(const SubspaceFactorization& fact) {
  std::vector<DiscreteDistribution> measures;
  measures.reserve(static_cast<std::size_t>(fact.numerical_dim));
  for (Eigen::Index j = 0; j < fact.numerical_dim; ++j) {
    std::vector<double> probabilities(static_cast<std::size_t>(fact.grid_size));
    for (Eigen::Index l = 0; l < fact.grid_size; ++l) {
      const double u = fact.left_vectors(l, j);
      probabilities[static_cast<std::size_t>(l)] = u * u;
    }
    measures.emplace_back(std::move(probabilities));
  }
  return measures;
}

}  // namespace cas4dl

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cas4dl/sample_grid.hpp"

namespace cas4dl {

inline constexpr double kDefaultEpsTol = 1e-6;

/// Raised when the dictionary spans only the zero function on the grid.
class TrivialSubspaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dictionary values on the grid: values(l, j) = psi_j(z_l), K x N with N <= K.
class DictionaryEvaluation {
 public:
  explicit DictionaryEvaluation(Eigen::MatrixXd values);

  Eigen::Index grid_size() const { return values_.rows(); }
  Eigen::Index dictionary_size() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

/// Thresholded thin SVD of the scaled dictionary matrix B.
///
/// Only the first `numerical_dim` singular triplets are kept. The orthonormal
/// basis in L2(tau) is phi_j(z_l) = sqrt(K) * u_{lj}, so that the induced
/// measures are {u_{lj}^2} and E_tau[1/w] = 1.
struct SubspaceFactorization {
  Eigen::Index grid_size = 0;
  Eigen::Index numerical_dim = 0;
  double eps_tol = kDefaultEpsTol;
  Eigen::VectorXd singular_values;  // all N, descending
  Eigen::MatrixXd left_vectors;     // K x n, orthonormal columns
  Eigen::MatrixXd right_vectors;    // N x n

  double basis_value(Eigen::Index l, Eigen::Index j) const {
    return std::sqrt(static_cast<double>(grid_size)) * left_vectors(l, j);
  }
  /// K x n matrix of phi_j(z_l).
  Eigen::MatrixXd basis_values() const;
};

/// B(l, j) = psi_j(z_l) / sqrt(K).
Eigen::MatrixXd assemble_matrix(const DictionaryEvaluation& dictionary);

/// Numerical dimension n = max{ i : sigma_i / sigma_1 > eps_tol } and the
/// leading n singular triplets. Uses Householder QR of B followed by a
/// one-sided Jacobi SVD of the N x N triangular factor.
SubspaceFactorization factorize(const Eigen::MatrixXd& scaled_matrix, double eps_tol = kDefaultEpsTol);

inline SubspaceFactorization factorize(const DictionaryEvaluation& dictionary,
                                       double eps_tol = kDefaultEpsTol) {
  return factorize(assemble_matrix(dictionary), eps_tol);
}

/// Normalized reciprocal Christoffel function on the grid,
/// K(z_l) = (1/n) sum_j phi_j(z_l)^2 = (K/n) sum_j u_{lj}^2.
Eigen::VectorXd christoffel_values(const SubspaceFactorization& fact);

/// Value stored where the Christoffel function vanishes. Such points carry
/// zero probability under every induced measure and are never drawn.
inline constexpr double kZeroChristoffelWeight = 0.0;

/// w(z_l) = 1 / K(z_l).
Eigen::VectorXd weight_values(const SubspaceFactorization& fact);

/// One distribution per basis function: measure j has probabilities u_{lj}^2.
std::vector<DiscreteDistribution> induced_measures(const SubspaceFactorization& fact);

}  // namespace cas4dl

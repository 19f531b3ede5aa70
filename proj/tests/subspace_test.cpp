#include "cas4dl/subspace.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cas4dl/random.hpp"
#include "cas4dl/sample_grid.hpp"

using cas4dl::DictionaryEvaluation;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd linspace_grid(int K) { return VectorXd::LinSpaced(K, -1.0, 1.0); }

MatrixXd monomials(const VectorXd& z, int degree) {
  MatrixXd v(z.size(), degree + 1);
  for (int j = 0; j <= degree; ++j) v.col(j) = z.array().pow(j);
  return v;
}

MatrixXd random_smooth_features(const VectorXd& z, int N, cas4dl::RandomStream& s) {
  MatrixXd v(z.size(), N);
  for (int j = 0; j < N; ++j) {
    const double a = s.uniform(-3, 3), b = s.uniform(-1, 1);
    v.col(j) = (a * z.array() + b).tanh();
  }
  return v;
}

// Orthogonal projector onto the column span, from the Gram eigendecomposition.
MatrixXd span_projector(const MatrixXd& u) { return u * u.transpose(); }

}  // namespace

TEST(Subspace, AssembleScalesBySqrtK) {
  MatrixXd v(4, 2);
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  const MatrixXd b = cas4dl::assemble_matrix(DictionaryEvaluation(v));
  EXPECT_TRUE(b.isApprox(v / 2.0));
}

TEST(Subspace, DictionaryRejectsMoreElementsThanPoints) {
  EXPECT_THROW(DictionaryEvaluation(MatrixXd::Ones(2, 3)), std::invalid_argument);
  MatrixXd bad = MatrixXd::Ones(3, 1);
  bad(1, 0) = std::nan("");
  EXPECT_THROW(DictionaryEvaluation{bad}, std::invalid_argument);
}

TEST(Subspace, DuplicateColumnHasDimensionOne) {
  const VectorXd z = linspace_grid(100);
  MatrixXd v(100, 2);
  v.col(0) = z;
  v.col(1) = z;
  const auto fact = cas4dl::factorize(DictionaryEvaluation(v));
  EXPECT_EQ(fact.numerical_dim, 1);
}

TEST(Subspace, ConstantDictionary) {
  const auto fact = cas4dl::factorize(DictionaryEvaluation(MatrixXd::Ones(50, 1)));
  EXPECT_EQ(fact.numerical_dim, 1);
  EXPECT_NEAR(fact.singular_values(0), 1.0, 1e-14);
  const VectorXd k = cas4dl::christoffel_values(fact);
  EXPECT_NEAR((k.array() - 1.0).abs().maxCoeff(), 0.0, 1e-13);
  for (const auto& mu : cas4dl::induced_measures(fact))
    for (double p : mu.probabilities()) EXPECT_NEAR(p, 1.0 / 50, 1e-15);
}

TEST(Subspace, ZeroDictionaryIsTrivial) {
  EXPECT_THROW(cas4dl::factorize(DictionaryEvaluation(MatrixXd::Zero(10, 3))),
               cas4dl::TrivialSubspaceError);
}

TEST(Subspace, SingularValuesAgreeWithGramEigenvalues) {
  // Oracle: sigma_i^2 are the eigenvalues of B^T B.
  const VectorXd z = linspace_grid(1000);
  const MatrixXd v = monomials(z, 2);
  const auto fact = cas4dl::factorize(DictionaryEvaluation(v));
  EXPECT_EQ(fact.numerical_dim, 3);
  const MatrixXd b = cas4dl::assemble_matrix(DictionaryEvaluation(v));
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(b.transpose() * b);
  VectorXd expected = eig.eigenvalues().cwiseSqrt().reverse();
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(fact.singular_values(i), expected(i), 1e-12 * expected(0));
}

TEST(Subspace, LinearBasisChristoffelMatchesDiscreteMoments) {
  // For span{1, y}: phi_1 = 1, phi_2 = (z - mean)/sd with discrete moments,
  // so K(z) = (1 + (z - mean)^2 / var) / 2.
  const auto grid = cas4dl::build_grid(1, 10000, 8);
  const VectorXd z = grid.points().col(0);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().mean();
  const auto fact = cas4dl::factorize(DictionaryEvaluation(monomials(z, 1)));
  ASSERT_EQ(fact.numerical_dim, 2);
  const VectorXd k = cas4dl::christoffel_values(fact);
  const VectorXd expected = 0.5 * (1.0 + (z.array() - mean).square() / var);
  EXPECT_LT((k - expected).cwiseAbs().maxCoeff(), 1e-10);
  // Continuum limit (1 + 3 z^2)/2 up to sampling error of the moments.
  const VectorXd continuum = 0.5 * (1.0 + 3.0 * z.array().square());
  EXPECT_LT((k - continuum).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Subspace, WeightsAreReciprocalAndSmallestAtEndpoints) {
  const VectorXd z = linspace_grid(201);
  const auto fact = cas4dl::factorize(DictionaryEvaluation(monomials(z, 1)));
  const VectorXd k = cas4dl::christoffel_values(fact);
  const VectorXd w = cas4dl::weight_values(fact);
  EXPECT_LT((k.cwiseProduct(w).array() - 1.0).abs().maxCoeff(), 1e-14);
  Eigen::Index imin = 0;
  w.minCoeff(&imin);
  EXPECT_TRUE(imin == 0 || imin == 200);
  EXPECT_NEAR(w(0), w(200), 1e-12);
}

TEST(Subspace, ZeroChristoffelGetsSentinelWeight) {
  MatrixXd v = MatrixXd::Zero(5, 1);
  v(2, 0) = 1.0;
  const auto fact = cas4dl::factorize(DictionaryEvaluation(v));
  const VectorXd w = cas4dl::weight_values(fact);
  EXPECT_NEAR(w(2), 1.0 / 5.0, 1e-15);
  EXPECT_EQ(w(0), cas4dl::kZeroChristoffelWeight);
  const auto mu = cas4dl::induced_measures(fact);
  EXPECT_NEAR(mu[0].probability(2), 1.0, 1e-15);
  EXPECT_EQ(mu[0].probability(0), 0.0);
}

TEST(Subspace, LinearBasisSecondMeasureProportionalToCenteredSquare) {
  const VectorXd z = linspace_grid(101);
  const auto fact = cas4dl::factorize(DictionaryEvaluation(monomials(z, 1)));
  const auto mu = cas4dl::induced_measures(fact);
  ASSERT_EQ(mu.size(), 2u);
  // The grid is symmetric, so 1 and z are already orthogonal with norms 1 and
  // sqrt(mean z^2) < 1; the ordering is fixed by the singular values.
  const VectorXd sq = z.array().square();
  for (Eigen::Index l = 0; l < 101; ++l) {
    EXPECT_NEAR(mu[0].probability(l), 1.0 / 101, 1e-14);
    EXPECT_NEAR(mu[1].probability(l), sq(l) / sq.sum(), 1e-14);
  }
}

TEST(Subspace, OrthogonalDictionaryReproducesItsOwnMeasures) {
  // Distinct norms make the singular vectors unique up to sign.
  const VectorXd z = linspace_grid(64);
  MatrixXd v(64, 3);
  v.col(0) = VectorXd::Constant(64, 3.0);
  v.col(1) = 2.0 * z;
  v.col(2) = (z.array().square() - z.array().square().mean()).matrix();
  const auto fact = cas4dl::factorize(DictionaryEvaluation(v));
  ASSERT_EQ(fact.numerical_dim, 3);
  const auto mu = cas4dl::induced_measures(fact);
  for (int j = 0; j < 3; ++j) {
    const VectorXd sq = v.col(j).array().square();
    for (Eigen::Index l = 0; l < 64; ++l)
      EXPECT_NEAR(mu[j].probability(l), sq(l) / sq.sum(), 1e-12);
  }
}

TEST(Subspace, OrthonormalDictionaryMeasuresAreSquaredValues) {
  const VectorXd z = linspace_grid(64);
  MatrixXd v(64, 2);
  v.col(0) = VectorXd::Ones(64);
  v.col(1) = z / std::sqrt(z.array().square().mean());
  const auto fact = cas4dl::factorize(DictionaryEvaluation(v));
  const auto mu = cas4dl::induced_measures(fact);
  ASSERT_EQ(mu.size(), 2u);
  for (int j = 0; j < 2; ++j)
    for (Eigen::Index l = 0; l < 64; ++l)
      EXPECT_NEAR(mu[j].probability(l), v(l, j) * v(l, j) / 64.0, 1e-10);
}

TEST(Subspace, TraceIdentityAndOrthonormality) {
  cas4dl::RandomStream s(123);
  for (int rep = 0; rep < 20; ++rep) {
    const int K = 200 + static_cast<int>(s.uniform_index(800));
    const int N = 1 + static_cast<int>(s.uniform_index(30));
    const auto grid = cas4dl::build_grid(1, K, s.next_u64());
    const auto fact =
        cas4dl::factorize(DictionaryEvaluation(random_smooth_features(grid.points().col(0), N, s)));
    const VectorXd k = cas4dl::christoffel_values(fact);
    EXPECT_NEAR(k.mean(), 1.0, 1e-12);
    const MatrixXd phi = fact.basis_values();
    const MatrixXd gram = phi.transpose() * phi / K;
    const Eigen::Index n = fact.numerical_dim;
    EXPECT_LT((gram - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    for (const auto& mu : cas4dl::induced_measures(fact)) {
      const auto& p = mu.probabilities();
      EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(Subspace, PermutationLeavesSpanAndSpectrumUnchanged) {
  cas4dl::RandomStream s(4);
  const VectorXd z = cas4dl::build_grid(1, 500, 2).points().col(0);
  const MatrixXd v = random_smooth_features(z, 8, s);
  std::vector<int> perm{3, 0, 7, 5, 1, 6, 2, 4};
  MatrixXd pv(500, 8);
  for (int j = 0; j < 8; ++j) pv.col(j) = v.col(perm[j]);
  const auto a = cas4dl::factorize(DictionaryEvaluation(v));
  const auto b = cas4dl::factorize(DictionaryEvaluation(pv));
  EXPECT_EQ(a.numerical_dim, b.numerical_dim);
  EXPECT_LT((a.singular_values - b.singular_values).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((span_projector(a.left_vectors) - span_projector(b.left_vectors)).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(Subspace, DuplicateElementLeavesDimensionAndChristoffelUnchanged) {
  cas4dl::RandomStream s(6);
  const VectorXd z = cas4dl::build_grid(1, 500, 3).points().col(0);
  const MatrixXd v = random_smooth_features(z, 5, s);
  MatrixXd dup(500, 6);
  dup << v, v.col(2);
  const auto a = cas4dl::factorize(DictionaryEvaluation(v));
  const auto b = cas4dl::factorize(DictionaryEvaluation(dup));
  EXPECT_EQ(a.numerical_dim, b.numerical_dim);
  EXPECT_LT((cas4dl::christoffel_values(a) - cas4dl::christoffel_values(b)).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(Subspace, DuplicateOfOrthogonalElementKeepsMeasureSet) {
  // Duplicating psi_j only rescales its singular value, so the set of
  // induced measures is preserved (the order may change).
  const VectorXd z = linspace_grid(64);
  MatrixXd v(64, 2);
  v.col(0) = VectorXd::Constant(64, 1.0);
  v.col(1) = 3.0 * z;
  MatrixXd dup(64, 3);
  dup << v, v.col(0);
  const auto ma = cas4dl::induced_measures(cas4dl::factorize(DictionaryEvaluation(v)));
  const auto mb = cas4dl::induced_measures(cas4dl::factorize(DictionaryEvaluation(dup)));
  ASSERT_EQ(ma.size(), mb.size());
  for (const auto& p : ma) {
    double best = 1.0;
    for (const auto& q : mb) {
      double diff = 0.0;
      for (Eigen::Index l = 0; l < 64; ++l)
        diff = std::max(diff, std::abs(p.probability(l) - q.probability(l)));
      best = std::min(best, diff);
    }
    EXPECT_LT(best, 1e-8);
  }
}

TEST(Subspace, PlantedRankWithDuplicates) {
  cas4dl::RandomStream s(10);
  for (int rep = 0; rep < 10; ++rep) {
    const int r = 1 + static_cast<int>(s.uniform_index(10));
    const VectorXd z = cas4dl::build_grid(1, 1000, s.next_u64()).points().col(0);
    // Legendre-like independent features mixed by a random matrix.
    MatrixXd base = monomials(z, r - 1);
    MatrixXd mix(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) mix(i, j) = s.normal() + (i == j ? 3.0 : 0.0);
    const MatrixXd indep = base * mix;
    const int extra = static_cast<int>(s.uniform_index(5));
    MatrixXd v(1000, r + extra);
    v.leftCols(r) = indep;
    for (int e = 0; e < extra; ++e) v.col(r + e) = indep.col(static_cast<Eigen::Index>(s.uniform_index(r)));
    EXPECT_EQ(cas4dl::factorize(DictionaryEvaluation(v), 1e-6).numerical_dim, r);
  }
}

TEST(Subspace, ThresholdControlsDimension) {
  const VectorXd z = linspace_grid(500);
  MatrixXd v(500, 2);
  v.col(0) = VectorXd::Ones(500);
  v.col(1) = 1e-8 * z;
  EXPECT_EQ(cas4dl::factorize(DictionaryEvaluation(v), 1e-6).numerical_dim, 1);
  EXPECT_EQ(cas4dl::factorize(DictionaryEvaluation(v), 1e-12).numerical_dim, 2);
}

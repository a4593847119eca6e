#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"
#include "ust/linalg.hpp"

namespace ust {
namespace {

double orthonormality_residual(const Eigen::MatrixXd& e) {
  return (e.transpose() * e - Eigen::MatrixXd::Identity(e.cols(), e.cols())).norm();
}

double reconstruction_error(const Eigen::MatrixXd& a, const SpectralDecomposition& d) {
  const Eigen::MatrixXd r = d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
  return (r - a).norm() / a.norm();
}

TEST(CovarianceTest, HandArithmetic) {
  Eigen::MatrixXd f(2, 2);
  f << 1, -1, 1, -1;
  const SymMatrix c = covariance(f);
  EXPECT_EQ(c.matrix(), Eigen::MatrixXd::Constant(2, 2, 2.0));
}

TEST(CovarianceTest, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(11);
  for (Index c : {1, 3, 17}) {
    const FeatureMatrix f = testing::random_features(c, 5 * c + 2, rng);
    const Eigen::MatrixXd expected = testing::covariance_oracle(f);
    EXPECT_LT((covariance(f).matrix() - expected).norm(), 1e-9 * (1.0 + expected.norm())) << "C=" << c;
  }
}

TEST(CovarianceTest, ConstantRowsGiveZero) {
  const Eigen::MatrixXd f = Eigen::MatrixXd::Constant(3, 10, 2.5);
  EXPECT_EQ(covariance(f).matrix(), Eigen::MatrixXd::Zero(3, 3));
}

TEST(CovarianceTest, NeedsTwoSamples) {
  EXPECT_THROW(covariance(Eigen::MatrixXd::Ones(2, 1)), InvalidArgument);
}

TEST(SymMatrixTest, Symmetrizes) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 4, 3;
  const SymMatrix s(m);
  EXPECT_EQ(s.matrix()(0, 1), 3.0);
  EXPECT_EQ(s.matrix()(1, 0), 3.0);
  EXPECT_THROW(SymMatrix(Eigen::MatrixXd::Ones(2, 3)), InvalidArgument);
}

TEST(SymEigTest, Identity) {
  const SpectralDecomposition d = sym_eig(SymMatrix(Eigen::MatrixXd::Identity(3, 3)));
  EXPECT_EQ(d.eigenvalues, Eigen::VectorXd::Ones(3));
  EXPECT_LT(orthonormality_residual(d.eigenvectors), 1e-15);
  EXPECT_EQ(d.effective_rank, 3);
}

TEST(SymEigTest, DiagonalKeepsBasisWithPositiveSigns) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m.diagonal() << 1, 4;
  const SpectralDecomposition d = sym_eig(SymMatrix(m));
  EXPECT_EQ(d.eigenvalues(0), 4.0);
  EXPECT_EQ(d.eigenvalues(1), 1.0);
  Eigen::MatrixXd expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(d.eigenvectors, expected);
}

TEST(SymEigTest, Random64AgainstPowerIterationAndEigen) {
  std::mt19937_64 rng(64);
  const Eigen::MatrixXd a = testing::random_symmetric(64, rng);
  const SpectralDecomposition d = sym_eig(SymMatrix(a));
  EXPECT_LT(reconstruction_error(a, d), 1e-8);
  EXPECT_LT(orthonormality_residual(d.eigenvectors), 1e-10);

  const auto top = testing::power_iteration_top(a, 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(d.eigenvalues(i), top[static_cast<std::size_t>(i)], 1e-6) << i;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
  const Eigen::VectorXd ascending = ref.eigenvalues();
  for (Index i = 0; i < 64; ++i) EXPECT_NEAR(d.eigenvalues(i), ascending(63 - i), 1e-9);
}

TEST(SymEigTest, EigenvaluesDescendAndSignConventionHolds) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = testing::random_symmetric(20, rng);
  const SpectralDecomposition d = sym_eig(SymMatrix(a));
  for (Index i = 1; i < 20; ++i) EXPECT_GE(d.eigenvalues(i - 1), d.eigenvalues(i));
  for (Index j = 0; j < 20; ++j) {
    Index arg = 0;
    d.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(d.eigenvectors(arg, j), 0.0);
  }
}

TEST(SymEigTest, DeterministicAcrossCalls) {
  std::mt19937_64 rng(6);
  const SymMatrix s(testing::random_symmetric(33, rng));
  const SpectralDecomposition a = sym_eig(s);
  const SpectralDecomposition b = sym_eig(s);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(SymEigTest, EffectiveRankCountsAboveThreshold) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m.diagonal() << 3, 1e-3, 1e-6, 0;
  EXPECT_EQ(sym_eig(SymMatrix(m)).effective_rank, 2);
  EXPECT_EQ(sym_eig(SymMatrix(m), 1e-2).effective_rank, 1);
}

TEST(SymEigTest, ExhaustedSweepBudgetReportsResidual) {
  std::mt19937_64 rng(7);
  const SymMatrix s(testing::random_symmetric(16, rng));
  try {
    sym_eig(s, kDefaultEps, JacobiOptions{1e-11, 1});
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(SymEigTest, OneByOne) {
  Eigen::MatrixXd m(1, 1);
  m << -2.5;
  const SpectralDecomposition d = sym_eig(SymMatrix(m));
  EXPECT_EQ(d.eigenvalues(0), -2.5);
  EXPECT_EQ(d.eigenvectors(0, 0), 1.0);
}

TEST(SpectralFunctionTest, IdentityCovarianceGivesIdentity) {
  const SpectralDecomposition d = sym_eig(SymMatrix(Eigen::MatrixXd::Identity(5, 5)));
  EXPECT_LT((whitening_matrix(d) - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-15);
  EXPECT_LT((coloring_matrix(d) - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-15);
}

TEST(SpectralFunctionTest, ScalarFour) {
  Eigen::MatrixXd m(1, 1);
  m << 4.0;
  const SpectralDecomposition d = sym_eig(SymMatrix(m));
  EXPECT_DOUBLE_EQ(whitening_matrix(d)(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(coloring_matrix(d)(0, 0), 2.0);
}

TEST(SpectralFunctionTest, RankDeficientWhiteningProjects) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd a(32, 16);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = dist(rng);
  const Eigen::MatrixXd c = a * a.transpose();
  const SpectralDecomposition d = sym_eig(SymMatrix(c));
  EXPECT_EQ(d.effective_rank, 16);

  // Orthogonal projector onto range(A), built from a QR factorization.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(32, 16);
  const Eigen::MatrixXd projector = q * q.transpose();

  const Eigen::MatrixXd w = whitening_matrix(d);
  EXPECT_LT((w * c * w.transpose() - projector).norm(), 1e-8);
  EXPECT_LT((retained_projector(d) - projector).norm(), 1e-8);
  const Eigen::MatrixXd k = coloring_matrix(d);
  EXPECT_LT((k * k - c).norm() / c.norm(), 1e-10);
}

TEST(SpectralFunctionTest, RankZeroIsDegenerate) {
  const SpectralDecomposition d = sym_eig(SymMatrix(Eigen::MatrixXd::Zero(3, 3)));
  EXPECT_EQ(d.effective_rank, 0);
  EXPECT_THROW(whitening_matrix(d), DegenerateInput);
  EXPECT_THROW(coloring_matrix(d), DegenerateInput);
}

}  // namespace
}  // namespace ust

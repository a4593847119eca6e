#pragma once

#include <Eigen/Dense>

#include "ust/error.hpp"
#include "ust/feature_matrix.hpp"

namespace ust {

// Default threshold below which covariance eigenvalues are dropped from the
// whitening/coloring subspace.
inline constexpr double kDefaultEps = 1e-5;

// Dense symmetric matrix in double precision. The constructor symmetrizes
// its input as (M + M^T) / 2.
class SymMatrix {
 public:
  SymMatrix() = default;

  template <typename Derived>
  explicit SymMatrix(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("SymMatrix: matrix is not square");
    Eigen::MatrixXd d = m.template cast<double>();
    data_ = 0.5 * (d + d.transpose());
  }

  Index dim() const noexcept { return data_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return data_; }

 private:
  Eigen::MatrixXd data_;
};

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues(i)
  Index effective_rank = 0;      // eigenvalues strictly above the threshold

  Index dim() const noexcept { return eigenvalues.size(); }
};

// (f - mean) (f - mean)^T / (N - 1) over the columns of a C x N sample
// matrix, accumulated in double.
template <typename Derived>
SymMatrix covariance(const Eigen::MatrixBase<Derived>& samples) {
  const Index n = samples.cols();
  if (n < 2) throw InvalidArgument("covariance: need at least 2 samples, got " + std::to_string(n));
  Eigen::MatrixXd centered = samples.template cast<double>();
  const Eigen::VectorXd mean = centered.rowwise().mean();
  centered.colwise() -= mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(centered.rows(), centered.rows());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  cov /= static_cast<double>(n - 1);
  return SymMatrix(cov);
}

template <typename Scalar>
SymMatrix covariance(const BasicFeatureMatrix<Scalar>& f) {
  return covariance(f.values());
}

struct JacobiOptions {
  // Converged when the off-diagonal Frobenius norm drops below
  // tolerance * ||S||_F.
  double tolerance = 1e-11;
  int max_sweeps = 64;
};

// Full eigendecomposition by cyclic Jacobi rotations. Output is deterministic:
// fixed (p, q) sweep order, eigenvalues sorted descending (ties keep the
// diagonal order) and each eigenvector's largest-magnitude component made
// positive. Throws NumericalFailure if the sweep budget runs out.
SpectralDecomposition sym_eig(const SymMatrix& s, double rank_threshold = kDefaultEps,
                              const JacobiOptions& options = {});

// E_k diag(lambda_k^{-1/2}) E_k^T over eigenpairs with lambda > eps.
Eigen::MatrixXd whitening_matrix(const SpectralDecomposition& d, double eps = kDefaultEps);

// E_k diag(lambda_k^{1/2}) E_k^T over eigenpairs with lambda > eps.
Eigen::MatrixXd coloring_matrix(const SpectralDecomposition& d, double eps = kDefaultEps);

// E_k E_k^T over the retained eigenpairs.
Eigen::MatrixXd retained_projector(const SpectralDecomposition& d, double eps = kDefaultEps);

}  // namespace ust

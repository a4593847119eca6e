#include "ust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ust {
namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Index q = 1; q < a.cols(); ++q) sum += a.col(q).head(q).squaredNorm();
  return std::sqrt(2.0 * sum);
}

struct Rotation {
  Index p, q;
  double c, s, t, app, aqq, apq;
};

// Rotation J that zeroes a(p, q) in J^T a J.
Rotation make_rotation(const Eigen::MatrixXd& a, Index p, Index q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  return {p, q, c, t * c, t, a(p, p), a(q, q), apq};
}

void rotate_columns(Eigen::MatrixXd& m, const Rotation& r) {
  double* cp = m.col(r.p).data();
  double* cq = m.col(r.q).data();
  for (Index k = 0; k < m.rows(); ++k) {
    const double x = cp[k];
    const double y = cq[k];
    cp[k] = r.c * x - r.s * y;
    cq[k] = r.s * x + r.c * y;
  }
}

// Applies a set of disjoint rotations as a -> J^T a J and v -> v J. Disjoint
// rotations commute, so this equals applying them one after another. Row
// updates run column by column to stay contiguous in column-major storage.
void apply_round(Eigen::MatrixXd& a, Eigen::MatrixXd& v, const std::vector<Rotation>& round) {
  for (const Rotation& r : round) {
    rotate_columns(a, r);
    rotate_columns(v, r);
  }
  for (Index k = 0; k < a.cols(); ++k) {
    double* col = a.col(k).data();
    for (const Rotation& r : round) {
      const double x = col[r.p];
      const double y = col[r.q];
      col[r.p] = r.c * x - r.s * y;
      col[r.q] = r.s * x + r.c * y;
    }
  }
  for (const Rotation& r : round) {
    a(r.p, r.p) = r.app - r.t * r.apq;
    a(r.q, r.q) = r.aqq + r.t * r.apq;
    a(r.p, r.q) = 0.0;
    a(r.q, r.p) = 0.0;
  }
}

Eigen::MatrixXd spectral_function(const SpectralDecomposition& d, double eps, double power,
                                  const char* what) {
  Index k = 0;
  while (k < d.dim() && d.eigenvalues(k) > eps) ++k;
  if (k == 0)
    throw DegenerateInput(std::string(what) + ": no eigenvalue above " + std::to_string(eps) +
                          " (rank-0 covariance)");
  const auto e = d.eigenvectors.leftCols(k);
  const Eigen::VectorXd scale = d.eigenvalues.head(k).array().pow(power).matrix();
  return e * scale.asDiagonal() * e.transpose();
}

}  // namespace

SpectralDecomposition sym_eig(const SymMatrix& s, double rank_threshold, const JacobiOptions& options) {
  const Index n = s.dim();
  if (n < 1) throw InvalidArgument("sym_eig: empty matrix");
  if (!s.matrix().allFinite()) throw InvalidArgument("sym_eig: non-finite input");

  Eigen::MatrixXd a = s.matrix();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.norm();
  const double target = options.tolerance * scale;
  // Entries this small are left alone: even all of them together stay an
  // order of magnitude under the convergence target.
  const double skip = 0.1 * target / static_cast<double>(n);

  double off = off_diagonal_norm(a);
  int sweep = 0;
  while (off > target) {
    if (sweep == options.max_sweeps)
      throw NumericalFailure("sym_eig: no convergence after " + std::to_string(options.max_sweeps) +
                                 " sweeps, off-diagonal residual " + std::to_string(off),
                             off);
    // Round-robin cyclic order: every pair once per sweep, n/2 disjoint
    // pairs per round. Index n is a bye when n is odd.
    const Index m = n + (n % 2);
    std::vector<Rotation> round;
    round.reserve(static_cast<std::size_t>(m / 2));
    for (Index r = 0; r + 1 < m; ++r) {
      round.clear();
      for (Index i = 0; i < m / 2; ++i) {
        Index p = i == 0 ? m - 1 : (r + i) % (m - 1);
        Index q = (r + m - 1 - i) % (m - 1);
        if (p > q) std::swap(p, q);
        if (q < n && std::abs(a(p, q)) > skip) round.push_back(make_rotation(a, p, q));
      }
      apply_round(a, v, round);
    }
    off = off_diagonal_norm(a);
    ++sweep;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&a](Index i, Index j) { return a(i, i) > a(j, j); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    out.eigenvalues(i) = a(src, src);
    auto col = v.col(src);
    Index pivot = 0;
    col.cwiseAbs().maxCoeff(&pivot);
    out.eigenvectors.col(i) = col(pivot) < 0.0 ? Eigen::VectorXd(-col) : Eigen::VectorXd(col);
  }
  out.effective_rank = (out.eigenvalues.array() > rank_threshold).count();
  return out;
}

Eigen::MatrixXd whitening_matrix(const SpectralDecomposition& d, double eps) {
  return spectral_function(d, eps, -0.5, "whitening_matrix");
}

Eigen::MatrixXd coloring_matrix(const SpectralDecomposition& d, double eps) {
  return spectral_function(d, eps, 0.5, "coloring_matrix");
}

Eigen::MatrixXd retained_projector(const SpectralDecomposition& d, double eps) {
  return spectral_function(d, eps, 0.0, "retained_projector");
}

}  // namespace ust

#pragma once

#include <span>
#include <vector>

#include "ust/feature_matrix.hpp"
#include "ust/linalg.hpp"

namespace ust {

// Second-order statistics of a style feature matrix, precomputed once so a
// single style can color many contents.
struct StyleStats {
  Eigen::VectorXd mean;
  SpectralDecomposition decomposition;
  double eps = kDefaultEps;
  Eigen::MatrixXd coloring;  // coloring_matrix(decomposition, eps)

  Index channels() const noexcept { return mean.size(); }
};

// W (fc - m_c), W the whitening matrix of cov(fc). The output covariance is
// the identity on the retained eigenspace (projector elsewhere).
FeatureMatrix whiten(const FeatureMatrix& fc, double eps = kDefaultEps);

StyleStats compute_style_stats(const FeatureMatrix& fs, double eps = kDefaultEps);

// K fhat + m_s, K the coloring matrix of the style covariance.
FeatureMatrix color(const FeatureMatrix& fhat, const StyleStats& stats);

// alpha * fcs + (1 - alpha) * fc. alpha == 0 and alpha == 1 return the
// respective input unchanged.
FeatureMatrix blend(const FeatureMatrix& fcs, const FeatureMatrix& fc, double alpha);

// whiten -> color -> blend.
FeatureMatrix wct(const FeatureMatrix& fc, const StyleStats& stats, double alpha, double eps = kDefaultEps);

// Channel-wise quantile mapping of fc onto the empirical distribution of fs.
FeatureMatrix histogram_match(const FeatureMatrix& fc, const FeatureMatrix& fs);

struct MaskedStyle {
  std::vector<std::uint8_t> mask;  // one entry per column of fc
  const StyleStats* stats = nullptr;
};

// Region-wise WCT: each region is whitened with its own mean/covariance,
// colored with its style and written back to its columns. Masks must be
// disjoint, non-empty and cover every column.
FeatureMatrix masked_wct(const FeatureMatrix& fc, std::span<const MaskedStyle> regions, double alpha,
                         double eps = kDefaultEps);

// sum_i beta_i * color(fhat, stats_i). Betas must lie in [0,1] and sum to 1
// within 1e-6; zero-weight terms are skipped.
FeatureMatrix interpolate_coloring(const FeatureMatrix& fhat, std::span<const StyleStats* const> stats,
                                   std::span<const double> betas);

// Columns of fc selected by mask, and the inverse scatter.
FeatureMatrix gather_columns(const FeatureMatrix& f, std::span<const std::uint8_t> mask);
void scatter_columns(FeatureMatrix::Matrix& dst, const FeatureMatrix& src, std::span<const std::uint8_t> mask);

}  // namespace ust

#include "ust/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ust {
namespace {

using MatrixRd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same_channels(Index a, Index b, const char* what) {
  if (a != b)
    throw InvalidArgument(std::string(what) + ": channel mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
}

}  // namespace

FeatureMatrix whiten(const FeatureMatrix& fc, double eps) {
  const SpectralDecomposition d = sym_eig(covariance(fc), eps);
  const Eigen::MatrixXd w = whitening_matrix(d, eps);
  MatrixRd centered = fc.values().cast<double>();
  centered.colwise() -= fc.mean().cast<double>();
  return FeatureMatrix((w * centered).cast<float>());
}

StyleStats compute_style_stats(const FeatureMatrix& fs, double eps) {
  StyleStats stats;
  stats.mean = fs.values().cast<double>().rowwise().mean();
  stats.decomposition = sym_eig(covariance(fs), eps);
  stats.eps = eps;
  stats.coloring = coloring_matrix(stats.decomposition, eps);
  return stats;
}

FeatureMatrix color(const FeatureMatrix& fhat, const StyleStats& stats) {
  require_same_channels(fhat.channels(), stats.channels(), "color");
  MatrixRd out = stats.coloring * fhat.values().cast<double>();
  out.colwise() += stats.mean;
  return FeatureMatrix(out.cast<float>());
}

FeatureMatrix blend(const FeatureMatrix& fcs, const FeatureMatrix& fc, double alpha) {
  if (fcs.channels() != fc.channels() || fcs.samples() != fc.samples())
    throw InvalidArgument("blend: shape mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("blend: alpha must lie in [0,1]");
  if (alpha == 0.0) return fc;
  if (alpha == 1.0) return fcs;
  const auto a = static_cast<float>(alpha);
  return FeatureMatrix(a * fcs.values() + (1.0f - a) * fc.values());
}

FeatureMatrix wct(const FeatureMatrix& fc, const StyleStats& stats, double alpha, double eps) {
  require_same_channels(fc.channels(), stats.channels(), "wct");
  return blend(color(whiten(fc, eps), stats), fc, alpha);
}

FeatureMatrix histogram_match(const FeatureMatrix& fc, const FeatureMatrix& fs) {
  require_same_channels(fc.channels(), fs.channels(), "histogram_match");
  const Index nc = fc.samples();
  const Index ns = fs.samples();
  FeatureMatrix::Matrix out(fc.channels(), nc);
  std::vector<Index> order(static_cast<std::size_t>(nc));
  std::vector<float> style(static_cast<std::size_t>(ns));

  for (Index c = 0; c < fc.channels(); ++c) {
    const auto content = fc.values().row(c);
    for (Index j = 0; j < ns; ++j) style[static_cast<std::size_t>(j)] = fs.values()(c, j);
    std::sort(style.begin(), style.end());

    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&content](Index a, Index b) { return content(a) < content(b); });

    for (Index r = 0; r < nc; ++r) {
      const double pos = nc > 1 ? static_cast<double>(r) * static_cast<double>(ns - 1) / static_cast<double>(nc - 1)
                                : 0.5 * static_cast<double>(ns - 1);
      const auto lo = static_cast<Index>(std::floor(pos));
      const Index hi = std::min(lo + 1, ns - 1);
      const double frac = pos - static_cast<double>(lo);
      const double lo_v = style[static_cast<std::size_t>(lo)];
      const double hi_v = style[static_cast<std::size_t>(hi)];
      const double v = frac == 0.0 ? lo_v : lo_v + frac * (hi_v - lo_v);
      out(c, order[static_cast<std::size_t>(r)]) = static_cast<float>(v);
    }
  }
  return FeatureMatrix(std::move(out));
}

FeatureMatrix gather_columns(const FeatureMatrix& f, std::span<const std::uint8_t> mask) {
  if (static_cast<Index>(mask.size()) != f.samples()) throw InvalidArgument("gather_columns: mask size mismatch");
  const auto n = static_cast<Index>(std::count_if(mask.begin(), mask.end(), [](auto v) { return v != 0; }));
  if (n == 0) throw InvalidArgument("gather_columns: empty mask");
  FeatureMatrix::Matrix out(f.channels(), n);
  Index k = 0;
  for (Index j = 0; j < f.samples(); ++j)
    if (mask[static_cast<std::size_t>(j)]) out.col(k++) = f.values().col(j);
  return FeatureMatrix(std::move(out));
}

void scatter_columns(FeatureMatrix::Matrix& dst, const FeatureMatrix& src, std::span<const std::uint8_t> mask) {
  if (static_cast<Index>(mask.size()) != dst.cols()) throw InvalidArgument("scatter_columns: mask size mismatch");
  Index k = 0;
  for (Index j = 0; j < dst.cols(); ++j)
    if (mask[static_cast<std::size_t>(j)]) {
      if (k >= src.samples()) throw InvalidArgument("scatter_columns: too few source columns");
      dst.col(j) = src.values().col(k++);
    }
  if (k != src.samples()) throw InvalidArgument("scatter_columns: source column count mismatch");
}

FeatureMatrix masked_wct(const FeatureMatrix& fc, std::span<const MaskedStyle> regions, double alpha, double eps) {
  if (regions.empty()) throw InvalidArgument("masked_wct: no regions");
  const auto n = static_cast<std::size_t>(fc.samples());
  std::vector<int> owners(n, 0);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& region = regions[r];
    if (region.mask.size() != n)
      throw InvalidArgument("masked_wct: region " + std::to_string(r) + " mask has " +
                            std::to_string(region.mask.size()) + " entries, expected " + std::to_string(n));
    if (region.stats == nullptr) throw InvalidArgument("masked_wct: region " + std::to_string(r) + " has no style");
    bool any = false;
    for (std::size_t j = 0; j < n; ++j)
      if (region.mask[j]) {
        any = true;
        if (++owners[j] > 1) throw InvalidArgument("masked_wct: masks overlap at column " + std::to_string(j));
      }
    if (!any) throw InvalidArgument("masked_wct: region " + std::to_string(r) + " is empty");
  }
  for (std::size_t j = 0; j < n; ++j)
    if (owners[j] == 0) throw InvalidArgument("masked_wct: column " + std::to_string(j) + " is not covered");

  FeatureMatrix::Matrix out(fc.channels(), fc.samples());
  for (const auto& region : regions) {
    const FeatureMatrix local = gather_columns(fc, region.mask);
    scatter_columns(out, wct(local, *region.stats, alpha, eps), region.mask);
  }
  return FeatureMatrix(std::move(out));
}

FeatureMatrix interpolate_coloring(const FeatureMatrix& fhat, std::span<const StyleStats* const> stats,
                                   std::span<const double> betas) {
  if (stats.empty() || stats.size() != betas.size())
    throw InvalidArgument("interpolate_coloring: need one beta per style");
  double total = 0.0;
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument("interpolate_coloring: beta outside [0,1]");
    total += b;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw InvalidArgument("interpolate_coloring: betas sum to " + std::to_string(total) + ", expected 1");

  FeatureMatrix::Matrix acc;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (betas[i] == 0.0) continue;
    const FeatureMatrix colored = color(fhat, *stats[i]);
    if (acc.size() == 0) {
      acc = betas[i] == 1.0 ? colored.values() : static_cast<float>(betas[i]) * colored.values();
    } else {
      acc += static_cast<float>(betas[i]) * colored.values();
    }
  }
  return FeatureMatrix(std::move(acc));
}

}  // namespace ust

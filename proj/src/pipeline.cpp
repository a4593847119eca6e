#include "ust/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ust {
namespace {

Index padded_size(Index n, int level) {
  const Index m = Index{1} << (level - 1);
  return (n + m - 1) / m * m;
}

void validate_regions(const ImageBuffer& content, const std::vector<StyleRegion>& regions) {
  if (regions.empty()) throw InvalidArgument("stylize_spatial: no regions");
  std::vector<int> owners(static_cast<std::size_t>(content.height() * content.width()), 0);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const Mask& m = regions[r].mask;
    if (m.height != content.height() || m.width != content.width())
      throw InvalidArgument("stylize_spatial: mask " + std::to_string(r) + " is " + std::to_string(m.height) + "x" +
                            std::to_string(m.width) + ", content is " + std::to_string(content.height()) + "x" +
                            std::to_string(content.width()));
    if (m.count() == 0) throw InvalidArgument("stylize_spatial: mask " + std::to_string(r) + " is empty");
    for (std::size_t i = 0; i < owners.size(); ++i)
      if (m.values[i] && ++owners[i] > 1) throw InvalidArgument("stylize_spatial: masks overlap");
  }
  if (std::find(owners.begin(), owners.end(), 0) != owners.end())
    throw InvalidArgument("stylize_spatial: masks do not cover the content image");
}

double level_alpha(const StylizationConfig& cfg, std::size_t index) {
  if (cfg.blend_per_level || index + 1 == cfg.levels.size()) return cfg.alpha;
  return 1.0;
}

FeatureMatrix apply_transform(const FeatureMatrix& fc, StyleCache& style, int level, double alpha,
                              const StylizationConfig& cfg) {
  if (cfg.transform == FeatureTransform::histogram_match)
    return blend(histogram_match(fc, style.features(level)), fc, alpha);
  return wct(fc, style.stats(level), alpha, cfg.eps);
}

ImageBuffer stylize_level(const ImageBuffer& content, StyleCache& style, int level, double alpha,
                          const StylizationConfig& cfg, const Model& model) {
  return transform_at_level(content, level, model, [&](const FeatureMatrix& fc, Index, Index) {
    return apply_transform(fc, style, level, alpha, cfg);
  });
}

}  // namespace

void StylizationConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0,1]");
  if (levels.empty()) throw InvalidArgument("levels must not be empty");
  std::set<int> seen;
  for (int l : levels) {
    require_level(l);
    if (!seen.insert(l).second) throw InvalidArgument("levels contain duplicate " + std::to_string(l));
  }
  if (!(style_scale > 0.0) || !std::isfinite(style_scale)) throw InvalidArgument("style_scale must be > 0");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be >= 0");
  if (passes < 1) throw InvalidArgument("passes must be >= 1");
}

ImageBuffer scale_style(const ImageBuffer& style, double scale) {
  if (scale == 1.0) return style;
  const auto h = std::max<Index>(1, static_cast<Index>(std::lround(static_cast<double>(style.height()) * scale)));
  const auto w = std::max<Index>(1, static_cast<Index>(std::lround(static_cast<double>(style.width()) * scale)));
  return resize_nearest(style, h, w);
}

StyleCache::StyleCache(const ImageBuffer& style, double style_scale, double eps, const Model& model)
    : style_(scale_style(style, style_scale)), eps_(eps), model_(&model) {
  if (style_.empty()) throw InvalidArgument("style image is empty");
}

const FeatureMatrix& StyleCache::features(int level) {
  auto it = features_.find(level);
  if (it == features_.end()) it = features_.emplace(level, to_feature_matrix(encode(style_, level, *model_))).first;
  return it->second;
}

const StyleStats& StyleCache::stats(int level) {
  auto it = stats_.find(level);
  if (it == stats_.end()) {
    const FeatureMatrix& fs = features(level);
    if (fs.samples() < 2)
      throw DegenerateInput("style image too small: level " + std::to_string(level) + " features have " +
                            std::to_string(fs.samples()) + " sample(s)");
    try {
      it = stats_.emplace(level, compute_style_stats(fs, eps_)).first;
    } catch (const DegenerateInput& e) {
      throw DegenerateInput("style has no usable statistics at level " + std::to_string(level) + ": " + e.what());
    }
  }
  return it->second;
}

ImageBuffer transform_at_level(const ImageBuffer& content, int level, const Model& model, const FeatureFn& fn) {
  require_level(level);
  if (content.empty()) throw InvalidArgument("content image is empty");
  const Index h = content.height();
  const Index w = content.width();
  const ImageBuffer padded = reflect_pad(content, padded_size(h, level) - h, padded_size(w, level) - w);
  Tensor3f feat = encode(padded, level, model);
  const Index fh = feat.height();
  const Index fw = feat.width();
  FeatureMatrix out = fn(to_feature_matrix(std::move(feat)), fh, fw);
  const ImageBuffer decoded = decode(from_feature_matrix(std::move(out), fh, fw), level, model);
  if (decoded.height() < h || decoded.width() < w)
    throw ConfigurationError("decoder" + std::to_string(level) + " output is smaller than its input image");
  return crop(decoded, h, w);
}

ImageBuffer reconstruct(const ImageBuffer& img, int level, const Model& model) {
  return transform_at_level(img, level, model, [](const FeatureMatrix& fc, Index, Index) { return fc; });
}

ImageBuffer stylize_single(const ImageBuffer& content, const ImageBuffer& style, int level,
                           const StylizationConfig& cfg, const Model& model) {
  cfg.validate();
  require_level(level);
  StyleCache cache(style, cfg.style_scale, cfg.eps, model);
  return stylize_level(content, cache, level, cfg.alpha, cfg, model);
}

ImageBuffer stylize_multi(const ImageBuffer& content, const ImageBuffer& style, const StylizationConfig& cfg,
                          const Model& model, const IntermediateSink& sink) {
  cfg.validate();
  StyleCache cache(style, cfg.style_scale, cfg.eps, model);
  ImageBuffer current = content;
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    current = stylize_level(current, cache, cfg.levels[i], level_alpha(cfg, i), cfg, model);
    if (sink) sink(cfg.levels[i], current);
  }
  return current;
}

ImageBuffer stylize_spatial(const ImageBuffer& content, const std::vector<StyleRegion>& regions,
                            const StylizationConfig& cfg, const Model& model, const IntermediateSink& sink) {
  cfg.validate();
  validate_regions(content, regions);
  std::vector<StyleCache> caches;
  caches.reserve(regions.size());
  for (const auto& r : regions) caches.emplace_back(r.style, cfg.style_scale, cfg.eps, model);

  ImageBuffer current = content;
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    const int level = cfg.levels[i];
    const double alpha = level_alpha(cfg, i);
    const Index ph = padded_size(content.height(), level) - content.height();
    const Index pw = padded_size(content.width(), level) - content.width();
    current = transform_at_level(current, level, model, [&](const FeatureMatrix& fc, Index fh, Index fw) {
      FeatureMatrix::Matrix out = fc.values();
      for (std::size_t r = 0; r < regions.size(); ++r) {
        const Mask m = resize_nearest(reflect_pad(regions[r].mask, ph, pw), fh, fw);
        if (m.count() < 2) continue;
        const FeatureMatrix local = gather_columns(fc, m.values);
        scatter_columns(out, apply_transform(local, caches[r], level, alpha, cfg), m.values);
      }
      return FeatureMatrix(std::move(out));
    });
    if (sink) sink(level, current);
  }
  return current;
}

ImageBuffer synthesize_texture(const ImageBuffer& style, Index height, Index width, const StylizationConfig& cfg,
                               const Model& model) {
  StylizationConfig c = cfg;
  c.alpha = 1.0;
  c.validate();
  StyleCache cache(style, c.style_scale, c.eps, model);
  ImageBuffer current = gaussian_noise_image(height, width, c.seed);
  for (int pass = 0; pass < c.passes; ++pass)
    for (std::size_t i = 0; i < c.levels.size(); ++i)
      current = stylize_level(current, cache, c.levels[i], 1.0, c, model);
  return current;
}

ImageBuffer interpolate_textures(const ImageBuffer& style_a, const ImageBuffer& style_b, double beta, Index height,
                                 Index width, const StylizationConfig& cfg, const Model& model) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0,1]");
  StylizationConfig c = cfg;
  c.alpha = 1.0;
  c.validate();
  StyleCache cache_a(style_a, c.style_scale, c.eps, model);
  StyleCache cache_b(style_b, c.style_scale, c.eps, model);
  const double betas[2] = {beta, 1.0 - beta};

  ImageBuffer current = gaussian_noise_image(height, width, c.seed);
  for (int pass = 0; pass < c.passes; ++pass)
    for (const int level : c.levels) {
      const StyleStats* stats[2] = {&cache_a.stats(level), &cache_b.stats(level)};
      current = transform_at_level(current, level, model, [&](const FeatureMatrix& fc, Index, Index) {
        return interpolate_coloring(whiten(fc, c.eps), stats, betas);
      });
    }
  return current;
}

StyleDistance style_distance(const ImageBuffer& result, const ImageBuffer& style, const Model& model) {
  StyleDistance d;
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    const SymMatrix a = covariance(to_feature_matrix(encode(result, level, model)));
    const SymMatrix b = covariance(to_feature_matrix(encode(style, level, model)));
    d.value += (a.matrix() - b.matrix()).norm();
  }
  d.log_value = d.value > 0.0 ? std::log(d.value) : -std::numeric_limits<double>::infinity();
  return d;
}

ImageBuffer whiten_viz(const ImageBuffer& img, int level, const Model& model, double eps) {
  require_level(level);
  if (img.empty()) throw InvalidArgument("whiten_viz: empty image");
  const Index h = img.height();
  const Index w = img.width();
  const ImageBuffer padded = reflect_pad(img, padded_size(h, level) - h, padded_size(w, level) - w);
  Tensor3f feat = encode(padded, level, model);
  const Index fh = feat.height();
  const Index fw = feat.width();
  FeatureMatrix white = whiten(to_feature_matrix(std::move(feat)), eps);
  Tensor3f raw = decode_raw(from_feature_matrix(std::move(white), fh, fw), level, model);
  ImageBuffer out = crop(ImageBuffer(std::move(raw)), h, w);

  auto& m = out.tensor().matrix();
  const float lo = m.minCoeff();
  const float hi = m.maxCoeff();
  if (hi > lo)
    m = ((m.array() - lo) / (hi - lo)).matrix();
  else
    m.setZero();
  return out.clamped();
}

}  // namespace ust

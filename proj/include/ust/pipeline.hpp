#pragma once

#include <functional>
#include <map>
#include <vector>

#include "ust/model.hpp"
#include "ust/transform.hpp"

namespace ust {

enum class FeatureTransform { wct, histogram_match };

struct StylizationConfig {
  double alpha = 0.6;                   // style weight
  std::vector<int> levels{5, 4, 3, 2, 1};  // applied in this order
  double style_scale = 1.0;             // style image resize factor
  double eps = kDefaultEps;             // eigenvalue truncation threshold
  // When false, alpha is applied at the last level only and every earlier
  // level transfers fully.
  bool blend_per_level = true;
  std::uint64_t seed = 0;  // texture noise
  int passes = 3;          // texture: repetitions of the multi-level fold
  FeatureTransform transform = FeatureTransform::wct;

  void validate() const;
};

struct StyleRegion {
  Mask mask;  // content resolution
  ImageBuffer style;
};

// Receives I_X after each level of a multi-level fold.
using IntermediateSink = std::function<void(int level, const ImageBuffer&)>;

// Per-level style features and statistics, computed on first use.
class StyleCache {
 public:
  StyleCache(const ImageBuffer& style, double style_scale, double eps, const Model& model);

  const FeatureMatrix& features(int level);
  const StyleStats& stats(int level);

 private:
  ImageBuffer style_;
  double eps_;
  const Model* model_;
  std::map<int, FeatureMatrix> features_;
  std::map<int, StyleStats> stats_;
};

ImageBuffer scale_style(const ImageBuffer& style, double scale);

// decode(encode(img, level)). The image is reflect-padded to a multiple of
// 2^(level-1) first and the output cropped back, so sizes always round-trip.
ImageBuffer reconstruct(const ImageBuffer& img, int level, const Model& model);

// Runs fn on the level-X content features between encode and decode, with
// the same padding rule as reconstruct. fn gets the features and their
// spatial size.
using FeatureFn = std::function<FeatureMatrix(const FeatureMatrix& fc, Index height, Index width)>;
ImageBuffer transform_at_level(const ImageBuffer& content, int level, const Model& model, const FeatureFn& fn);

ImageBuffer stylize_single(const ImageBuffer& content, const ImageBuffer& style, int level,
                           const StylizationConfig& cfg, const Model& model);

ImageBuffer stylize_multi(const ImageBuffer& content, const ImageBuffer& style, const StylizationConfig& cfg,
                          const Model& model, const IntermediateSink& sink = {});

// Regions must be disjoint and cover the content image. At each level the
// masks are downsampled to feature resolution; a region left with fewer
// than two feature columns keeps its content features at that level.
ImageBuffer stylize_spatial(const ImageBuffer& content, const std::vector<StyleRegion>& regions,
                            const StylizationConfig& cfg, const Model& model, const IntermediateSink& sink = {});

// Gaussian noise content run through cfg.passes multi-level folds with
// alpha forced to 1.
ImageBuffer synthesize_texture(const ImageBuffer& style, Index height, Index width, const StylizationConfig& cfg,
                               const Model& model);

ImageBuffer interpolate_textures(const ImageBuffer& style_a, const ImageBuffer& style_b, double beta, Index height,
                                 Index width, const StylizationConfig& cfg, const Model& model);

struct StyleDistance {
  double value = 0.0;      // L_s
  double log_value = 0.0;  // natural log; -inf when value == 0
};

// Sum over levels 1..5 of ||cov(encode(result)) - cov(encode(style))||_F.
StyleDistance style_distance(const ImageBuffer& result, const ImageBuffer& style, const Model& model);

// Decoded whitened features, linearly rescaled to span [0,1].
ImageBuffer whiten_viz(const ImageBuffer& img, int level, const Model& model, double eps = kDefaultEps);

}  // namespace ust

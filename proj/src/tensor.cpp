#include "ust/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ust {

Index Mask::count() const {
  return static_cast<Index>(std::count_if(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; }));
}

ImageBuffer resize_nearest(const ImageBuffer& img, Index height, Index width) {
  if (height == img.height() && width == img.width()) return img;
  return ImageBuffer(resize_nearest(img.tensor(), height, width));
}

Mask resize_nearest(const Mask& mask, Index height, Index width) {
  if (height < 1 || width < 1) throw InvalidArgument("resize_nearest: target size must be >= 1");
  if (mask.height < 1 || mask.width < 1) throw InvalidArgument("resize_nearest: empty mask");
  Mask out(height, width);
  for (Index y = 0; y < height; ++y) {
    const Index sy = nearest_source_index(y, mask.height, height);
    for (Index x = 0; x < width; ++x) out.set(y, x, mask(sy, nearest_source_index(x, mask.width, width)));
  }
  return out;
}

ImageBuffer gaussian_noise_image(Index height, Index width, std::uint64_t seed) {
  if (height < 1 || width < 1) throw InvalidArgument("gaussian_noise_image: size must be >= 1");
  constexpr double kMean = 0.5;
  constexpr double kStddev = 0.1;

  std::mt19937_64 rng(seed);
  // 53-bit uniform in (0, 1]; avoids log(0).
  auto uniform = [&rng]() { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; };

  ImageBuffer img(height, width);
  auto data = img.tensor().data();
  for (std::size_t i = 0; i < data.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    data[i] = static_cast<float>(std::clamp(kMean + kStddev * r * std::cos(theta), 0.0, 1.0));
    if (i + 1 < data.size())
      data[i + 1] = static_cast<float>(std::clamp(kMean + kStddev * r * std::sin(theta), 0.0, 1.0));
  }
  return img;
}

Mask mask_from_image(const ImageBuffer& img) {
  Mask m(img.height(), img.width());
  for (Index y = 0; y < img.height(); ++y)
    for (Index x = 0; x < img.width(); ++x)
      m.set(y, x, (img(0, y, x) + img(1, y, x) + img(2, y, x)) / 3.0f > 0.5f);
  return m;
}

Index reflect_index(Index i, Index n) {
  if (n == 1) return 0;
  const Index period = 2 * (n - 1);
  Index r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - r;
}

ImageBuffer reflect_pad(const ImageBuffer& img, Index bottom, Index right) {
  if (bottom == 0 && right == 0) return img;
  const Index h = img.height() + bottom;
  const Index w = img.width() + right;
  ImageBuffer out(h, w);
  for (Index c = 0; c < 3; ++c)
    for (Index y = 0; y < h; ++y) {
      const Index sy = reflect_index(y, img.height());
      for (Index x = 0; x < w; ++x) out(c, y, x) = img(c, sy, reflect_index(x, img.width()));
    }
  return out;
}

Mask reflect_pad(const Mask& mask, Index bottom, Index right) {
  if (bottom == 0 && right == 0) return mask;
  Mask out(mask.height + bottom, mask.width + right);
  for (Index y = 0; y < out.height; ++y) {
    const Index sy = reflect_index(y, mask.height);
    for (Index x = 0; x < out.width; ++x) out.set(y, x, mask(sy, reflect_index(x, mask.width)));
  }
  return out;
}

ImageBuffer crop(const ImageBuffer& img, Index height, Index width) {
  if (height > img.height() || width > img.width())
    throw InvalidArgument("crop: target larger than source");
  if (height == img.height() && width == img.width()) return img;
  ImageBuffer out(height, width);
  for (Index c = 0; c < 3; ++c)
    for (Index y = 0; y < height; ++y)
      for (Index x = 0; x < width; ++x) out(c, y, x) = img(c, y, x);
  return out;
}

}  // namespace ust

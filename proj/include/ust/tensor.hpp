#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ust/error.hpp"

namespace ust {

using Index = Eigen::Index;

// Dense C x H x W tensor, channel-major. Storage is a row-major C x (H*W)
// Eigen matrix so element (c, y, x) lives at c*H*W + y*W + x and the
// per-channel flattening used by the feature transforms is the storage
// itself.
template <typename Scalar>
class Tensor3 {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tensor3() = default;

  Tensor3(Index channels, Index height, Index width)
      : height_(height), width_(width), data_(Matrix::Zero(channels, height * width)) {
    if (channels < 0 || height < 0 || width < 0)
      throw InvalidArgument("Tensor3: negative dimension");
  }

  Tensor3(Index height, Index width, Matrix data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.cols() != height * width)
      throw InvalidArgument("Tensor3: matrix has " + std::to_string(data_.cols()) +
                            " columns, expected " + std::to_string(height * width));
  }

  static Tensor3 Constant(Index channels, Index height, Index width, Scalar value) {
    return Tensor3(height, width, Matrix::Constant(channels, height * width, value));
  }

  Index channels() const noexcept { return data_.rows(); }
  Index height() const noexcept { return height_; }
  Index width() const noexcept { return width_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.size() == 0; }

  Scalar& operator()(Index c, Index y, Index x) { return data_(c, y * width_ + x); }
  Scalar operator()(Index c, Index y, Index x) const { return data_(c, y * width_ + x); }

  // C x (H*W) view.
  Matrix& matrix() noexcept { return data_; }
  const Matrix& matrix() const noexcept { return data_; }

  std::span<Scalar> data() noexcept { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<const Scalar> data() const noexcept {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }

  Scalar* channel_data(Index c) noexcept { return data_.data() + c * height_ * width_; }
  const Scalar* channel_data(Index c) const noexcept { return data_.data() + c * height_ * width_; }

  bool same_shape(const Tensor3& other) const noexcept {
    return channels() == other.channels() && height_ == other.height_ && width_ == other.width_;
  }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  Index height_ = 0;
  Index width_ = 0;
  Matrix data_;
};

using Tensor3f = Tensor3<float>;
using Tensor3d = Tensor3<double>;

// An RGB image with values nominally in [0,1]. Held as a 3-channel tensor so
// it can be fed to the encoder without conversion.
class ImageBuffer {
 public:
  ImageBuffer() : pixels_(3, 0, 0) {}
  ImageBuffer(Index height, Index width) : pixels_(3, height, width) {}
  explicit ImageBuffer(Tensor3f rgb) : pixels_(std::move(rgb)) {
    if (pixels_.channels() != 3)
      throw InvalidArgument("ImageBuffer: expected 3 channels, got " +
                            std::to_string(pixels_.channels()));
  }

  Index height() const noexcept { return pixels_.height(); }
  Index width() const noexcept { return pixels_.width(); }
  bool empty() const noexcept { return pixels_.empty(); }

  float& operator()(Index c, Index y, Index x) { return pixels_(c, y, x); }
  float operator()(Index c, Index y, Index x) const { return pixels_(c, y, x); }

  const Tensor3f& tensor() const noexcept { return pixels_; }
  Tensor3f& tensor() noexcept { return pixels_; }

  ImageBuffer clamped() const {
    Tensor3f t = pixels_;
    t.matrix() = t.matrix().cwiseMax(0.0f).cwiseMin(1.0f);
    return ImageBuffer(std::move(t));
  }

  friend bool operator==(const ImageBuffer& a, const ImageBuffer& b) { return a.pixels_ == b.pixels_; }

 private:
  Tensor3f pixels_;
};

// Row-major boolean map, used for spatial-control masks.
struct Mask {
  Index height = 0;
  Index width = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(Index h, Index w, bool fill = false)
      : height(h), width(w), values(static_cast<std::size_t>(h * w), fill ? 1 : 0) {}

  bool operator()(Index y, Index x) const { return values[static_cast<std::size_t>(y * width + x)] != 0; }
  void set(Index y, Index x, bool v) { values[static_cast<std::size_t>(y * width + x)] = v ? 1 : 0; }
  Index count() const;
};

// Source index for nearest-neighbour resampling of one axis:
// floor((dst + 0.5) * src / dst), clamped to the source range.
inline Index nearest_source_index(Index dst_index, Index src_size, Index dst_size) {
  const double pos = (static_cast<double>(dst_index) + 0.5) * static_cast<double>(src_size) /
                     static_cast<double>(dst_size);
  const auto idx = static_cast<Index>(std::floor(pos));
  return idx < src_size ? idx : src_size - 1;
}

template <typename Scalar>
Tensor3<Scalar> resize_nearest(const Tensor3<Scalar>& src, Index height, Index width) {
  if (height < 1 || width < 1) throw InvalidArgument("resize_nearest: target size must be >= 1");
  if (src.height() < 1 || src.width() < 1) throw InvalidArgument("resize_nearest: empty source");
  Tensor3<Scalar> out(src.channels(), height, width);
  for (Index y = 0; y < height; ++y) {
    const Index sy = nearest_source_index(y, src.height(), height);
    for (Index x = 0; x < width; ++x) {
      const Index sx = nearest_source_index(x, src.width(), width);
      for (Index c = 0; c < src.channels(); ++c) out(c, y, x) = src(c, sy, sx);
    }
  }
  return out;
}

ImageBuffer resize_nearest(const ImageBuffer& img, Index height, Index width);
Mask resize_nearest(const Mask& mask, Index height, Index width);

// I.i.d. Gaussian samples with mean 0.5 and standard deviation 0.1, clamped
// to [0,1]. Uses std::mt19937_64 plus Box-Muller so the stream is fixed for a
// given seed on every standard library.
ImageBuffer gaussian_noise_image(Index height, Index width, std::uint64_t seed);

// Pixels brighter than 0.5 (mean over RGB) are true.
Mask mask_from_image(const ImageBuffer& img);

// Pads bottom/right by reflecting about the last row/column (no edge
// repetition). Reflection repeats periodically when the pad exceeds the size.
Index reflect_index(Index i, Index n);
ImageBuffer reflect_pad(const ImageBuffer& img, Index bottom, Index right);
Mask reflect_pad(const Mask& mask, Index bottom, Index right);
ImageBuffer crop(const ImageBuffer& img, Index height, Index width);

}  // namespace ust

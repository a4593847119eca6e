#include "ust/layers.hpp"

#include <algorithm>

namespace ust {
namespace {

using RowMatrixf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Padded copy of the input laid out as C planes of (H+2) x (W+2), followed
// by two spare zeros so every shifted window below stays in bounds.
std::vector<float> pad_input(const Tensor3f& input, PadMode pad) {
  const Index h = input.height();
  const Index w = input.width();
  const Index ph = h + 2;
  const Index pw = w + 2;
  const Index plane = ph * pw;
  std::vector<float> out(static_cast<std::size_t>(input.channels() * plane + 2), 0.0f);

  auto src_index = [pad](Index i, Index n) -> Index {
    if (i >= 0 && i < n) return i;
    if (pad == PadMode::zero) return -1;
    // Reflect without repeating the border; a size-1 axis replicates.
    if (n == 1) return 0;
    return i < 0 ? -i : 2 * (n - 1) - i;
  };

  for (Index c = 0; c < input.channels(); ++c) {
    const float* src = input.channel_data(c);
    float* dst = out.data() + c * plane;
    for (Index y = -1; y <= h; ++y) {
      const Index sy = src_index(y, h);
      float* row = dst + (y + 1) * pw;
      if (sy < 0) continue;
      const float* src_row = src + sy * w;
      std::copy(src_row, src_row + w, row + 1);
      const Index left = src_index(-1, w);
      const Index right = src_index(w, w);
      if (left >= 0) row[0] = src_row[left];
      if (right >= 0) row[w + 1] = src_row[right];
    }
  }
  return out;
}

}  // namespace

Tensor3f conv3x3(const Tensor3f& input, std::span<const float> weights, std::span<const float> bias,
                 Index out_channels, PadMode pad) {
  const Index in_channels = input.channels();
  if (static_cast<Index>(weights.size()) != out_channels * in_channels * 9)
    throw InvalidArgument("conv3x3: weight tensor has " + std::to_string(weights.size()) + " values, expected " +
                          std::to_string(out_channels) + "x" + std::to_string(in_channels) + "x3x3");
  if (static_cast<Index>(bias.size()) != out_channels)
    throw InvalidArgument("conv3x3: bias has " + std::to_string(bias.size()) + " values, expected " +
                          std::to_string(out_channels));
  const Index h = input.height();
  const Index w = input.width();
  if (h < 1 || w < 1) throw InvalidArgument("conv3x3: empty input");

  const Index pw = w + 2;
  const Index plane = (h + 2) * pw;
  const std::vector<float> padded = pad_input(input, pad);

  // Compute over an H x (W+2) grid so each tap is a plain GEMM against a
  // strided view of the padded planes; the two extra columns are discarded.
  const Index span_cols = h * pw;
  RowMatrixf acc = RowMatrixf::Zero(out_channels, span_cols);
  RowMatrixf tap(out_channels, in_channels);
  using PlaneView = Eigen::Map<const RowMatrixf, Eigen::Unaligned, Eigen::OuterStride<>>;
  for (Index ky = 0; ky < 3; ++ky)
    for (Index kx = 0; kx < 3; ++kx) {
      for (Index o = 0; o < out_channels; ++o)
        for (Index i = 0; i < in_channels; ++i)
          tap(o, i) = weights[static_cast<std::size_t>(((o * in_channels + i) * 3 + ky) * 3 + kx)];
      PlaneView shifted(padded.data() + ky * pw + kx, in_channels, span_cols, Eigen::OuterStride<>(plane));
      acc.noalias() += tap * shifted;
    }

  Tensor3f out(out_channels, h, w);
  for (Index o = 0; o < out_channels; ++o) {
    float* dst = out.channel_data(o);
    const float b = bias[static_cast<std::size_t>(o)];
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) dst[y * w + x] = acc(o, y * pw + x) + b;
  }
  return out;
}

Tensor3f relu(Tensor3f t) {
  t.matrix() = t.matrix().cwiseMax(0.0f);
  return t;
}

Tensor3f maxpool2(const Tensor3f& t) {
  const Index oh = t.height() / 2;
  const Index ow = t.width() / 2;
  if (oh < 1 || ow < 1) throw InvalidArgument("maxpool2: input smaller than 2x2");
  Tensor3f out(t.channels(), oh, ow);
  for (Index c = 0; c < t.channels(); ++c)
    for (Index y = 0; y < oh; ++y)
      for (Index x = 0; x < ow; ++x)
        out(c, y, x) = std::max(std::max(t(c, 2 * y, 2 * x), t(c, 2 * y, 2 * x + 1)),
                                std::max(t(c, 2 * y + 1, 2 * x), t(c, 2 * y + 1, 2 * x + 1)));
  return out;
}

Tensor3f upsample_nearest2(const Tensor3f& t) {
  Tensor3f out(t.channels(), 2 * t.height(), 2 * t.width());
  for (Index c = 0; c < t.channels(); ++c)
    for (Index y = 0; y < out.height(); ++y)
      for (Index x = 0; x < out.width(); ++x) out(c, y, x) = t(c, y / 2, x / 2);
  return out;
}

}  // namespace ust

#pragma once

#include <span>

#include "ust/tensor.hpp"

namespace ust {

enum class PadMode { zero, reflect };

// Same-size 3x3 cross-correlation with one pixel of padding.
// weights: out x in x 3 x 3 (row-major), bias: out.
Tensor3f conv3x3(const Tensor3f& input, std::span<const float> weights, std::span<const float> bias,
                 Index out_channels, PadMode pad);

Tensor3f relu(Tensor3f t);

// 2x2 stride-2 max pooling; an odd trailing row/column is dropped.
Tensor3f maxpool2(const Tensor3f& t);

Tensor3f upsample_nearest2(const Tensor3f& t);

}  // namespace ust

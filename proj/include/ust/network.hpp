#pragma once

#include <string>
#include <vector>

#include "ust/layers.hpp"
#include "ust/weights.hpp"

namespace ust {

enum class LayerKind { conv3x3, relu, maxpool2, upsample_nearest2, preprocess, postprocess };
enum class Direction { encoder, decoder };

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  PadMode pad = PadMode::reflect;  // conv only
  std::string weight_name;         // conv only
  std::string bias_name;           // conv only
  Index in_channels = 0;
  Index out_channels = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Network {
  std::vector<LayerSpec> layers;
  int level = 1;
  Direction direction = Direction::encoder;

  Index input_channels() const { return layers.empty() ? 0 : layers.front().in_channels; }
  Index output_channels() const { return layers.empty() ? 0 : layers.back().out_channels; }
  // Number of 2x2 pooling (encoder) or upsampling (decoder) layers.
  int resolution_steps() const;
};

// Text form, one layer per line ('#' starts a comment):
//   kind [pad_mode] [weight_name bias_name] in->out
// e.g. "conv3x3 reflect conv1_1.weight conv1_1.bias 3->64", "relu 64->64".
Network parse_network(const std::string& text, Direction direction, int level);
std::string format_network(const Network& net);

// Structural checks (channel chaining, end-points, level semantics) plus
// resolution of every referenced tensor in the store with matching shape.
void validate_network(const Network& net, const WeightStore& store);

std::string to_string(LayerKind kind);
std::string to_string(Direction direction);

}  // namespace ust

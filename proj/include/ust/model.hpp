#pragma once

#include <array>
#include <filesystem>
#include <optional>

#include "ust/network.hpp"
#include "ust/tensor.hpp"
#include "ust/weights.hpp"

namespace ust {

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

// Weight store plus the encoder/decoder pair for each available level.
// Immutable after construction; safe to share between threads.
class Model {
 public:
  // Directory layout: weights.wctw, encoder<X>.net, decoder<X>.net.
  // Levels whose spec files are absent are simply unavailable.
  static Model load(const std::filesystem::path& dir);

  Model(WeightStore store, std::vector<Network> networks);

  const WeightStore& weights() const noexcept { return store_; }
  const Preprocessing& preprocessing() const noexcept { return pre_; }

  bool has_level(int level) const;
  const Network& encoder(int level) const;
  const Network& decoder(int level) const;

  // Channel count of the Relu_X_1 features.
  Index feature_channels(int level) const { return encoder(level).output_channels(); }

  Tensor3f run(const Network& net, Tensor3f input) const;

 private:
  WeightStore store_;
  Preprocessing pre_;
  std::array<std::optional<Network>, kMaxLevel> encoders_;
  std::array<std::optional<Network>, kMaxLevel> decoders_;
};

void require_level(int level);

// Relu_X_1 features: preprocess, then the level-X encoder.
Tensor3f encode(const ImageBuffer& img, int level, const Model& model);

// Decoder output with the preprocessing undone but no clamping.
Tensor3f decode_raw(const Tensor3f& features, int level, const Model& model);

// decode_raw clamped to [0,1].
ImageBuffer decode(const Tensor3f& features, int level, const Model& model);

// ||Io - Ii||^2 + lambda ||encode(Io) - encode(Ii)||^2, both plain sums of
// squares (no averaging over pixels).
double reconstruction_loss(const ImageBuffer& input, const ImageBuffer& output, double lambda, int level,
                           const Model& model);

// Reference activations written next to an exporter run: <stem>.f32 holds
// raw little-endian floats, <stem>.shape the text "C H W".
Tensor3f load_reference_activation(const std::filesystem::path& stem);
void save_reference_activation(const Tensor3f& t, const std::filesystem::path& stem);

}  // namespace ust

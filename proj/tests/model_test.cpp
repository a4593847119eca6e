#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "ust/image_io.hpp"
#include "ust/model.hpp"
#include "ust/network.hpp"

namespace ust {
namespace {

using testing::fixture_model;

WeightTensor identity_kernel(Index channels) {
  WeightTensor t;
  t.shape = {static_cast<std::uint32_t>(channels), static_cast<std::uint32_t>(channels), 3, 3};
  t.data.assign(static_cast<std::size_t>(channels * channels * 9), 0.0f);
  for (Index c = 0; c < channels; ++c) t.data[static_cast<std::size_t>((c * channels + c) * 9 + 4)] = 1.0f;
  return t;
}

// Level-1 model whose convolutions are identities, so encode/decode expose
// the preprocessing exactly.
Model identity_model(const std::map<std::string, std::string>& metadata) {
  WeightStore store;
  store.metadata() = metadata;
  store.add("e.weight", identity_kernel(3));
  store.add("e.bias", {{3}, {0, 0, 0}});
  store.add("d.weight", identity_kernel(3));
  store.add("d.bias", {{3}, {0, 0, 0}});
  std::vector<Network> nets;
  nets.push_back(parse_network("preprocess 3->3\nconv3x3 reflect e.weight e.bias 3->3\nrelu 3->3\n",
                               Direction::encoder, 1));
  nets.push_back(parse_network("conv3x3 d.weight d.bias 3->3\npostprocess 3->3\n", Direction::decoder, 1));
  return Model(std::move(store), std::move(nets));
}

TEST(NetworkSpecTest, ParsesAndFormats) {
  const std::string text =
      "# comment line\n"
      "preprocess 3->3\n"
      "conv3x3 reflect conv1_1.weight conv1_1.bias 3->64   # trailing\n"
      "\n"
      "relu 64->64\n"
      "conv3x3 zero a b 64->8\n"
      "conv3x3 c d 8->8\n"
      "maxpool2 8->8\n";
  const Network net = parse_network(text, Direction::encoder, 2);
  ASSERT_EQ(net.layers.size(), 6u);
  EXPECT_EQ(net.layers[1].kind, LayerKind::conv3x3);
  EXPECT_EQ(net.layers[1].pad, PadMode::reflect);
  EXPECT_EQ(net.layers[1].weight_name, "conv1_1.weight");
  EXPECT_EQ(net.layers[1].out_channels, 64);
  EXPECT_EQ(net.layers[3].pad, PadMode::zero);
  EXPECT_EQ(net.layers[4].pad, PadMode::reflect);
  EXPECT_EQ(net.resolution_steps(), 1);
  EXPECT_EQ(net.input_channels(), 3);
  EXPECT_EQ(net.output_channels(), 8);
  EXPECT_EQ(parse_network(format_network(net), Direction::encoder, 2).layers, net.layers);
}

TEST(NetworkSpecTest, RejectsMalformedLines) {
  EXPECT_THROW(parse_network("softmax 3->3\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(parse_network("relu 3-3\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(parse_network("relu 3->x\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(parse_network("relu extra 3->3\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(parse_network("conv3x3 w 3->3\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(parse_network("conv3x3 mirror w b 3->3\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(parse_network("# nothing\n", Direction::encoder, 1), ConfigurationError);
}

TEST(NetworkSpecTest, ShippedVgg19SpecsHaveReferenceChannelCounts) {
  const std::filesystem::path dir = UST_NETWORK_DIR;
  const Index expected[] = {64, 128, 256, 512, 512};
  for (int level = 1; level <= 5; ++level) {
    std::ifstream enc(dir / ("encoder" + std::to_string(level) + ".net"));
    std::ifstream dec(dir / ("decoder" + std::to_string(level) + ".net"));
    ASSERT_TRUE(enc && dec) << level;
    const Network e = parse_network({std::istreambuf_iterator<char>(enc), {}}, Direction::encoder, level);
    const Network d = parse_network({std::istreambuf_iterator<char>(dec), {}}, Direction::decoder, level);
    EXPECT_EQ(e.output_channels(), expected[level - 1]) << level;
    EXPECT_EQ(e.resolution_steps(), level - 1);
    EXPECT_EQ(d.input_channels(), expected[level - 1]);
    EXPECT_EQ(d.output_channels(), 3);
    EXPECT_EQ(d.resolution_steps(), level - 1);
  }
}

TEST(ValidateNetworkTest, StructuralErrors) {
  WeightStore store;
  store.add("w", identity_kernel(3));
  store.add("b", {{3}, {0, 0, 0}});
  store.add("b4", {{4}, {0, 0, 0, 0}});
  auto check = [&](const std::string& text, Direction d, int level) {
    validate_network(parse_network(text, d, level), store);
  };
  EXPECT_NO_THROW(check("conv3x3 w b 3->3\nrelu 3->3\n", Direction::encoder, 1));
  // Channel chain broken.
  EXPECT_THROW(check("conv3x3 w b 3->3\nrelu 4->4\n", Direction::encoder, 1), ConfigurationError);
  // Encoder must end on relu.
  EXPECT_THROW(check("conv3x3 w b 3->3\n", Direction::encoder, 1), ConfigurationError);
  // Pooling count must match the level.
  EXPECT_THROW(check("conv3x3 w b 3->3\nrelu 3->3\n", Direction::encoder, 2), ConfigurationError);
  EXPECT_THROW(check("conv3x3 w b 3->3\nmaxpool2 3->3\nrelu 3->3\n", Direction::encoder, 1), ConfigurationError);
  // Missing and mis-shaped tensors.
  EXPECT_THROW(check("conv3x3 w nope 3->3\nrelu 3->3\n", Direction::encoder, 1), ConfigurationError);
  EXPECT_THROW(check("conv3x3 w b4 3->3\nrelu 3->3\n", Direction::encoder, 1), ConfigurationError);
  // Decoder must emit an image.
  store.add("w4", {{4, 3, 3, 3}, std::vector<float>(4 * 3 * 9, 0.0f)});
  EXPECT_THROW(check("conv3x3 w4 b4 3->4\n", Direction::decoder, 1), ConfigurationError);
  EXPECT_NO_THROW(check("conv3x3 w b 3->3\n", Direction::decoder, 1));
  EXPECT_THROW(check("upsample_nearest2 3->3\nconv3x3 w b 3->3\n", Direction::decoder, 1), ConfigurationError);
}

TEST(ModelTest, PreprocessingComesFromMetadata) {
  const Model model = identity_model({{"mean", "0.1 0.2 0.3"}, {"scale", "2"}, {"channel_order", "bgr"}});
  ImageBuffer img(2, 2);
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < 4; ++i) img.tensor().data()[static_cast<std::size_t>(c * 4 + i)] = 0.2f * (c + 1) + 0.01f * i;
  const Tensor3f f = encode(img, 1, model);
  for (Index y = 0; y < 2; ++y)
    for (Index x = 0; x < 2; ++x) {
      EXPECT_FLOAT_EQ(f(0, y, x), 2.0f * img(2, y, x) - 0.1f);
      EXPECT_FLOAT_EQ(f(1, y, x), 2.0f * img(1, y, x) - 0.2f);
      EXPECT_FLOAT_EQ(f(2, y, x), 2.0f * img(0, y, x) - 0.3f);
    }
  EXPECT_LT(testing::max_abs_diff(decode_raw(f, 1, model), img.tensor()), 1e-6);
}

TEST(ModelTest, LevelsAndChannels) {
  const Model& model = fixture_model();
  const Index expected[] = {8, 16, 32, 32, 32};
  for (int level = 1; level <= 5; ++level) {
    EXPECT_TRUE(model.has_level(level));
    EXPECT_EQ(model.feature_channels(level), expected[level - 1]);
  }
  EXPECT_FALSE(model.has_level(0));
  EXPECT_FALSE(model.has_level(6));
  EXPECT_THROW(model.encoder(6), InvalidArgument);
  EXPECT_THROW(identity_model({}).encoder(2), ConfigurationError);
}

TEST(ModelTest, SpatialSizeHalvesPerLevelWithFloor) {
  const Model& model = fixture_model();
  const ImageBuffer square = testing::procedural_image(0, 32, 1);
  const ImageBuffer odd = crop(testing::procedural_image(1, 37, 2), 37, 23);
  for (int level = 1; level <= 5; ++level) {
    const Tensor3f f = encode(square, level, model);
    EXPECT_EQ(f.height(), 32 >> (level - 1));
    EXPECT_EQ(f.width(), 32 >> (level - 1));
    EXPECT_EQ(decode(f, level, model).height(), 32);

    Index h = 37, w = 23;
    for (int i = 1; i < level; ++i) {
      h /= 2;
      w /= 2;
    }
    const Tensor3f g = encode(odd, level, model);
    EXPECT_EQ(g.height(), h) << level;
    EXPECT_EQ(g.width(), w) << level;
  }
}

TEST(ModelTest, EncodeMatchesExporterReference) {
  const Model& model = fixture_model();
  const ImageBuffer img = load_image(testing::fixture_dir() / "reference" / "input.png");
  for (int level = 1; level <= 5; ++level) {
    const Tensor3f ref =
        load_reference_activation(testing::fixture_dir() / "reference" / ("relu" + std::to_string(level) + "_1"));
    const Tensor3f got = encode(img, level, model);
    ASSERT_TRUE(got.same_shape(ref)) << level;
    EXPECT_LT(testing::max_abs_diff(got, ref), 1e-3) << level;
  }
}

TEST(ModelTest, EvaluationIsPure) {
  const Model& model = fixture_model();
  const ImageBuffer img = testing::procedural_image(2, 16, 3);
  EXPECT_EQ(encode(img, 3, model), encode(img, 3, model));
  const Tensor3f f = encode(img, 3, model);
  EXPECT_EQ(decode(f, 3, model), decode(f, 3, model));
}

TEST(ModelTest, ZeroFeaturesDecodeToValidImage) {
  const Model& model = fixture_model();
  for (int level = 1; level <= 5; ++level) {
    const Index s = 16 >> (level - 1);
    const ImageBuffer out = decode(Tensor3f(model.feature_channels(level), s, s), level, model);
    EXPECT_EQ(out.height(), 16);
    EXPECT_TRUE(out.tensor().all_finite());
    EXPECT_GE(out.tensor().matrix().minCoeff(), 0.0f);
    EXPECT_LE(out.tensor().matrix().maxCoeff(), 1.0f);
  }
}

TEST(ModelTest, WrongChannelCountIsInvalidArgument) {
  const Model& model = fixture_model();
  EXPECT_THROW(decode(Tensor3f(model.feature_channels(2) + 1, 4, 4), 2, model), InvalidArgument);
  EXPECT_THROW(decode(Tensor3f(model.feature_channels(2) - 1, 4, 4), 2, model), InvalidArgument);
}

TEST(ModelTest, ReconstructionLoss) {
  const Model& model = fixture_model();
  const ImageBuffer a = testing::procedural_image(3, 16, 4);
  const ImageBuffer b = testing::procedural_image(4, 16, 5);
  EXPECT_EQ(reconstruction_loss(a, a, 1.0, 3, model), 0.0);

  double direct = 0.0;
  for (std::size_t i = 0; i < a.tensor().data().size(); ++i) {
    const double d = static_cast<double>(b.tensor().data()[i]) - a.tensor().data()[i];
    direct += d * d;
  }
  EXPECT_NEAR(reconstruction_loss(a, b, 0.0, 3, model), direct, 1e-9 * direct);
  EXPECT_GT(reconstruction_loss(a, b, 1.0, 3, model), direct);
  EXPECT_THROW(reconstruction_loss(a, testing::procedural_image(4, 8, 5), 1.0, 3, model), InvalidArgument);
}

TEST(ModelTest, LoadErrors) {
  EXPECT_THROW(Model::load(testing::temp_dir("model_missing") / "nope"), IoError);
  const auto dir = testing::temp_dir("model_bad");
  std::filesystem::copy_file(testing::fixture_dir() / "weights.wctw", dir / "weights.wctw");
  EXPECT_THROW(Model::load(dir), ConfigurationError);  // no specs
  {
    std::ofstream(dir / "encoder1.net") << "preprocess 3->3\nconv3x3 reflect conv1_1.weight conv1_1.bias 3->9\nrelu 9->9\n";
  }
  EXPECT_THROW(Model::load(dir), ConfigurationError);  // shape mismatch
}

TEST(ReferenceActivationTest, RoundTrip) {
  std::mt19937_64 rng(9);
  const Tensor3f t = testing::random_tensor(5, 3, 4, rng);
  const auto dir = testing::temp_dir("refact");
  save_reference_activation(t, dir / "x");
  EXPECT_EQ(load_reference_activation(dir / "x"), t);
  std::filesystem::resize_file(dir / "x.f32", 10);
  EXPECT_THROW(load_reference_activation(dir / "x"), FormatError);
}

}  // namespace
}  // namespace ust

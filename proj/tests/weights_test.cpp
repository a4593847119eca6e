#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "test_support.hpp"
#include "ust/weights.hpp"

namespace ust {
namespace {

WeightStore synthetic_store() {
  std::mt19937_64 rng(7);
  WeightStore store;
  store.metadata()["mean"] = "0.485 0.456 0.406";
  store.metadata()["scale"] = "255";
  store.metadata()["channel_order"] = "bgr";
  store.add("conv1_1.weight", {{4, 3, 3, 3}, testing::random_vector(4 * 3 * 9, rng)});
  store.add("conv1_1.bias", {{4}, testing::random_vector(4, rng)});
  store.add("scalar", {{}, {2.5f}});
  store.add("empty", {{0, 5}, {}});
  return store;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void expect_same_tensors(const WeightStore& a, const WeightStore& b) {
  ASSERT_EQ(a.tensors().size(), b.tensors().size());
  for (const auto& [name, t] : a.tensors()) {
    ASSERT_TRUE(b.contains(name)) << name;
    EXPECT_EQ(b.at(name).shape, t.shape) << name;
    ASSERT_EQ(b.at(name).data.size(), t.data.size()) << name;
    EXPECT_EQ(std::memcmp(b.at(name).data.data(), t.data.data(), t.data.size() * sizeof(float)), 0) << name;
  }
}

TEST(Crc32Test, KnownVector) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), 0xCBF43926u);
}

TEST(WeightFileTest, RoundTripIsBitExact) {
  const WeightStore store = synthetic_store();
  const auto bytes = serialize_weights(store);
  const WeightStore back = parse_weights(bytes);
  expect_same_tensors(store, back);
  EXPECT_EQ(back.metadata(), store.metadata());
  EXPECT_EQ(serialize_weights(back), bytes);

  const auto dir = testing::temp_dir("weights_rt");
  save_weights(store, dir / "w.wctw");
  EXPECT_EQ(read_file(dir / "w.wctw"), bytes);
  expect_same_tensors(store, load_weights(dir / "w.wctw"));
}

TEST(WeightFileTest, HeaderLayout) {
  const auto bytes = serialize_weights(synthetic_store());
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "WCTW");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  std::uint32_t trailer;
  std::memcpy(&trailer, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(trailer, crc32(bytes.data(), bytes.size() - 4));
}

TEST(WeightFileTest, EveryTruncationIsAFormatError) {
  const auto bytes = serialize_weights(synthetic_store());
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_THROW(parse_weights(cut), FormatError) << "length " << n;
  }
}

TEST(WeightFileTest, UnknownVersionNamesSupportedVersions) {
  auto bytes = serialize_weights(synthetic_store());
  bytes[4] = 9;
  try {
    parse_weights(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_NE(std::string(e.what()).find("version 9"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("supported versions: 1"), std::string::npos) << e.what();
  }
}

TEST(WeightFileTest, BadMagic) {
  auto bytes = serialize_weights(synthetic_store());
  bytes[0] = 'X';
  try {
    parse_weights(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(WeightFileTest, CorruptedTensorByteFailsTensorChecksum) {
  const WeightStore store = synthetic_store();
  auto bytes = serialize_weights(store);
  // First tensor in name order is conv1_1.bias; its data starts after the
  // header, metadata and the tensor's own name/dtype/rank/dims.
  const std::string meta = format_metadata(store.metadata());
  const std::size_t data_offset = 4 + 4 + 4 + meta.size() + 4 + 2 + std::string("conv1_1.bias").size() + 1 + 1 + 4;
  bytes[data_offset + 2] ^= 0x10;
  try {
    parse_weights(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
    EXPECT_EQ(e.offset(), data_offset);
  }
}

TEST(WeightFileTest, CorruptedMetadataFailsFileChecksum) {
  auto bytes = serialize_weights(synthetic_store());
  bytes[14] ^= 0x01;
  try {
    parse_weights(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("file checksum"), std::string::npos) << e.what();
  }
}

TEST(WeightFileTest, TrailingBytesAreRejected) {
  auto bytes = serialize_weights(synthetic_store());
  bytes.push_back(0);
  EXPECT_THROW(parse_weights(bytes), FormatError);
}

TEST(WeightFileTest, MissingFileIsIoError) {
  EXPECT_THROW(load_weights(testing::temp_dir("weights_missing") / "nope.wctw"), IoError);
}

TEST(WeightFileTest, LoadsIndependentlyWrittenFixture) {
  const auto path = testing::fixture_dir() / "weights.wctw";
  const WeightStore store = load_weights(path);
  EXPECT_EQ(store.metadata().at("channel_order"), "bgr");
  const auto& w = store.at("conv1_1.weight");
  EXPECT_EQ(w.shape, (std::vector<std::uint32_t>{8, 3, 3, 3}));
  EXPECT_EQ(store.at("decoder5.conv1_1.bias").shape, (std::vector<std::uint32_t>{3}));
  // Our writer reproduces the same tensors.
  expect_same_tensors(store, parse_weights(serialize_weights(store)));
}

TEST(WeightStoreTest, MissingTensorIsConfigurationError) {
  EXPECT_THROW(synthetic_store().at("conv9_9.weight"), ConfigurationError);
}

TEST(WeightStoreTest, AddChecksShape) {
  WeightStore store;
  EXPECT_THROW(store.add("x", {{2, 2}, {1.0f}}), InvalidArgument);
}

TEST(MetadataTest, ParsesPreprocessing) {
  const Preprocessing p = synthetic_store().preprocessing();
  EXPECT_FLOAT_EQ(p.mean[0], 0.485f);
  EXPECT_FLOAT_EQ(p.mean[2], 0.406f);
  EXPECT_FLOAT_EQ(p.scale, 255.0f);
  EXPECT_TRUE(p.bgr);

  const Preprocessing d = WeightStore().preprocessing();
  EXPECT_EQ(d.scale, 1.0f);
  EXPECT_FALSE(d.bgr);
}

TEST(MetadataTest, RejectsBadValues) {
  WeightStore store;
  store.metadata()["channel_order"] = "grb";
  EXPECT_THROW(store.preprocessing(), ConfigurationError);
  store.metadata()["channel_order"] = "rgb";
  store.metadata()["mean"] = "1 2";
  EXPECT_THROW(store.preprocessing(), ConfigurationError);
}

TEST(MetadataTest, TextRoundTrip) {
  const std::map<std::string, std::string> m{{"a", "1 2 3"}, {"format", "x"}};
  EXPECT_EQ(parse_metadata(format_metadata(m)), m);
  EXPECT_EQ(parse_metadata("# comment\n  key :  value  \n\nnocolon\n"),
            (std::map<std::string, std::string>{{"key", "value"}}));
}

}  // namespace
}  // namespace ust

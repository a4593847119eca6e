#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ust/error.hpp"

namespace ust {

// Binary weight container ("WCTW", version 1). Little-endian layout:
//
//   "WCTW"  u32 version  u32 meta_len  meta[meta_len]  u32 tensor_count
//   per tensor:
//     u16 name_len  name[name_len]  u8 dtype (0 = f32)  u8 rank  u32 dims[rank]
//     f32 data[prod(dims)]  u32 crc32(data)
//   u32 crc32(every preceding byte of the file)
//
// Metadata is UTF-8 text, one "key: value" per line. Recognized keys:
//   mean           three floats subtracted after scaling (default 0 0 0)
//   scale          multiplier applied to [0,1] pixels (default 1)
//   channel_order  rgb | bgr (default rgb)
inline constexpr std::uint32_t kWeightFormatVersion = 1;

struct WeightTensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
};

struct Preprocessing {
  float mean[3] = {0.0f, 0.0f, 0.0f};
  float scale = 1.0f;
  bool bgr = false;
};

class WeightStore {
 public:
  WeightStore() = default;

  void add(std::string name, WeightTensor tensor);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const WeightTensor& at(const std::string& name) const;

  // Sorted by name; this is also the on-disk order written by save_weights.
  const std::map<std::string, WeightTensor>& tensors() const noexcept { return tensors_; }

  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

  Preprocessing preprocessing() const;

 private:
  std::map<std::string, WeightTensor> tensors_;
  std::map<std::string, std::string> metadata_;
};

std::uint32_t crc32(const std::uint8_t* data, std::size_t size, std::uint32_t seed = 0);

WeightStore parse_weights(const std::vector<std::uint8_t>& bytes);
WeightStore load_weights(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_weights(const WeightStore& store);
void save_weights(const WeightStore& store, const std::filesystem::path& path);

std::string format_metadata(const std::map<std::string, std::string>& metadata);
std::map<std::string, std::string> parse_metadata(const std::string& text);

}  // namespace ust

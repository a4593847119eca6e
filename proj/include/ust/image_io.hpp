#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ust/tensor.hpp"

namespace ust {

// Reads PNG or JPEG (detected from the file signature). Gray and alpha
// inputs are converted to RGB; values are scaled to [0,1].
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

// 8-bit RGB PNG. Values are clamped to [0,1] and rounded to the nearest
// 8-bit level. Encoding is deterministic for identical input.
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
void save_png(const ImageBuffer& img, const std::filesystem::path& path);

void save_jpeg(const ImageBuffer& img, const std::filesystem::path& path, int quality = 95);

}  // namespace ust

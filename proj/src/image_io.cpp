#include "ust/image_io.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ust {
namespace {

std::uint8_t to_byte(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ImageBuffer from_interleaved_rgb(const std::vector<std::uint8_t>& rgb, Index height, Index width) {
  ImageBuffer img(height, width);
  for (Index y = 0; y < height; ++y)
    for (Index x = 0; x < width; ++x)
      for (Index c = 0; c < 3; ++c)
        img(c, y, x) = static_cast<float>(rgb[static_cast<std::size_t>((y * width + x) * 3 + c)]) / 255.0f;
  return img;
}

std::vector<std::uint8_t> to_interleaved_rgb(const ImageBuffer& img) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(img.height() * img.width() * 3));
  for (Index y = 0; y < img.height(); ++y)
    for (Index x = 0; x < img.width(); ++x)
      for (Index c = 0; c < 3; ++c)
        rgb[static_cast<std::size_t>((y * img.width() + x) * 3 + c)] = to_byte(img(c, y, x));
  return rgb;
}

// ---- PNG ----

struct PngReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->size) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->data + cur->pos, len);
  cur->pos += len;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: out of memory");
  }
  std::vector<std::uint8_t> rgb;
  std::vector<png_bytep> rows;
  PngReadCursor cursor{bytes.data(), bytes.size(), 0};

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: malformed image data");
  }
  png_set_read_fn(png, &cursor, png_read_from_memory);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: unsupported pixel layout");
  }
  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = rgb.data() + static_cast<std::size_t>(y) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_interleaved_rgb(rgb, height, width);
}

// ---- JPEG ----

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> rgb;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const auto width = static_cast<Index>(cinfo.output_width);
  const auto height = static_cast<Index>(cinfo.output_height);
  rgb.resize(static_cast<std::size_t>(width * height * 3));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_interleaved_rgb(rgb, height, width);
}

}  // namespace

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes);
  throw IoError("unrecognized image format (expected PNG or JPEG)");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  try {
    return decode_image(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  if (img.empty()) throw InvalidArgument("encode_png: empty image");
  std::vector<std::uint8_t> rgb = to_interleaved_rgb(img);
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index y = 0; y < img.height(); ++y)
    rows[static_cast<std::size_t>(y)] = rgb.data() + static_cast<std::size_t>(y * img.width() * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) { write_file(path, encode_png(img)); }

void save_jpeg(const ImageBuffer& img, const std::filesystem::path& path, int quality) {
  if (img.empty()) throw InvalidArgument("save_jpeg: empty image");
  std::vector<std::uint8_t> rgb = to_interleaved_rgb(img);
  unsigned char* buffer = nullptr;
  unsigned long buffer_size = 0;

  jpeg_compress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw IoError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &buffer_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width() * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> bytes(buffer, buffer + buffer_size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  write_file(path, bytes);
}

}  // namespace ust

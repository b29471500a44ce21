#include "plotdigit/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "plotdigit/errors.hpp"

namespace plotdigit::io {

namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + len > cur->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(out, cur->bytes.data() + cur->offset, len);
  cur->offset += len;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

void png_warning_ignore(png_structp, png_const_charp) {}

/// Decoded as 8-bit RGBA, row-major.
struct RgbaBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;
};

RgbaBuffer decode_png_rgba(std::span<const std::uint8_t> bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_ignore);
  if (!png) throw DecodeFailure("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  RgbaBuffer buf;
  std::vector<png_bytep> rows;
  ReadCursor cur{bytes, 0};
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeFailure("invalid PNG data");
  }
  png_set_read_fn(png, &cur, png_read_from_span);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (has_trns) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (!(color_type & PNG_COLOR_MASK_ALPHA) && !has_trns) png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != w * 4) png_error(png, "unexpected PNG row layout");
  buf.width = static_cast<int>(w);
  buf.height = static_cast<int>(h);
  buf.rgba.resize(static_cast<std::size_t>(w) * h * 4);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.rgba.data() + static_cast<std::size_t>(y) * w * 4;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return buf;
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorMgr err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> pixels;
  int width = 0, height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeFailure("invalid JPEG data");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return RasterImage(width, height, std::move(pixels));
}

std::vector<std::uint8_t> encode_png_raw(int width, int height, int color_type, int channels,
                                         std::span<const std::uint8_t> data) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_ignore);
  if (!png) throw EncodeFailure("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw EncodeFailure("PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<std::uint8_t*>(data.data() + static_cast<std::size_t>(y) * width * channels));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    const RgbaBuffer buf = decode_png_rgba(bytes);
    if (buf.width < 1 || buf.height < 1) throw DecodeFailure("empty PNG");
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(buf.width) * buf.height * 3);
    for (std::size_t i = 0, n = static_cast<std::size_t>(buf.width) * buf.height; i < n; ++i) {
      const unsigned a = buf.rgba[i * 4 + 3];
      for (int c = 0; c < 3; ++c) {
        const unsigned v = buf.rgba[i * 4 + c];
        // over white: v*a + 255*(255-a), rounded
        rgb[i * 3 + c] = static_cast<std::uint8_t>((v * a + 255u * (255u - a) + 127u) / 255u);
      }
    }
    return RasterImage(buf.width, buf.height, std::move(rgb));
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
    return decode_jpeg(bytes);
  throw DecodeFailure("unrecognized image format");
}

RasterImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const DecodeFailure& e) {
    throw DecodeFailure(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  return encode_png_raw(img.width(), img.height(), PNG_COLOR_TYPE_RGB, 3, img.pixels());
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
  write_file(path, encode_png(img));
}

std::vector<std::uint8_t> encode_gray_png(const Mask& values) {
  std::span<const std::uint8_t> data(values.data(), static_cast<std::size_t>(values.size()));
  return encode_png_raw(static_cast<int>(values.cols()), static_cast<int>(values.rows()),
                        PNG_COLOR_TYPE_GRAY, 1, data);
}

void write_gray_png(const std::filesystem::path& path, const Mask& values) {
  write_file(path, encode_gray_png(values));
}

Mask read_gray_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  RgbaBuffer buf;
  try {
    buf = decode_png_rgba(bytes);
  } catch (const DecodeFailure& e) {
    throw DecodeFailure(path.string() + ": " + e.what());
  }
  Mask out(buf.height, buf.width);
  for (int y = 0; y < buf.height; ++y)
    for (int x = 0; x < buf.width; ++x) {
      const std::uint8_t* p = &buf.rgba[(static_cast<std::size_t>(y) * buf.width + x) * 4];
      if (p[0] == p[1] && p[1] == p[2]) {
        out(y, x) = p[0];
      } else {
        const double l = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        out(y, x) = static_cast<std::uint8_t>(std::lround(l));
      }
    }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeFailure("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EncodeFailure("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw EncodeFailure("short write to " + path.string());
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    unsigned n = bytes[i] << 16;
    if (i + 1 < bytes.size()) n |= bytes[i + 1] << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += (i + 1 < bytes.size()) ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

}  // namespace plotdigit::io

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "plotdigit/raster.hpp"

namespace plotdigit::io {

/// Decodes PNG or JPEG (sniffed from the magic bytes). Alpha is composited
/// over white; grayscale and palette inputs are expanded to RGB.
RasterImage read_image(const std::filesystem::path& path);
RasterImage decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const RasterImage& img);
void write_png(const std::filesystem::path& path, const RasterImage& img);

/// 8-bit single channel PNG, as used for probability-map exchange.
std::vector<std::uint8_t> encode_gray_png(const Mask& values);
void write_gray_png(const std::filesystem::path& path, const Mask& values);
/// Reads any PNG as 8-bit luminance (RGB inputs are converted).
Mask read_gray_png(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace plotdigit::io

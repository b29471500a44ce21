#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "plotdigit/raster.hpp"

namespace plotdigit::font {

// Built-in 5x7 bitmap font used for synthetic tick labels and the builtin
// recognizer. Glyph cells are kGlyphWidth wide with one blank column of
// spacing, all scaled by an integer factor.
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kAdvance = kGlyphWidth + 1;

/// Characters the font can render: digits, sign, decimal point, exponent.
inline constexpr std::string_view kCharset = "0123456789-+.e";

using Glyph = std::array<std::uint8_t, kGlyphHeight>;  // 5 low bits per row, MSB = left

std::optional<Glyph> glyph(char c);
bool glyph_bit(const Glyph& g, int col, int row);

/// Ink extent of a rendered string at a given scale.
inline int text_width(std::string_view text, int scale) {
  return text.empty() ? 0 : (static_cast<int>(text.size()) * kAdvance - 1) * scale;
}
inline int text_height(int scale) { return kGlyphHeight * scale; }

/// Draws `text` with its top-left corner at (x, y); characters outside the
/// charset throw std::invalid_argument. Pixels outside the image are clipped.
void draw_text(RasterImage& img, int x, int y, std::string_view text, int scale, const Rgb& color);

}  // namespace plotdigit::font

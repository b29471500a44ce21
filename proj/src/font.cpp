#include "plotdigit/font.hpp"

#include <stdexcept>

namespace plotdigit::font {

namespace {

// clang-format off
constexpr Glyph kDigits[10] = {
  {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110},  // 0
  {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},  // 1
  {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111},  // 2
  {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110},  // 3
  {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010},  // 4
  {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110},  // 5
  {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110},  // 6
  {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000},  // 7
  {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110},  // 8
  {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100},  // 9
};
constexpr Glyph kMinus = {0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000};
constexpr Glyph kPlus  = {0b00000, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0b00000};
constexpr Glyph kDot   = {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b01100, 0b01100};
constexpr Glyph kE     = {0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110};
// clang-format on

}  // namespace

std::optional<Glyph> glyph(char c) {
  if (c >= '0' && c <= '9') return kDigits[c - '0'];
  switch (c) {
    case '-': return kMinus;
    case '+': return kPlus;
    case '.': return kDot;
    case 'e': return kE;
    default: return std::nullopt;
  }
}

bool glyph_bit(const Glyph& g, int col, int row) {
  return (g[row] >> (kGlyphWidth - 1 - col)) & 1u;
}

void draw_text(RasterImage& img, int x, int y, std::string_view text, int scale, const Rgb& color) {
  if (scale < 1) throw std::invalid_argument("draw_text: scale < 1");
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto g = glyph(text[i]);
    if (!g) throw std::invalid_argument(std::string("draw_text: unsupported character '") + text[i] + "'");
    const int cx = x + static_cast<int>(i) * kAdvance * scale;
    for (int row = 0; row < kGlyphHeight; ++row)
      for (int col = 0; col < kGlyphWidth; ++col) {
        if (!glyph_bit(*g, col, row)) continue;
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) {
            const int px = cx + col * scale + dx, py = y + row * scale + dy;
            if (px >= 0 && py >= 0 && px < img.width() && py < img.height()) img.set(px, py, color);
          }
      }
  }
}

}  // namespace plotdigit::font

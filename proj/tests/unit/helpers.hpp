#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "handgeo/bmp.hpp"
#include "handgeo/features.hpp"
#include "handgeo/imaging.hpp"

namespace handgeo::test {

// Rows of '#' (foreground) and '.' (background).
inline BinaryImage from_ascii(const std::vector<std::string>& rows) {
  BinaryImage img(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) img.at(x, y) = rows[y][x] == '#' ? 1 : 0;
  }
  return img;
}

inline BinaryImage filled_rect(int w, int h, int x0, int y0, int rw, int rh) {
  BinaryImage img(w, h);
  for (int y = y0; y < y0 + rh; ++y) {
    for (int x = x0; x < x0 + rw; ++x) img.at(x, y) = 1;
  }
  return img;
}

// Minimal 8-bit BMP: BITMAPINFOHEADER, grey palette, bottom-up rows.
inline std::vector<std::uint8_t> bmp_bytes(int w, int h, const std::vector<std::uint8_t>& pixels,
                                           int bits = 8, int compression = 0, int ppm = 3937) {
  const int stride = (w * bits / 8 + 3) & ~3;
  const int palette = bits == 8 ? 256 * 4 : 0;
  const int offset = 14 + 40 + palette;
  const int size = offset + stride * h;
  std::vector<std::uint8_t> b(static_cast<std::size_t>(size), 0);
  auto u16 = [&](int at, int v) {
    b[at] = static_cast<std::uint8_t>(v & 0xff);
    b[at + 1] = static_cast<std::uint8_t>((v >> 8) & 0xff);
  };
  auto u32 = [&](int at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xff);
  };
  b[0] = 'B';
  b[1] = 'M';
  u32(2, static_cast<std::uint32_t>(size));
  u32(10, static_cast<std::uint32_t>(offset));
  u32(14, 40);
  u32(18, static_cast<std::uint32_t>(w));
  u32(22, static_cast<std::uint32_t>(h));
  u16(26, 1);
  u16(28, bits);
  u32(30, static_cast<std::uint32_t>(compression));
  u32(38, static_cast<std::uint32_t>(ppm));
  u32(42, static_cast<std::uint32_t>(ppm));
  if (bits == 8) {
    for (int i = 0; i < 256; ++i) {
      b[54 + 4 * i] = b[55 + 4 * i] = b[56 + 4 * i] = static_cast<std::uint8_t>(i);
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        b[offset + (h - 1 - y) * stride + x] = pixels[static_cast<std::size_t>(y * w + x)];
      }
    }
  }
  return b;
}

inline FeatureVector fv(std::initializer_list<double> v) {
  FeatureVector out{};
  std::size_t i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

}  // namespace handgeo::test

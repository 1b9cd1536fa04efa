#include "handgeo/bmp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

constexpr std::size_t kFileHeaderSize = 14;
constexpr double kInchesPerMetre = 39.37007874015748;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::int32_t read_i32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::int32_t>(read_u32(b, off));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xffu));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorKind::kFormat, what);
}

}  // namespace

GrayImage decode_bmp(std::span<const std::uint8_t> b) {
  if (b.size() < kFileHeaderSize + 40) format_error("truncated BMP header");
  if (b[0] != 'B' || b[1] != 'M') format_error("bad BMP signature");

  const std::uint32_t data_offset = read_u32(b, 10);
  const std::uint32_t info_size = read_u32(b, 14);
  if (info_size < 40) format_error("unsupported info header size " + std::to_string(info_size));

  const std::int32_t width = read_i32(b, 18);
  const std::int32_t raw_height = read_i32(b, 22);
  const std::uint16_t bit_count = read_u16(b, 28);
  const std::uint32_t compression = read_u32(b, 30);
  const std::int32_t x_ppm = read_i32(b, 38);
  const std::uint32_t colors_used = read_u32(b, 46);

  if (bit_count != 8) format_error("unsupported bit depth " + std::to_string(bit_count));
  if (compression != 0) format_error("unsupported compression " + std::to_string(compression));
  if (width <= 0 || raw_height == 0) format_error("invalid dimensions");

  const bool top_down = raw_height < 0;
  const std::int64_t height = std::llabs(static_cast<long long>(raw_height));
  if (width > kMaxImageSide || height > kMaxImageSide) {
    throw Error(ErrorKind::kSize, "image " + std::to_string(width) + "x" +
                                      std::to_string(height) + " exceeds " +
                                      std::to_string(kMaxImageSide) + " pixels per side");
  }

  // Palette follows the info header; absent palettes fall back to identity grey.
  const std::size_t palette_offset = kFileHeaderSize + info_size;
  const std::size_t n_colors = colors_used == 0 ? 256u : std::min<std::size_t>(colors_used, 256u);
  std::array<double, 256> lut{};
  for (std::size_t i = 0; i < 256; ++i) lut[i] = static_cast<double>(i) / 255.0;
  if (palette_offset + 4 * n_colors <= data_offset && data_offset <= b.size()) {
    for (std::size_t i = 0; i < n_colors; ++i) {
      const std::size_t p = palette_offset + 4 * i;
      const unsigned blue = b[p];
      const unsigned green = b[p + 1];
      const unsigned red = b[p + 2];
      if (red == green && green == blue) {
        lut[i] = static_cast<double>(red) / 255.0;
      } else {
        lut[i] = (0.299 * red + 0.587 * green + 0.114 * blue) / 255.0;
      }
    }
  }

  const std::size_t stride = (static_cast<std::size_t>(width) + 3u) & ~std::size_t{3};
  if (data_offset > b.size() || b.size() - data_offset < stride * static_cast<std::size_t>(height)) {
    format_error("truncated pixel data");
  }

  double dpi = kDefaultDpi;
  if (x_ppm > 0) dpi = std::round(static_cast<double>(x_ppm) / kInchesPerMetre);

  GrayImage img(width, static_cast<int>(height), dpi);
  for (std::int64_t row = 0; row < height; ++row) {
    const std::int64_t y = top_down ? row : height - 1 - row;
    const std::size_t base = data_offset + static_cast<std::size_t>(row) * stride;
    for (std::int32_t x = 0; x < width; ++x) {
      img.at(x, static_cast<int>(y)) = lut[b[base + static_cast<std::size_t>(x)]];
    }
  }
  return img;
}

GrayImage load_bmp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return decode_bmp(bytes);
}

std::vector<std::uint8_t> encode_bmp(const GrayImage& img) {
  const auto width = static_cast<std::uint32_t>(img.width());
  const auto height = static_cast<std::uint32_t>(img.height());
  const std::uint32_t stride = (width + 3u) & ~3u;
  const std::uint32_t palette_bytes = 256u * 4u;
  const std::uint32_t data_offset = kFileHeaderSize + 40u + palette_bytes;
  const std::uint32_t image_bytes = stride * height;
  const auto ppm = static_cast<std::uint32_t>(std::lround(img.dpi() * kInchesPerMetre));

  std::vector<std::uint8_t> out;
  out.reserve(data_offset + image_bytes);
  out.push_back('B');
  out.push_back('M');
  put_u32(out, data_offset + image_bytes);
  put_u32(out, 0);
  put_u32(out, data_offset);

  put_u32(out, 40);
  put_u32(out, width);
  put_u32(out, height);
  put_u16(out, 1);
  put_u16(out, 8);
  put_u32(out, 0);
  put_u32(out, image_bytes);
  put_u32(out, ppm);
  put_u32(out, ppm);
  put_u32(out, 256);
  put_u32(out, 0);

  for (std::uint32_t i = 0; i < 256; ++i) {
    const auto g = static_cast<std::uint8_t>(i);
    out.insert(out.end(), {g, g, g, 0});
  }
  for (std::uint32_t row = 0; row < height; ++row) {
    const int y = static_cast<int>(height - 1 - row);
    for (std::uint32_t x = 0; x < stride; ++x) {
      if (x < width) {
        const double v = std::clamp(img.at(static_cast<int>(x), y), 0.0, 1.0);
        out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
      } else {
        out.push_back(0);
      }
    }
  }
  return out;
}

void save_bmp(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_bmp(img);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace handgeo

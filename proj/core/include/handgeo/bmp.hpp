#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "handgeo/imaging.hpp"

namespace handgeo {

/// Decodes an uncompressed 8-bit palettized BMP. Palette entries map to
/// their luminance; grey entries (R=G=B) map exactly to byte/255. The
/// resolution is taken from the horizontal pixels-per-metre field, or
/// 100 dpi when that field is zero.
GrayImage decode_bmp(std::span<const std::uint8_t> bytes);
GrayImage load_bmp(const std::filesystem::path& path);

/// Writes an 8-bit BMP with a linear grey palette. Intensities are rounded
/// to the nearest byte, so images whose values are already k/255 survive a
/// save/load round trip exactly.
std::vector<std::uint8_t> encode_bmp(const GrayImage& img);
void save_bmp(const GrayImage& img, const std::filesystem::path& path);

}  // namespace handgeo

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace handgeo {

inline constexpr double kDefaultDpi = 100.0;
inline constexpr double kDefaultThreshold = 0.07;
inline constexpr int kMaxImageSide = 5000;

/// 8-bit scan normalized to [0,1] intensities, row-major, y grows downward.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double dpi = kDefaultDpi, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double dpi() const noexcept { return dpi_; }
  void set_dpi(double dpi) noexcept { dpi_ = dpi; }
  bool empty() const noexcept { return pixels_.empty(); }

  double at(int x, int y) const { return pixels_[index(x, y)]; }
  double& at(int x, int y) { return pixels_[index(x, y)]; }

  const std::vector<double>& pixels() const noexcept { return pixels_; }
  std::vector<double>& pixels() noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  double dpi_ = kDefaultDpi;
  std::vector<double> pixels_;
};

/// Monochrome raster; 1 = foreground (hand), 0 = background.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height, double dpi = kDefaultDpi);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double dpi() const noexcept { return dpi_; }
  void set_dpi(double dpi) noexcept { dpi_ = dpi; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  std::uint8_t at(int x, int y) const { return bits_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return bits_[index(x, y)]; }
  /// Out-of-range coordinates read as background.
  std::uint8_t get(int x, int y) const noexcept {
    return contains(x, y) ? bits_[index(x, y)] : std::uint8_t{0};
  }

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::vector<std::uint8_t>& bits() noexcept { return bits_; }
  std::size_t count() const noexcept;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  double dpi_ = kDefaultDpi;
  std::vector<std::uint8_t> bits_;
};

/// Normalized box average over the (2r+1)^2 neighbourhood with replicated
/// borders. Radius 0 returns the input unchanged.
GrayImage lowpass_filter(const GrayImage& img, int kernel_radius);

/// out(x,y) = 1 iff img(x,y) >= threshold.
BinaryImage binarize(const GrayImage& img, double threshold = kDefaultThreshold);

/// Foreground 1 -> intensity 1.0, background -> 0.0.
GrayImage to_gray(const BinaryImage& img);

/// Zeroes a frame of `width` pixels around the image so that silhouettes
/// running off the scan edge still produce closed outlines.
BinaryImage clear_border(const BinaryImage& img, int width = 1);

/// Laplacian of the Gaussian-smoothed image (separable Gaussian, 5-point
/// Laplacian, replicated borders). Bright regions respond negatively just
/// inside their boundary.
std::vector<double> log_response(const BinaryImage& img, double sigma);

/// Zero-crossing edge map of the LoG response. A pixel is marked when its
/// response is negative and some 4-neighbour is positive with a difference
/// above 1e-6 of the peak absolute response, so edges sit one pixel wide on
/// the foreground side of each crossing.
BinaryImage detect_edges_log(const BinaryImage& img, double sigma = 1.0);

/// Foreground pixels with at least one 4-neighbour in the background
/// (pixels outside the image count as background).
BinaryImage boundary_map(const BinaryImage& img);

/// Plain-text PGM (P2, maxval 255) and PBM (P1) writers for debugging.
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
void write_pbm(const BinaryImage& img, const std::filesystem::path& path);

}  // namespace handgeo

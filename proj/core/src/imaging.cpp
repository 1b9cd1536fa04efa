#include "handgeo/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Mean of the window centred on each sample, accumulated as offsets from the
// centre value so that constant signals come back bit-identical.
void box_pass(const std::vector<double>& src, std::vector<double>& dst, int width, int height,
              int radius, bool horizontal) {
  const double inv = 1.0 / static_cast<double>(2 * radius + 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double centre = src[static_cast<std::size_t>(y) * width + x];
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = horizontal ? clamp_index(x + k, width) : x;
        const int sy = horizontal ? y : clamp_index(y + k, height);
        acc += src[static_cast<std::size_t>(sy) * width + sx] - centre;
      }
      dst[static_cast<std::size_t>(y) * width + x] = centre + acc * inv;
    }
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

GrayImage::GrayImage(int width, int height, double dpi, double fill)
    : width_(width), height_(height), dpi_(dpi) {
  check_dims(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

BinaryImage::BinaryImage(int width, int height, double dpi)
    : width_(width), height_(height), dpi_(dpi) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t BinaryImage::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

GrayImage lowpass_filter(const GrayImage& img, int kernel_radius) {
  if (kernel_radius < 0) {
    throw Error(ErrorKind::kInvalidArgument, "kernel_radius must be >= 0");
  }
  if (kernel_radius == 0 || img.empty()) return img;

  const int w = img.width();
  const int h = img.height();
  std::vector<double> tmp(img.pixels().size());
  GrayImage out(w, h, img.dpi());
  box_pass(img.pixels(), tmp, w, h, kernel_radius, true);
  box_pass(tmp, out.pixels(), w, h, kernel_radius, false);
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

BinaryImage binarize(const GrayImage& img, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "threshold must lie in [0,1]");
  }
  BinaryImage out(img.width(), img.height(), img.dpi());
  const auto& src = img.pixels();
  auto& dst = out.bits();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

GrayImage to_gray(const BinaryImage& img) {
  GrayImage out(img.width(), img.height(), img.dpi());
  for (std::size_t i = 0; i < img.bits().size(); ++i) {
    out.pixels()[i] = img.bits()[i] ? 1.0 : 0.0;
  }
  return out;
}

BinaryImage clear_border(const BinaryImage& img, int width) {
  BinaryImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (x < width || y < width || x >= img.width() - width || y >= img.height() - width) {
        out.at(x, y) = 0;
      }
    }
  }
  return out;
}

std::vector<double> log_response(const BinaryImage& img, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "LoG sigma must be > 0");
  }
  const int w = img.width();
  const int h = img.height();
  const auto kernel = gaussian_kernel(sigma);
  const int r = static_cast<int>(kernel.size() / 2);

  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  std::vector<double> smooth(tmp.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        acc += kernel[static_cast<std::size_t>(k + r)] * img.at(clamp_index(x + k, w), y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        acc += kernel[static_cast<std::size_t>(k + r)] *
               tmp[static_cast<std::size_t>(clamp_index(y + k, h)) * w + x];
      }
      smooth[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  std::vector<double> lap(smooth.size());
  auto s = [&](int x, int y) {
    return smooth[static_cast<std::size_t>(clamp_index(y, h)) * w + clamp_index(x, w)];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      lap[static_cast<std::size_t>(y) * w + x] =
          s(x + 1, y) + s(x - 1, y) + s(x, y + 1) + s(x, y - 1) - 4.0 * s(x, y);
    }
  }
  return lap;
}

BinaryImage detect_edges_log(const BinaryImage& img, double sigma) {
  const auto resp = log_response(img, sigma);
  const int w = img.width();
  const int h = img.height();
  BinaryImage edges(w, h, img.dpi());

  double peak = 0.0;
  for (double v : resp) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return edges;
  const double floor = 1e-6 * peak;

  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = resp[static_cast<std::size_t>(y) * w + x];
      if (!(v < 0.0)) continue;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k];
        const int ny = y + kDy[k];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const double u = resp[static_cast<std::size_t>(ny) * w + nx];
        if (u > 0.0 && u - v > floor) {
          edges.at(x, y) = 1;
          break;
        }
      }
    }
  }
  return edges;
}

BinaryImage boundary_map(const BinaryImage& img) {
  BinaryImage out(img.width(), img.height(), img.dpi());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y)) continue;
      if (!img.get(x + 1, y) || !img.get(x - 1, y) || !img.get(x, y + 1) || !img.get(x, y - 1)) {
        out.at(x, y) = 1;
      }
    }
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << "P2\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const long v = std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0);
      os << v << (x + 1 == img.width() ? '\n' : ' ');
    }
  }
}

void write_pbm(const BinaryImage& img, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << "P1\n" << img.width() << ' ' << img.height() << '\n';
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      os << static_cast<int>(img.at(x, y)) << (x + 1 == img.width() ? '\n' : ' ');
    }
  }
}

}  // namespace handgeo

#include <doctest.h>

#include <cmath>
#include <deque>

#include "handgeo/contour.hpp"
#include "handgeo/error.hpp"
#include "handgeo/imaging.hpp"
#include "helpers.hpp"

using namespace handgeo;

namespace {

GrayImage bytes_image(std::initializer_list<int> bytes) {
  GrayImage img(static_cast<int>(bytes.size()), 1);
  int x = 0;
  for (const int b : bytes) img.at(x++, 0) = b / 255.0;
  return img;
}

int components8(const BinaryImage& img) {
  std::vector<std::uint8_t> seen(img.bits().size(), 0);
  int count = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y) || seen[y * img.width() + x]) continue;
      ++count;
      std::deque<Point> q{{x, y}};
      seen[y * img.width() + x] = 1;
      while (!q.empty()) {
        const Point p = q.front();
        q.pop_front();
        for (const Point d : kDirections) {
          const Point n{p.x + d.x, p.y + d.y};
          if (!img.get(n.x, n.y) || seen[n.y * img.width() + n.x]) continue;
          seen[n.y * img.width() + n.x] = 1;
          q.push_back(n);
        }
      }
    }
  }
  return count;
}

}  // namespace

TEST_CASE("binarize: threshold examples") {
  const BinaryImage b = binarize(bytes_image({18, 17}), 0.07);
  CHECK(b.at(0, 0) == 1);
  CHECK(b.at(1, 0) == 0);
  CHECK(binarize(GrayImage(4, 3)).count() == 0);
}

TEST_CASE("binarize: every byte value against the direct inequality") {
  GrayImage img(256, 1);
  for (int b = 0; b < 256; ++b) img.at(b, 0) = b / 255.0;
  const BinaryImage out = binarize(img, 0.07);
  for (int b = 0; b < 256; ++b) CHECK(out.at(b, 0) == (b / 255.0 >= 0.07 ? 1 : 0));
}

TEST_CASE("binarize: rejects thresholds outside [0,1]") {
  CHECK_THROWS_AS(binarize(GrayImage(2, 2), 1.5), Error);
  CHECK_THROWS_AS(binarize(GrayImage(2, 2), -0.1), Error);
}

TEST_CASE("binarize: support is stable under re-binarization") {
  const BinaryImage b = binarize(bytes_image({0, 10, 18, 100, 255}), 0.07);
  for (const double t : {0.01, 0.5, 1.0}) CHECK(binarize(to_gray(b), t) == b);
}

TEST_CASE("lowpass: radius 0 is the identity") {
  GrayImage img(5, 4);
  for (int i = 0; i < 20; ++i) img.pixels()[i] = (i * 37 % 255) / 255.0;
  CHECK(lowpass_filter(img, 0) == img);
}

TEST_CASE("lowpass: constants are preserved exactly") {
  const double c = 0.3137254901960784;
  const GrayImage out = lowpass_filter(GrayImage(7, 6, 100, c), 2);
  for (const double v : out.pixels()) CHECK(v == c);
}

TEST_CASE("lowpass: isolated bright pixel spreads to 1/9") {
  GrayImage img(3, 3);
  img.at(1, 1) = 1.0;
  const GrayImage out = lowpass_filter(img, 1);
  CHECK(out.at(1, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  // Replicated borders: a corner sees the centre once and replicas of zero.
  CHECK(out.at(0, 0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("lowpass: output stays in [0,1]") {
  GrayImage img(9, 9);
  for (int i = 0; i < 81; ++i) img.pixels()[i] = (i % 3 == 0) ? 1.0 : 0.0;
  const GrayImage out = lowpass_filter(img, 1);
  for (const double v : out.pixels()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(lowpass_filter(img, -1), Error);
}

TEST_CASE("LoG: constant images have no edges") {
  BinaryImage zeros(12, 10);
  BinaryImage ones(12, 10);
  for (auto& b : ones.bits()) b = 1;
  CHECK(detect_edges_log(zeros, 1.0).count() == 0);
  CHECK(detect_edges_log(ones, 1.0).count() == 0);
  CHECK_THROWS_AS(detect_edges_log(zeros, 0.0), Error);
}

TEST_CASE("LoG: a 20 px square gives one closed loop on its boundary") {
  const BinaryImage sq = test::filled_rect(40, 40, 10, 10, 20, 20);
  const BinaryImage edges = detect_edges_log(sq, 1.0);
  const BinaryImage oracle = boundary_map(sq);
  CHECK(components8(edges) == 1);
  // Every edge pixel lies within one pixel of the direct boundary.
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (!edges.at(x, y)) continue;
      bool near = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) near = near || oracle.get(x + dx, y + dy);
      }
      CHECK(near);
    }
  }
  const ChainCode chain = trace_contour(edges);
  CHECK(chain.closed());
  const ChainCode direct = trace_contour(oracle);
  CHECK(std::abs(static_cast<long>(chain.codes.size()) - static_cast<long>(direct.codes.size())) <= 8);
}

TEST_CASE("LoG: two disjoint blobs give two loops") {
  BinaryImage img(50, 30);
  for (int y = 5; y < 20; ++y) {
    for (int x = 5; x < 18; ++x) img.at(x, y) = 1;
    for (int x = 30; x < 44; ++x) img.at(x, y) = 1;
  }
  const BinaryImage edges = detect_edges_log(img, 1.0);
  CHECK(components8(edges) == 2);
  CHECK(trace_all_loops(edges).size() == 2);
}

TEST_CASE("boundary map: foreground pixels with a background 4-neighbour") {
  const BinaryImage img = test::from_ascii({
      ".....",
      ".###.",
      ".###.",
      ".###.",
      ".....",
  });
  const BinaryImage b = boundary_map(img);
  CHECK(b.count() == 8);
  CHECK(b.at(2, 2) == 0);
}

TEST_CASE("clear_border zeroes the frame only") {
  BinaryImage img(6, 5);
  for (auto& b : img.bits()) b = 1;
  const BinaryImage out = clear_border(img, 1);
  CHECK(out.count() == 4 * 3);
  CHECK(out.at(0, 0) == 0);
  CHECK(out.at(1, 1) == 1);
}

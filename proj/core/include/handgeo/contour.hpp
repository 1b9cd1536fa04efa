#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "handgeo/imaging.hpp"

namespace handgeo {

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Raster order: smaller y first, then smaller x.
inline bool raster_less(const Point& a, const Point& b) noexcept {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

// Direction codes, counter-clockwise from east (y grows downward):
// 0=E 1=NE 2=N 3=NW 4=W 5=SW 6=S 7=SE.
inline constexpr std::array<Point, 8> kDirections{{
    {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

/// Code of the step between two 8-neighbours. Throws kInvalidArgument when
/// `to` is not an 8-neighbour of `from`.
std::uint8_t encode_direction(Point from, Point to);

inline Point step(Point p, std::uint8_t code) noexcept {
  return {p.x + kDirections[code & 7u].x, p.y + kDirections[code & 7u].y};
}

struct ChainCode {
  Point start;
  std::vector<std::uint8_t> codes;

  /// Replayed pixels; the last entry repeats `start` for a closed chain.
  std::vector<Point> points() const;
  bool closed() const;

  friend bool operator==(const ChainCode&, const ChainCode&) = default;
};

/// Traces every 8-connected component of the edge map and returns the
/// longest one that encloses area, counter-clockwise (as displayed) from its
/// topmost-then-leftmost pixel. Equal lengths resolve to the smaller start
/// in raster order. Throws kContour when no closed loop exists.
ChainCode trace_contour(const BinaryImage& edges);

/// Every closed loop found in the edge map, in the same form as
/// trace_contour, ordered by start pixel.
std::vector<ChainCode> trace_all_loops(const BinaryImage& edges);

/// Length in pixel units: +1 per even code, +sqrt(2) per odd code.
double perimeter(const ChainCode& chain);

/// Text form: "x y" on the first line, the code digits on the second.
void write_chain(std::ostream& os, const ChainCode& chain);
ChainCode read_chain(std::istream& is);
void save_chain(const ChainCode& chain, const std::filesystem::path& path);

struct PointF {
  double x = 0;
  double y = 0;

  friend bool operator==(const PointF&, const PointF&) = default;
};

/// Tips and valleys are midpoints of contour pixels, so they can fall
/// halfway between two of them.
struct Landmarks {
  std::array<PointF, 5> tips;     // thumb, first, middle, ring, little
  std::array<PointF, 4> valleys;  // thumb|first, first|middle, middle|ring, ring|little
  std::array<PointF, 2> wrist;    // thumb side, little side
};

struct LandmarkOptions {
  /// Band runs shorter than this many codes are treated as neutral. One-code
  /// runs are digitization staircase on near-horizontal edges.
  int min_run = 2;
};

/// Locates fingertips and valleys from direction-band transitions along a
/// counter-clockwise, fingers-up outline. Ascending codes are {1,2,3},
/// descending {5,6,7}; a tip is the middle of the topmost pixels of an
/// ascending->descending transition and a valley the middle of the lowest
/// pixels of a descending->ascending one. The
/// wrist endpoints are the first and last outline pixels on its bottom row,
/// and the outline between them is scanned so that the wrist itself never
/// yields a valley. The finger order is oriented so the thumb is the end
/// whose tip and valley lie lower (summed y offsets). Throws kLandmark unless exactly 5 tips and
/// 4 valleys are found.
Landmarks find_landmarks(const ChainCode& chain, const LandmarkOptions& options = {});

}  // namespace handgeo

#include "handgeo/contour.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

enum class Band { kNeutral, kAscending, kDescending };

Band band_of(std::uint8_t code) {
  if (code >= 1 && code <= 3) return Band::kAscending;
  if (code >= 5 && code <= 7) return Band::kDescending;
  return Band::kNeutral;
}

// Component labels, 8-connectivity; 0 = not an edge pixel.
std::vector<int> label_components(const BinaryImage& img, std::vector<Point>& seeds) {
  const int w = img.width();
  const int h = img.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::deque<Point> queue;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img.at(x, y) || labels[static_cast<std::size_t>(y) * w + x]) continue;
      ++next;
      seeds.push_back({x, y});
      labels[static_cast<std::size_t>(y) * w + x] = next;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        for (const Point d : kDirections) {
          const Point q{p.x + d.x, p.y + d.y};
          if (!img.contains(q.x, q.y) || !img.at(q.x, q.y)) continue;
          int& l = labels[static_cast<std::size_t>(q.y) * w + q.x];
          if (l) continue;
          l = next;
          queue.push_back(q);
        }
      }
    }
  }
  return labels;
}

// Moore-neighbour trace of the outer boundary of one component, starting at
// its raster-first pixel. The search runs clockwise (as displayed), so the
// pixels come out clockwise; the caller reverses them.
std::vector<Point> moore_trace(const BinaryImage& img, const std::vector<int>& labels, int label,
                               Point start) {
  const int w = img.width();
  auto inside = [&](Point p) {
    return img.contains(p.x, p.y) && labels[static_cast<std::size_t>(p.y) * w + p.x] == label;
  };
  // Returns the next boundary pixel and updates the backtrack direction.
  auto advance = [&](Point p, int& back_dir) -> std::optional<Point> {
    for (int i = 1; i < 8; ++i) {
      const int d = ((back_dir - i) % 8 + 8) % 8;
      const Point q = step(p, static_cast<std::uint8_t>(d));
      if (inside(q)) {
        const Point b = step(p, static_cast<std::uint8_t>((d + 1) % 8));
        back_dir = encode_direction(q, b);
        return q;
      }
    }
    return std::nullopt;
  };

  std::vector<Point> pixels{start};
  int back_dir = 4;  // west of the raster-first pixel is never in the component
  const auto first = advance(start, back_dir);
  if (!first) return pixels;

  Point current = *first;
  const std::size_t limit = 8 * labels.size() + 8;
  while (pixels.size() < limit) {
    const auto next = advance(current, back_dir);
    if (current == start && next && *next == *first) break;
    pixels.push_back(current);
    current = *next;
  }
  return pixels;
}

long long twice_signed_area(const std::vector<Point>& ring) {
  long long acc = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % ring.size()];
    acc += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
  }
  return acc;
}

ChainCode to_chain(const std::vector<Point>& ring) {
  ChainCode chain;
  chain.start = ring.front();
  chain.codes.reserve(ring.size());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    chain.codes.push_back(encode_direction(ring[i], ring[(i + 1) % ring.size()]));
  }
  return chain;
}

}  // namespace

std::uint8_t encode_direction(Point from, Point to) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  for (std::uint8_t c = 0; c < 8; ++c) {
    if (kDirections[c].x == dx && kDirections[c].y == dy) return c;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "points (" + std::to_string(from.x) + "," + std::to_string(from.y) + ") and (" +
                  std::to_string(to.x) + "," + std::to_string(to.y) + ") are not 8-neighbours");
}

std::vector<Point> ChainCode::points() const {
  std::vector<Point> pts;
  pts.reserve(codes.size() + 1);
  Point p = start;
  pts.push_back(p);
  for (const std::uint8_t c : codes) {
    p = step(p, c);
    pts.push_back(p);
  }
  return pts;
}

bool ChainCode::closed() const {
  const auto pts = points();
  return pts.back() == start;
}

std::vector<ChainCode> trace_all_loops(const BinaryImage& edges) {
  std::vector<Point> seeds;
  const auto labels = label_components(edges, seeds);
  std::vector<ChainCode> loops;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto ring = moore_trace(edges, labels, static_cast<int>(i + 1), seeds[i]);
    if (ring.size() < 3 || twice_signed_area(ring) == 0) continue;
    // Reverse to counter-clockwise while keeping the raster-first pixel first.
    std::reverse(ring.begin() + 1, ring.end());
    loops.push_back(to_chain(ring));
  }
  return loops;
}

ChainCode trace_contour(const BinaryImage& edges) {
  auto loops = trace_all_loops(edges);
  if (loops.empty()) {
    throw Error(ErrorKind::kContour, "no closed contour in edge map");
  }
  // Loops arrive in raster order of their start pixel, so a strict comparison
  // keeps the smallest start among equal lengths.
  std::size_t best = 0;
  for (std::size_t i = 1; i < loops.size(); ++i) {
    if (loops[i].codes.size() > loops[best].codes.size()) best = i;
  }
  return std::move(loops[best]);
}

double perimeter(const ChainCode& chain) {
  std::size_t even = 0;
  std::size_t odd = 0;
  for (const std::uint8_t c : chain.codes) (c % 2 == 0 ? even : odd) += 1;
  return static_cast<double>(even) + static_cast<double>(odd) * std::numbers::sqrt2;
}

void write_chain(std::ostream& os, const ChainCode& chain) {
  os << chain.start.x << ' ' << chain.start.y << '\n';
  for (const std::uint8_t c : chain.codes) os << static_cast<char>('0' + c);
  os << '\n';
}

ChainCode read_chain(std::istream& is) {
  ChainCode chain;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::kFormat, "missing chain start line");
  std::istringstream start(line);
  if (!(start >> chain.start.x >> chain.start.y)) {
    throw Error(ErrorKind::kFormat, "malformed chain start line: " + line);
  }
  std::getline(is, line);
  for (const char ch : line) {
    if (ch == '\r') continue;
    if (ch < '0' || ch > '7') {
      throw Error(ErrorKind::kFormat, std::string("invalid chain code digit '") + ch + "'");
    }
    chain.codes.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return chain;
}

void save_chain(const ChainCode& chain, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_chain(os, chain);
}

Landmarks find_landmarks(const ChainCode& chain, const LandmarkOptions& options) {
  const std::size_t n = chain.codes.size();
  if (n < 4) throw Error(ErrorKind::kLandmark, "contour too short for landmark detection");
  const auto pts = chain.points();
  auto at = [&](std::size_t i) { return pts[i % n]; };

  int ymax = pts.front().y;
  for (const Point& p : pts) ymax = std::max(ymax, p.y);

  // Longest cyclic run of outline pixels on the bottom row.
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i).y != ymax || at(i + n - 1).y == ymax) continue;
    std::size_t len = 0;
    while (len < n && at(i + len).y == ymax) ++len;
    if (len > run_len) {
      run_len = len;
      run_start = i;
    }
  }
  if (run_len == 0 || run_len >= n) {
    throw Error(ErrorKind::kLandmark, "cannot locate the wrist on the bottom row");
  }
  const std::size_t run_end = (run_start + run_len - 1) % n;
  const std::size_t path_len = (run_start + n - run_end) % n;

  struct Run {
    Band band;
    std::size_t begin;
    std::size_t end;  // inclusive code indices along the path
  };
  std::vector<Run> runs;
  std::size_t j = 0;
  while (j < path_len) {
    const Band b = band_of(chain.codes[(run_end + j) % n]);
    std::size_t k = j;
    while (k + 1 < path_len && band_of(chain.codes[(run_end + k + 1) % n]) == b) ++k;
    if (b != Band::kNeutral && k - j + 1 >= static_cast<std::size_t>(options.min_run)) {
      runs.push_back({b, j, k});
    }
    j = k + 1;
  }

  std::vector<PointF> tips;
  std::vector<PointF> valleys;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].band == runs[r - 1].band) continue;
    // Code i moves from path pixel i to i+1. Within the transition, take the
    // middle of the pixels at the extreme row.
    const bool tip = runs[r].band == Band::kDescending;
    const std::size_t lo = runs[r - 1].end + 1;
    const std::size_t hi = runs[r].begin;
    int extreme = at(run_end + lo).y;
    for (std::size_t i = lo; i <= hi; ++i) {
      const int y = at(run_end + i).y;
      extreme = tip ? std::min(extreme, y) : std::max(extreme, y);
    }
    std::size_t first = hi;
    std::size_t last = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
      if (at(run_end + i).y != extreme) continue;
      first = std::min(first, i);
      last = std::max(last, i);
    }
    const Point a = at(run_end + first);
    const Point b = at(run_end + last);
    (tip ? tips : valleys).push_back({(a.x + b.x) / 2.0, (a.y + b.y) / 2.0});
  }

  if (tips.size() != 5 || valleys.size() != 4) {
    throw Error(ErrorKind::kLandmark, "expected 5 fingertips and 4 valleys, found " +
                                          std::to_string(tips.size()) + " and " +
                                          std::to_string(valleys.size()));
  }

  Landmarks lm;
  std::copy(tips.begin(), tips.end(), lm.tips.begin());
  std::copy(valleys.begin(), valleys.end(), lm.valleys.begin());
  const Point w0 = at(run_end);
  const Point w1 = at(run_start);
  lm.wrist = {PointF{double(w0.x), double(w0.y)}, PointF{double(w1.x), double(w1.y)}};
  // The thumb end sits lower on both counts: its tip and its valley.
  const double thumb_first = (lm.tips.front().y - lm.tips.back().y) +
                          (lm.valleys.front().y - lm.valleys.back().y);
  if (thumb_first < 0) {
    std::reverse(lm.tips.begin(), lm.tips.end());
    std::reverse(lm.valleys.begin(), lm.valleys.end());
    std::swap(lm.wrist[0], lm.wrist[1]);
  }
  for (std::size_t v = 0; v < 4; ++v) {
    if (!(lm.tips[v].y < lm.valleys[v].y && lm.tips[v + 1].y < lm.valleys[v].y)) {
      throw Error(ErrorKind::kLandmark, "fingertip lies below an adjacent valley");
    }
  }
  return lm;
}

}  // namespace handgeo

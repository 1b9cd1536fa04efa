#include "handgeo/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <regex>
#include <string>

#include "handgeo/bmp.hpp"
#include "handgeo/error.hpp"

namespace handgeo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMaxTiltDeg = 10.0;

PointF operator+(PointF a, PointF b) { return {a.x + b.x, a.y + b.y}; }
PointF operator-(PointF a, PointF b) { return {a.x - b.x, a.y - b.y}; }
PointF operator*(double s, PointF a) { return {s * a.x, s * a.y}; }
double dot(PointF a, PointF b) { return a.x * b.x + a.y * b.y; }
double norm(PointF a) { return std::hypot(a.x, a.y); }

struct Capsule {
  PointF a;
  PointF b;
  double r;

  double sdf(PointF p) const {
    const PointF pa = p - a;
    const PointF ba = b - a;
    const double len2 = dot(ba, ba);
    const double h = len2 > 0 ? std::clamp(dot(pa, ba) / len2, 0.0, 1.0) : 0.0;
    return norm(pa - h * ba) - r;
  }
};

struct Box {
  double x0, x1, y0, y1;

  double sdf(PointF p) const {
    const double qx = std::abs(p.x - 0.5 * (x0 + x1)) - 0.5 * (x1 - x0);
    const double qy = std::abs(p.y - 0.5 * (y0 + y1)) - 0.5 * (y1 - y0);
    return std::hypot(std::max(qx, 0.0), std::max(qy, 0.0)) + std::min(std::max(qx, qy), 0.0);
  }
};

struct Disc {
  PointF c;
  double r;

  double sdf(PointF p) const { return norm(p - c) - r; }
};

// Hand outline in its own frame (origin at the palm top centre, y down),
// placed on the canvas by a rotation about the palm centre and clipped by a
// horizontal cut standing in for the scanner edge.
struct HandShape {
  std::vector<Capsule> capsules;
  std::vector<Box> boxes;
  std::vector<Disc> notches;
  PointF pivot_hand;
  PointF pivot_image;
  double cos_t = 1;
  double sin_t = 0;
  double cut_y = 0;

  PointF to_image(PointF p) const {
    const PointF d = p - pivot_hand;
    return {pivot_image.x + cos_t * d.x - sin_t * d.y, pivot_image.y + sin_t * d.x + cos_t * d.y};
  }
  PointF to_hand(PointF p) const {
    const PointF d = p - pivot_image;
    return {pivot_hand.x + cos_t * d.x + sin_t * d.y, pivot_hand.y - sin_t * d.x + cos_t * d.y};
  }
  PointF image_direction(PointF v) const {
    return {cos_t * v.x - sin_t * v.y, sin_t * v.x + cos_t * v.y};
  }

  double sdf_hand(PointF p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : capsules) d = std::min(d, c.sdf(p));
    for (const auto& b : boxes) d = std::min(d, b.sdf(p));
    for (const auto& n : notches) d = std::max(d, -n.sdf(p));
    return d;
  }
  // Negative inside the clipped shape, in image coordinates.
  double field(PointF image) const { return std::max(sdf_hand(to_hand(image)), image.y - cut_y); }
};

struct Layout {
  HandShape shape;
  GroundTruth truth;
  int width = 0;
  int height = 0;
  int cut_row = 0;
};

[[noreturn]] void render_error(const std::string& what) { throw Error(ErrorKind::kRender, what); }

PointF up(double angle_rad) { return {std::sin(angle_rad), -std::cos(angle_rad)}; }

PointF mid(PointF a, PointF b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }

RawFeatures truth_features(const GroundTruth& gt, double dpi) {
  const double mm = mm_per_pixel(dpi);
  auto nearest = [&](PointF v) {
    return norm(v - gt.wrist[0]) <= norm(v - gt.wrist[1]) ? gt.wrist[0] : gt.wrist[1];
  };
  const std::array<std::array<PointF, 2>, 5> bases{{
      {gt.valleys[0], nearest(gt.valleys[0])},
      {gt.valleys[0], gt.valleys[1]},
      {gt.valleys[1], gt.valleys[2]},
      {gt.valleys[2], gt.valleys[3]},
      {gt.valleys[3], nearest(gt.valleys[3])},
  }};
  std::array<double, kRawFeatureCount> v{};
  for (std::size_t f = 0; f < 5; ++f) {
    v[f] = norm(gt.tips[f] - mid(bases[f][0], bases[f][1])) * mm;
    v[6 + f] = norm(bases[f][0] - bases[f][1]) * mm;
  }
  v[5] = norm(gt.wrist[0] - gt.wrist[1]) * mm;
  v[11] = gt.perimeter_px * mm;
  v[12] = gt.area_px * mm * mm;
  return RawFeatures::from_values(v);
}

Layout build_layout(const HandParams& hp, const RenderOptions& opt) {
  const double s = opt.dpi / kDefaultDpi;
  const bool validate = opt.defect == Defect::kNone;

  for (std::size_t f = 0; f < 5; ++f) {
    if (!(hp.lengths[f] > 0 && hp.widths[f] > 0)) render_error("finger dimensions must be positive");
    if (hp.lengths[f] <= hp.widths[f] / 2) render_error("finger shorter than its half width");
  }
  if (!(hp.palm_width > 0 && hp.palm_height > 0)) render_error("palm dimensions must be positive");
  if (std::abs(hp.tilt_deg) > kMaxTiltDeg) render_error("tilt outside [-10, 10] degrees");

  Layout out;
  out.width = static_cast<int>(std::lround(opt.canvas_width * s));
  out.height = static_cast<int>(std::lround(opt.canvas_height * s));
  out.cut_row = out.height - 1 - static_cast<int>(std::lround(6 * s));

  const double pw = hp.palm_width * s;
  const double ph = hp.palm_height * s;
  std::array<double, 5> len{};
  std::array<double, 5> wid{};
  for (std::size_t f = 0; f < 5; ++f) {
    len[f] = hp.lengths[f] * s;
    wid[f] = hp.widths[f] * s;
  }

  const double gap = (pw - (wid[1] + wid[2] + wid[3] + wid[4])) / 3.0;
  if (validate && gap < opt.min_gap * s) {
    render_error("merged fingers: base gap " + std::to_string(gap) + " px below minimum " +
                 std::to_string(opt.min_gap * s));
  }

  HandShape& shape = out.shape;
  const double tilt = hp.tilt_deg * kDegToRad;
  shape.cos_t = std::cos(tilt);
  shape.sin_t = std::sin(tilt);
  shape.pivot_hand = {0.0, ph / 2};
  shape.pivot_image = {std::round(0.42 * out.width) + opt.offset_x,
                       out.cut_row - std::round(40 * s) - std::round(ph / 2) + opt.offset_y};
  shape.cut_y = out.cut_row + 0.5;

  shape.boxes.push_back({-pw / 2, pw / 2, 0.0, ph});
  const double ww = 0.8 * pw;
  shape.boxes.push_back({-ww / 2, ww / 2, ph - 1.0, ph + 4.0 * out.height});

  // Finger slots across the palm top, left to right: little, ring, middle, first.
  const double splay = hp.splay_deg * kDegToRad;
  std::array<double, 5> base_x{};
  std::array<double, 5> angle{0.0, splay, 0.0, -splay / 2, -splay};
  base_x[4] = -pw / 2 + wid[4] / 2;
  base_x[3] = base_x[4] + wid[4] / 2 + gap + wid[3] / 2;
  base_x[2] = base_x[3] + wid[3] / 2 + gap + wid[2] / 2;
  base_x[1] = base_x[2] + wid[2] / 2 + gap + wid[1] / 2;

  const bool merged = opt.defect == Defect::kMergedFingers;
  const int mf = opt.merged_finger;
  if (merged && (mf < 1 || mf > 3)) render_error("merged_finger must be 1, 2 or 3");
  if (merged) {
    base_x[static_cast<std::size_t>(mf + 1)] = base_x[static_cast<std::size_t>(mf)];
    angle[static_cast<std::size_t>(mf + 1)] = angle[static_cast<std::size_t>(mf)];
  }

  GroundTruth& gt = out.truth;
  for (std::size_t f = 1; f < 5; ++f) {
    const double r = wid[f] / 2;
    const PointF a{base_x[f], 0.0};
    const PointF b = a + (len[f] - r) * up(angle[f]);
    shape.capsules.push_back({a, b, r});
    gt.tips[f] = shape.to_image(b) - PointF{0.0, r};
  }

  // Semicircular notches finish each inter-finger gap below the palm line.
  const double rho = gap / 2;
  for (std::size_t f = 1; f < 4; ++f) {
    // valley f sits between finger f and finger f+1 (toward the little finger).
    const double cx = base_x[f + 1] + wid[f + 1] / 2 + rho;
    const PointF centre{cx, 0.0};
    gt.valleys[f] = shape.to_image(centre) + PointF{0.0, rho};
    if (merged && static_cast<int>(f) == mf) continue;
    if (rho > 0) shape.notches.push_back({centre, rho});
  }

  // Thumb: leaves the palm's right side, leaning outward.
  const double alpha = hp.thumb_angle_deg * kDegToRad;
  const double rt = wid[0] / 2;
  const PointF tb{pw / 2 - rt - s, 0.75 * ph};
  const PointF ut = up(alpha);
  if (validate && !(alpha > 0.1 && alpha < 0.8)) render_error("thumb angle out of range");
  const double t_exit = (pw / 2 - tb.x) / ut.x;
  const PointF tend = tb + (t_exit + len[0] - rt) * ut;
  shape.capsules.push_back({tb, tend, rt});
  gt.tips[0] = shape.to_image(tend) - PointF{0.0, rt};

  const PointF inner{-std::cos(alpha), -std::sin(alpha)};
  const double t_crotch = (pw / 2 - tb.x - rt * inner.x) / ut.x;
  const PointF crotch = tb + rt * inner + t_crotch * ut;
  if (validate && crotch.y < 3.0 * s) render_error("thumb crotch too close to the palm top");
  // The thumb/palm wedge is too acute to survive filtering, so its apex is
  // rounded out like the finger gaps.
  const double crotch_r = 4.0 * s;
  shape.notches.push_back({crotch, crotch_r});
  gt.valleys[0] = shape.to_image(crotch) + PointF{0.0, crotch_r};

  // Forearm sides meet the cut row.
  for (int side = 0; side < 2; ++side) {
    const PointF p0 = shape.to_image({side == 0 ? ww / 2 : -ww / 2, ph});
    const PointF dir = shape.image_direction({0.0, 1.0});
    const double t = (out.cut_row - p0.y) / dir.y;
    gt.wrist[static_cast<std::size_t>(side)] = p0 + t * dir;
  }
  return out;
}

double marching_squares_length(const HandShape& shape, double x0, double y0, double x1, double y1,
                               double h) {
  const int nx = static_cast<int>(std::ceil((x1 - x0) / h)) + 1;
  const int ny = static_cast<int>(std::ceil((y1 - y0) / h)) + 1;
  std::vector<double> f(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      f[static_cast<std::size_t>(j) * nx + i] = shape.field({x0 + i * h, y0 + j * h});
    }
  }
  auto val = [&](int i, int j) { return f[static_cast<std::size_t>(j) * nx + i]; };
  auto cross = [](double a, double b) { return a / (a - b); };

  double length = 0.0;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double v00 = val(i, j), v10 = val(i + 1, j), v01 = val(i, j + 1), v11 = val(i + 1, j + 1);
      std::vector<PointF> pts;
      if ((v00 <= 0) != (v10 <= 0)) pts.push_back({cross(v00, v10), 0.0});
      if ((v10 <= 0) != (v11 <= 0)) pts.push_back({1.0, cross(v10, v11)});
      if ((v01 <= 0) != (v11 <= 0)) pts.push_back({cross(v01, v11), 1.0});
      if ((v00 <= 0) != (v01 <= 0)) pts.push_back({0.0, cross(v00, v01)});
      if (pts.size() == 2) {
        length += norm(pts[0] - pts[1]) * h;
      } else if (pts.size() == 4) {
        length += (norm(pts[0] - pts[1]) + norm(pts[2] - pts[3])) * h;
      }
    }
  }
  return length;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

HandParams canonical_hand() {
  HandParams hp;
  hp.lengths = {58, 71, 81, 74, 58};
  hp.widths = {20, 16, 17, 15.5, 13.5};
  hp.palm_width = 16 + 17 + 15.5 + 13.5 + 3 * 8.5;
  hp.palm_height = 95;
  hp.tilt_deg = 0;
  hp.splay_deg = 5;
  hp.thumb_angle_deg = 28;
  hp.seed = 0;
  return hp;
}

Rendering render(const HandParams& params, const RenderOptions& options) {
  const Layout layout = build_layout(params, options);
  const HandShape& shape = layout.shape;

  Rendering out;
  out.image = GrayImage(layout.width, layout.height, options.dpi);
  out.support = BinaryImage(layout.width, layout.height, options.dpi);

  int min_x = layout.width, min_y = layout.height, max_x = -1, max_y = -1;
  for (int y = 0; y <= layout.cut_row; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      if (shape.field({static_cast<double>(x), static_cast<double>(y)}) <= 0.0) {
        out.support.at(x, y) = 1;
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  const int margin = 3;
  if (max_x < 0 || min_x < margin || min_y < margin || max_x >= layout.width - margin) {
    render_error("hand exceeds the canvas");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> noise(-options.noise_level, options.noise_level);
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      double v = out.support.at(x, y) ? options.hand_level : options.background_level;
      if (options.noise_level > 0) v += noise(rng);
      v = std::clamp(v, 0.0, 1.0);
      out.image.at(x, y) = std::round(v * 255.0) / 255.0;
    }
  }

  GroundTruth& gt = out.truth;
  gt = layout.truth;

  constexpr int kSub = 4;
  long inside = 0;
  for (int y = min_y - 1; y <= max_y + 1; ++y) {
    for (int x = min_x - 1; x <= max_x + 1; ++x) {
      for (int j = 0; j < kSub; ++j) {
        for (int i = 0; i < kSub; ++i) {
          const PointF p{x - 0.5 + (i + 0.5) / kSub, y - 0.5 + (j + 0.5) / kSub};
          if (shape.field(p) <= 0.0) ++inside;
        }
      }
    }
  }
  gt.area_px = static_cast<double>(inside) / (kSub * kSub);
  gt.perimeter_px = marching_squares_length(shape, min_x - 2.0, min_y - 2.0, max_x + 2.0,
                                            max_y + 2.0, 0.25);
  gt.features = truth_features(gt, options.dpi);
  return out;
}

Corpus make_corpus(const CorpusConfig& config) {
  if (!(config.intra_sigma >= 0.0 && config.intra_sigma <= 0.1)) {
    throw Error(ErrorKind::kConfig, "intra_sigma must lie in [0, 0.1]");
  }
  if (config.persons < 1 || config.samples < 1) {
    throw Error(ErrorKind::kConfig, "corpus needs at least one person and one sample");
  }
  const auto& rg = config.ranges;
  const auto seed_lo = static_cast<std::uint32_t>(config.master_seed & 0xffffffffu);
  const auto seed_hi = static_cast<std::uint32_t>(config.master_seed >> 32);

  Corpus corpus;
  corpus.config = config;
  for (int p = 1; p <= config.persons; ++p) {
    std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(p), 0u};
    std::mt19937_64 rng(seq);
    auto uni = [&](const std::array<double, 2>& r) {
      return std::uniform_real_distribution<double>(r[0], r[1])(rng);
    };
    HandParams proto;
    for (std::size_t f = 0; f < 5; ++f) {
      proto.lengths[f] = uni(rg.lengths[f]);
      proto.widths[f] = uni(rg.widths[f]);
    }
    const double gap = uni(rg.gap);
    proto.palm_width =
        proto.widths[1] + proto.widths[2] + proto.widths[3] + proto.widths[4] + 3 * gap;
    proto.palm_height = uni(rg.palm_height);
    proto.tilt_deg = uni(rg.tilt_deg);
    proto.splay_deg = uni(rg.splay_deg);
    proto.thumb_angle_deg = uni(rg.thumb_angle_deg);
    corpus.prototypes.push_back(proto);
  }

  for (int p = 1; p <= config.persons; ++p) {
    const HandParams& proto = corpus.prototypes[static_cast<std::size_t>(p - 1)];
    for (int j = 1; j <= config.samples; ++j) {
      std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(p),
                        static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_int_distribution<int> shift(-rg.max_shift, rg.max_shift);
      std::uniform_int_distribution<int> lift(-1, 1);

      bool done = false;
      for (int attempt = 1; attempt <= config.max_attempts && !done; ++attempt) {
        HandParams hp = proto;
        auto jitter = [&](double v) { return v * (1.0 + config.intra_sigma * gauss(rng)); };
        for (std::size_t f = 0; f < 5; ++f) {
          hp.lengths[f] = jitter(proto.lengths[f]);
          hp.widths[f] = jitter(proto.widths[f]);
        }
        hp.palm_width = jitter(proto.palm_width);
        hp.palm_height = jitter(proto.palm_height);
        hp.seed = rng();
        RenderOptions ro = config.render;
        ro.noise_level = config.noise_level;
        ro.offset_x = shift(rng);
        ro.offset_y = lift(rng);
        try {
          Rendering r = render(hp, ro);
          const Extraction ex = extract(r.image, config.extraction);
          CorpusSample sample;
          sample.features = ex.features;
          sample.person = p;
          sample.index = j;
          sample.attempts = attempt;
          sample.params = hp;
          sample.image = std::move(r.image);
          sample.truth = r.truth;
          corpus.samples.push_back(std::move(sample));
          done = true;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kRender && e.kind() != ErrorKind::kContour &&
              e.kind() != ErrorKind::kLandmark) {
            throw;
          }
        }
      }
      if (!done) {
        throw Error(ErrorKind::kCorpus, "person " + std::to_string(p) + " sample " +
                                            std::to_string(j) + " failed after " +
                                            std::to_string(config.max_attempts) + " attempts");
      }
    }
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& c = corpus.config;
  {
    std::ofstream os(dir / "corpus.cfg");
    if (!os) throw Error(ErrorKind::kIo, "cannot write " + (dir / "corpus.cfg").string());
    os << "master_seed=" << c.master_seed << '\n'
       << "intra_sigma=" << format_double(c.intra_sigma) << '\n'
       << "noise_level=" << format_double(c.noise_level) << '\n'
       << "dpi=" << format_double(c.render.dpi) << '\n'
       << "persons=" << c.persons << '\n'
       << "samples=" << c.samples << '\n'
       << "hand_level=" << format_double(c.render.hand_level) << '\n'
       << "background_level=" << format_double(c.render.background_level) << '\n';
  }

  for (int p = 1; p <= c.persons; ++p) {
    const fs::path pdir = dir / ("person_" + two_digits(p));
    fs::create_directories(pdir);
    std::ofstream gt(pdir / "ground_truth.csv");
    if (!gt) throw Error(ErrorKind::kIo, "cannot write " + (pdir / "ground_truth.csv").string());
    gt << "sample";
    for (int i = 0; i < 5; ++i) gt << ",tip" << i << "_x,tip" << i << "_y";
    for (int i = 0; i < 4; ++i) gt << ",valley" << i << "_x,valley" << i << "_y";
    for (int i = 0; i < 2; ++i) gt << ",wrist" << i << "_x,wrist" << i << "_y";
    for (const auto name : kRawFeatureNames) gt << ',' << name;
    gt << ",area_px,perimeter_px\n";

    for (const auto& s : corpus.samples) {
      if (s.person != p) continue;
      save_bmp(s.image, pdir / ("sample_" + two_digits(s.index) + ".bmp"));
      const auto& t = s.truth;
      gt << s.index;
      for (const auto& q : t.tips) gt << ',' << format_double(q.x) << ',' << format_double(q.y);
      for (const auto& q : t.valleys) gt << ',' << format_double(q.x) << ',' << format_double(q.y);
      for (const auto& q : t.wrist) gt << ',' << format_double(q.x) << ',' << format_double(q.y);
      for (const double v : t.features.values()) gt << ',' << format_double(v);
      gt << ',' << format_double(t.area_px) << ',' << format_double(t.perimeter_px) << '\n';
    }
  }
}

std::vector<ScanFile> list_scans(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, dir.string() + " is not a directory");
  static const std::regex person_re(R"(person_(\d+))");
  static const std::regex sample_re(R"(sample_(\d+)\.bmp)");
  std::vector<ScanFile> scans;
  for (const auto& pe : fs::directory_iterator(dir)) {
    std::smatch pm;
    const std::string pname = pe.path().filename().string();
    if (!pe.is_directory() || !std::regex_match(pname, pm, person_re)) continue;
    const int person = std::stoi(pm[1].str());
    for (const auto& se : fs::directory_iterator(pe.path())) {
      std::smatch sm;
      const std::string sname = se.path().filename().string();
      if (!se.is_regular_file() || !std::regex_match(sname, sm, sample_re)) continue;
      scans.push_back({person, std::stoi(sm[1].str()), se.path()});
    }
  }
  std::sort(scans.begin(), scans.end(), [](const ScanFile& a, const ScanFile& b) {
    return a.person != b.person ? a.person < b.person : a.sample < b.sample;
  });
  return scans;
}

}  // namespace handgeo

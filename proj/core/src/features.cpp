#include "handgeo/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

PointF midpoint(PointF a, PointF b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

PointF nearest(PointF from, const std::array<PointF, 2>& candidates) {
  return distance(from, candidates[0]) <= distance(from, candidates[1]) ? candidates[0]
                                                                         : candidates[1];
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw Error(ErrorKind::kFormat, "invalid number '" + s + "' in feature CSV");
  }
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw Error(ErrorKind::kFormat, "invalid integer '" + s + "' in feature CSV");
  }
  return v;
}

}  // namespace

std::array<double, kRawFeatureCount> RawFeatures::values() const {
  return {thumb_length, first_length,  middle_length, ring_length, little_length,
          wrist_length, thumb_base_width, first_width, middle_width, ring_width,
          little_width, perimeter,     surface};
}

RawFeatures RawFeatures::from_values(std::span<const double, kRawFeatureCount> v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12]};
}

std::array<std::string_view, kFeatureDim> feature_names() {
  std::array<std::string_view, kFeatureDim> names{};
  for (std::size_t i = 0; i < kFeatureDim; ++i) names[i] = kRawFeatureNames[kSelectedFeatures[i]];
  return names;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance(PointF a, PointF b) { return std::hypot(a.x - b.x, a.y - b.y); }

double perimeter_mm(const ChainCode& chain, double dpi) {
  return perimeter(chain) * mm_per_pixel(dpi);
}

double surface_mm2(const BinaryImage& silhouette) {
  const double s = mm_per_pixel(silhouette.dpi());
  return static_cast<double>(silhouette.count()) * s * s;
}

RawFeatures measure(const Landmarks& lm, const ChainCode& chain, const BinaryImage& silhouette) {
  const double dpi = silhouette.dpi();
  const double mm = mm_per_pixel(dpi);

  const PointF thumb_wrist = nearest(lm.valleys[0], lm.wrist);
  const PointF little_wrist = nearest(lm.valleys[3], lm.wrist);
  const std::array<std::array<PointF, 2>, 5> bases{{
      {lm.valleys[0], thumb_wrist},
      {lm.valleys[0], lm.valleys[1]},
      {lm.valleys[1], lm.valleys[2]},
      {lm.valleys[2], lm.valleys[3]},
      {lm.valleys[3], little_wrist},
  }};

  std::array<double, 5> lengths{};
  std::array<double, 5> widths{};
  for (std::size_t f = 0; f < 5; ++f) {
    lengths[f] = distance(lm.tips[f], midpoint(bases[f][0], bases[f][1])) * mm;
    widths[f] = distance(bases[f][0], bases[f][1]) * mm;
  }

  RawFeatures raw;
  raw.thumb_length = lengths[0];
  raw.first_length = lengths[1];
  raw.middle_length = lengths[2];
  raw.ring_length = lengths[3];
  raw.little_length = lengths[4];
  raw.wrist_length = distance(lm.wrist[0], lm.wrist[1]) * mm;
  raw.thumb_base_width = widths[0];
  raw.first_width = widths[1];
  raw.middle_width = widths[2];
  raw.ring_width = widths[3];
  raw.little_width = widths[4];
  raw.perimeter = perimeter_mm(chain, dpi);
  raw.surface = surface_mm2(silhouette);
  return raw;
}

FeatureVector select(const RawFeatures& raw) {
  const auto all = raw.values();
  FeatureVector v{};
  for (std::size_t i = 0; i < kFeatureDim; ++i) v[i] = all[kSelectedFeatures[i]];
  return v;
}

ScalerParams fit_scaler(std::span<const FeatureVector> training) {
  if (training.size() < 2) {
    throw Error(ErrorKind::kScaler, "scaler needs at least two training vectors");
  }
  ScalerParams p;
  p.min.fill(std::numeric_limits<double>::infinity());
  p.max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& v : training) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      p.min[d] = std::min(p.min[d], v[d]);
      p.max[d] = std::max(p.max[d], v[d]);
    }
  }
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    if (!(p.max[d] > p.min[d])) {
      throw Error(ErrorKind::kScaler, "degenerate dimension " + std::to_string(d) + " (" +
                                          std::string(feature_names()[d]) + "): max == min");
    }
  }
  return p;
}

FeatureVector apply_scaler(const ScalerParams& params, const FeatureVector& v) {
  FeatureVector out{};
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    const double s = 2.0 * (v[d] - params.min[d]) / (params.max[d] - params.min[d]) - 1.0;
    out[d] = std::clamp(s, -1.0, 1.0);
  }
  return out;
}

void write_feature_csv(std::ostream& os, std::span<const FeatureRow> rows) {
  os << "person,sample";
  for (const auto name : feature_names()) os << ',' << name;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (const auto& row : rows) {
    os << row.person << ',' << row.sample;
    for (const double v : row.features) os << ',' << v;
    os << '\n';
  }
  os.precision(old_precision);
}

std::vector<FeatureRow> read_feature_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::kFormat, "empty feature CSV");
  const auto header = split_csv(line);
  if (header.size() != kFeatureDim + 2 || header[0] != "person" || header[1] != "sample") {
    throw Error(ErrorKind::kFormat, "unexpected feature CSV header: " + line);
  }
  std::vector<FeatureRow> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != kFeatureDim + 2) {
      throw Error(ErrorKind::kFormat, "feature CSV row has " + std::to_string(fields.size()) +
                                          " fields, expected " +
                                          std::to_string(kFeatureDim + 2));
    }
    FeatureRow row;
    row.person = parse_int(fields[0]);
    row.sample = parse_int(fields[1]);
    for (std::size_t d = 0; d < kFeatureDim; ++d) row.features[d] = parse_double(fields[d + 2]);
    rows.push_back(row);
  }
  return rows;
}

void save_feature_csv(std::span<const FeatureRow> rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_feature_csv(os, rows);
}

std::vector<FeatureRow> load_feature_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_feature_csv(is);
}

}  // namespace handgeo

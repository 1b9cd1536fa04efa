#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "handgeo/contour.hpp"
#include "handgeo/imaging.hpp"

namespace handgeo {

inline constexpr std::size_t kRawFeatureCount = 13;
inline constexpr std::size_t kFeatureDim = 9;

/// The thirteen hand measurements, in mm (surface in mm^2).
struct RawFeatures {
  double thumb_length = 0;
  double first_length = 0;
  double middle_length = 0;
  double ring_length = 0;
  double little_length = 0;
  double wrist_length = 0;
  double thumb_base_width = 0;
  double first_width = 0;
  double middle_width = 0;
  double ring_width = 0;
  double little_width = 0;
  double perimeter = 0;
  double surface = 0;

  std::array<double, kRawFeatureCount> values() const;
  static RawFeatures from_values(std::span<const double, kRawFeatureCount> v);
};

inline constexpr std::array<std::string_view, kRawFeatureCount> kRawFeatureNames{
    "thumb_length", "first_length",  "middle_length", "ring_length", "little_length",
    "wrist_length", "thumb_base_width", "first_width", "middle_width", "ring_width",
    "little_width", "perimeter",     "surface"};

/// Features 2-5, 8-12 (1-based) of RawFeatures, in that order.
using FeatureVector = std::array<double, kFeatureDim>;

inline constexpr std::array<std::size_t, kFeatureDim> kSelectedFeatures{1, 2, 3, 4, 7, 8, 9, 10, 11};

std::array<std::string_view, kFeatureDim> feature_names();

inline double mm_per_pixel(double dpi) { return 25.4 / dpi; }

double distance(Point a, Point b);
double distance(PointF a, PointF b);

/// Outline length in mm.
double perimeter_mm(const ChainCode& chain, double dpi);

/// Foreground pixel count times the pixel area in mm^2.
double surface_mm2(const BinaryImage& silhouette);

/// The thirteen measurements in mm, using the silhouette's dpi. Each
/// finger's base segment joins its flanking valleys, with the nearest wrist
/// endpoint completing the thumb and little finger. Length runs from the tip
/// to the base midpoint; width is the base segment length.
RawFeatures measure(const Landmarks& landmarks, const ChainCode& chain,
                    const BinaryImage& silhouette);

FeatureVector select(const RawFeatures& raw);

struct ScalerParams {
  FeatureVector min{};
  FeatureVector max{};

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

/// Per-dimension min/max over the training vectors. Throws kScaler naming the
/// first dimension whose range is empty.
ScalerParams fit_scaler(std::span<const FeatureVector> training);

/// 2(x-min)/(max-min) - 1, clipped to [-1, 1].
FeatureVector apply_scaler(const ScalerParams& params, const FeatureVector& v);

/// One row of a feature table: person id, 1-based sample index, vector.
struct FeatureRow {
  int person = 0;
  int sample = 0;
  FeatureVector features{};

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// CSV with header "person,sample,<9 feature names>"; values use 17
/// significant digits so a write/read round trip is exact.
void write_feature_csv(std::ostream& os, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_feature_csv(std::istream& is);
void save_feature_csv(std::span<const FeatureRow> rows, const std::filesystem::path& path);
std::vector<FeatureRow> load_feature_csv(const std::filesystem::path& path);

}  // namespace handgeo

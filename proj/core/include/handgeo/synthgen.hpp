#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "handgeo/features.hpp"
#include "handgeo/imaging.hpp"
#include "handgeo/pipeline.hpp"

namespace handgeo {

/// Parametric hand, dimensions in pixels at 100 dpi (scaled to the render
/// dpi). Finger arrays run thumb, first, middle, ring, little.
struct HandParams {
  std::array<double, 5> lengths{};
  std::array<double, 5> widths{};
  double palm_width = 0;
  double palm_height = 0;
  double tilt_deg = 0;
  /// Fan angle of the four fingers: first +splay, middle 0, ring -splay/2,
  /// little -splay (positive leans toward the thumb).
  double splay_deg = 5;
  double thumb_angle_deg = 28;
  /// Seeds the additive scanner noise.
  std::uint64_t seed = 0;
};

/// Mid-range hand used by tests and examples.
HandParams canonical_hand();

enum class Defect {
  kNone,
  /// Finger merged_finger+1 is drawn on finger merged_finger's axis, so the
  /// two collapse into one outline (no geometry validation is applied).
  kMergedFingers,
};

struct RenderOptions {
  double dpi = kDefaultDpi;
  double noise_level = 0.0;
  double background_level = 0.01;
  double hand_level = 0.13;
  /// Canvas size in pixels at 100 dpi.
  int canvas_width = 280;
  int canvas_height = 320;
  /// Placement shift in whole pixels at the render dpi.
  int offset_x = 0;
  int offset_y = 0;
  /// Smallest allowed gap between adjacent finger bases, pixels at 100 dpi.
  double min_gap = 6.0;
  Defect defect = Defect::kNone;
  int merged_finger = 2;
};

struct GroundTruth {
  std::array<PointF, 5> tips{};
  std::array<PointF, 4> valleys{};
  std::array<PointF, 2> wrist{};  // thumb side, little side
  /// Measurements of the ideal shape with the same definitions as measure().
  RawFeatures features;
  double area_px = 0;
  double perimeter_px = 0;
};

struct Rendering {
  GrayImage image;
  /// Pixels whose centre lies inside the ideal shape.
  BinaryImage support;
  GroundTruth truth;
};

/// Rasterizes a bright hand on a dark background. Pixel values are quantized
/// to k/255 so a BMP round trip is lossless. Throws kRender for invalid or
/// merged geometry unless a defect is requested explicitly.
Rendering render(const HandParams& params, const RenderOptions& options = {});

/// Uniform sampling ranges for corpus prototypes, pixels at 100 dpi.
struct AnthropometricRanges {
  std::array<std::array<double, 2>, 5> lengths{{{50, 68}, {62, 80}, {72, 90}, {64, 84}, {50, 66}}};
  std::array<std::array<double, 2>, 5> widths{{{18, 22}, {14, 18}, {15, 19}, {14, 17}, {12, 15}}};
  std::array<double, 2> gap{7.5, 10};
  std::array<double, 2> palm_height{85, 110};
  std::array<double, 2> tilt_deg{-5, 5};
  std::array<double, 2> splay_deg{3, 8};
  std::array<double, 2> thumb_angle_deg{24, 32};
  /// Per-sample placement shift, whole pixels in each axis.
  int max_shift = 4;
};

struct CorpusConfig {
  std::uint64_t master_seed = 1;
  double intra_sigma = 0.0375;
  double noise_level = 0.01;
  int persons = 22;
  int samples = 10;
  int max_attempts = 100;
  RenderOptions render{};
  AnthropometricRanges ranges{};
  ExtractionConfig extraction{};
};

struct CorpusSample {
  int person = 0;  // 1-based
  int index = 0;   // 1-based
  int attempts = 0;
  HandParams params;
  GrayImage image;
  GroundTruth truth;
  /// Extracted with the corpus's extraction config.
  FeatureVector features{};
};

struct Corpus {
  CorpusConfig config;
  std::vector<HandParams> prototypes;
  std::vector<CorpusSample> samples;  // person-major
};

/// Draws one prototype per person and renders jittered samples, replacing
/// any sample whose scan fails landmark detection. Throws kConfig for an
/// intra_sigma outside [0, 0.1] and kCorpus when a sample keeps failing.
Corpus make_corpus(const CorpusConfig& config);

/// person_XX/sample_YY.bmp, person_XX/ground_truth.csv, corpus.cfg.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct ScanFile {
  int person = 0;
  int sample = 0;
  std::filesystem::path path;
};

/// Scans laid out as person_<i>/sample_<j>.bmp, sorted by person then sample.
std::vector<ScanFile> list_scans(const std::filesystem::path& dir);

}  // namespace handgeo

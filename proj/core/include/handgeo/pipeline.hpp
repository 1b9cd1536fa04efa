#pragma once

#include "handgeo/contour.hpp"
#include "handgeo/features.hpp"
#include "handgeo/imaging.hpp"

namespace handgeo {

struct ExtractionConfig {
  int filter_radius = 1;
  double threshold = kDefaultThreshold;
  double sigma = 1.0;
  /// Width of the frame cleared after binarization; 0 disables it.
  int border = 1;
  LandmarkOptions landmarks{};
};

/// Every intermediate of one scan's trip through the pipeline.
struct Extraction {
  BinaryImage silhouette;
  BinaryImage edges;
  ChainCode contour;
  Landmarks landmarks;
  RawFeatures raw;
  FeatureVector features{};
};

/// filter -> binarize -> clear border -> LoG edges -> trace -> landmarks ->
/// measure -> select. Propagates kContour / kLandmark errors for defective
/// scans.
Extraction extract(const GrayImage& scan, const ExtractionConfig& config = {});

}  // namespace handgeo

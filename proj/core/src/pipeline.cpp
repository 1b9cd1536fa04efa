#include "handgeo/pipeline.hpp"

namespace handgeo {

Extraction extract(const GrayImage& scan, const ExtractionConfig& config) {
  Extraction out;
  out.silhouette = binarize(lowpass_filter(scan, config.filter_radius), config.threshold);
  if (config.border > 0) out.silhouette = clear_border(out.silhouette, config.border);
  out.edges = detect_edges_log(out.silhouette, config.sigma);
  out.contour = trace_contour(out.edges);
  out.landmarks = find_landmarks(out.contour, config.landmarks);
  out.raw = measure(out.landmarks, out.contour, out.silhouette);
  out.features = select(out.raw);
  return out;
}

}  // namespace handgeo

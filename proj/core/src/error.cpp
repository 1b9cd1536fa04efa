#include "handgeo/error.hpp"

namespace handgeo {

std::string_view category_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kIo: return "io_error";
    case ErrorKind::kFormat: return "format_error";
    case ErrorKind::kSize: return "size_error";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kContour: return "contour_error";
    case ErrorKind::kLandmark: return "landmark_error";
    case ErrorKind::kScaler: return "scaler_error";
    case ErrorKind::kConfig: return "config_error";
    case ErrorKind::kTraining: return "training_error";
    case ErrorKind::kModel: return "model_error";
    case ErrorKind::kRender: return "render_error";
    case ErrorKind::kCorpus: return "corpus_error";
  }
  return "error";
}

}  // namespace handgeo

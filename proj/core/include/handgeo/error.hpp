#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace handgeo {

/// Failure categories. The CLI prints category_name() as the first field of
/// its one-line error report, so these names are part of the tool's output.
enum class ErrorKind {
  kIo,
  kFormat,
  kSize,
  kInvalidArgument,
  kContour,
  kLandmark,
  kScaler,
  kConfig,
  kTraining,
  kModel,
  kRender,
  kCorpus,
};

std::string_view category_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view category() const noexcept { return category_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace handgeo

#pragma once

#include <span>
#include <vector>

#include "handgeo/features.hpp"

namespace handgeo {

enum class Metric { kMse, kMad };

/// Sum of squared differences (not normalized).
double dist_mse(std::span<const double> x, std::span<const double> y);

/// Sum of absolute differences.
double dist_mad(std::span<const double> x, std::span<const double> y);

double dist(Metric metric, std::span<const double> x, std::span<const double> y);

struct Template {
  int person = 0;
  FeatureVector features{};

  friend bool operator==(const Template&, const Template&) = default;
};

/// One template per enrollment image.
struct TemplateDb {
  std::vector<Template> templates;

  friend bool operator==(const TemplateDb&, const TemplateDb&) = default;
};

TemplateDb build_templates(std::span<const FeatureRow> training);

/// Person of the closest template. Ties go to the lowest person id, then to
/// the earliest template. Throws kInvalidArgument for an empty database.
int nn_identify(const FeatureVector& x, const TemplateDb& db, Metric metric);

}  // namespace handgeo

#include "handgeo/nearest_neighbor.hpp"

#include <cmath>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

void check_dims(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kInvalidArgument, "dimension mismatch: " + std::to_string(x.size()) +
                                                 " vs " + std::to_string(y.size()));
  }
}

}  // namespace

double dist_mse(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y);
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double dist_mad(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y);
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
  return acc;
}

double dist(Metric metric, std::span<const double> x, std::span<const double> y) {
  return metric == Metric::kMse ? dist_mse(x, y) : dist_mad(x, y);
}

TemplateDb build_templates(std::span<const FeatureRow> training) {
  TemplateDb db;
  db.templates.reserve(training.size());
  for (const auto& row : training) db.templates.push_back({row.person, row.features});
  return db;
}

int nn_identify(const FeatureVector& x, const TemplateDb& db, Metric metric) {
  if (db.templates.empty()) throw Error(ErrorKind::kInvalidArgument, "empty template database");
  int best_person = db.templates.front().person;
  double best = dist(metric, x, db.templates.front().features);
  for (std::size_t i = 1; i < db.templates.size(); ++i) {
    const auto& t = db.templates[i];
    const double d = dist(metric, x, t.features);
    if (d < best || (d == best && t.person < best_person)) {
      best = d;
      best_person = t.person;
    }
  }
  return best_person;
}

}  // namespace handgeo

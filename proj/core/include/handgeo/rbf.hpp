#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "handgeo/features.hpp"

namespace handgeo {

struct RbfModel {
  std::vector<FeatureVector> centres;
  double spread = 1.0;
  Eigen::MatrixXd weights;  // centres x persons, no bias
  std::vector<int> persons;
  /// Centre count asked for; centres.size() is lower when the design lost rank.
  int requested_centres = 0;
  ScalerParams scaler{};
};

/// Median Euclidean distance over all pairs of training vectors.
double median_pairwise_distance(std::span<const FeatureRow> rows);

/// Gaussian kernel exp(-d^2 / (2 spread^2)).
double rbf_kernel(const FeatureVector& x, const FeatureVector& c, double spread);

/// Centres picked from the training points by greedy orthogonal least squares,
/// output weights by least squares on +1/-1 targets. A spread <= 0 selects the
/// median pairwise distance. Throws kInvalidArgument for a centre count
/// outside [1, training size] and kTraining for coincident training data.
RbfModel rbf_train(std::span<const FeatureRow> training, int centres, double spread = 0.0);

Eigen::VectorXd rbf_outputs(const RbfModel& model, const FeatureVector& x);

/// Argmax over the outputs; ties go to the lowest person id.
int rbf_identify(const RbfModel& model, const FeatureVector& x);

/// Largest absolute difference between outputs and +1/-1 targets.
double rbf_residual(const RbfModel& model, std::span<const FeatureRow> rows);

}  // namespace handgeo

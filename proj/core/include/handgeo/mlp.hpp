#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "handgeo/features.hpp"

namespace handgeo {

/// Mean of (t - a)^2 over every component of every sample. Throws
/// kInvalidArgument on a size mismatch.
double loss_mse(std::span<const double> targets, std::span<const double> outputs);

/// gamma * mse + (1 - gamma) * mean(w^2); gamma must lie in [0, 1].
double loss_msereg(std::span<const double> targets, std::span<const double> outputs,
                   std::span<const double> weights, double gamma);

enum class Loss { kMse, kMseReg };

struct TrainConfig {
  int hidden = 30;
  int epochs = 10;
  Loss loss = Loss::kMse;
  double gamma = 0.8;
  int multistart = 5;
  double lambda0 = 1e-3;
  double lambda_factor = 10.0;
  double lambda_max = 1e10;
  int max_retries = 10;
  std::uint64_t seed = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws kConfig for out-of-range fields.
void validate(const TrainConfig& config);

/// 9 -> hidden (tanh) -> one linear output per enrolled person.
struct MlpModel {
  Eigen::MatrixXd w1;  // hidden x 9
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // persons x hidden
  Eigen::VectorXd b2;
  /// Person id of each output, ascending.
  std::vector<int> persons;
  ScalerParams scaler{};
  TrainConfig config{};
  /// Loss after initialization and after every accepted step.
  std::vector<double> loss_history;

  int hidden() const { return static_cast<int>(w1.rows()); }
  int outputs() const { return static_cast<int>(w2.rows()); }
  std::size_t parameter_count() const;
};

/// Weights drawn uniformly from [-0.5, 0.5].
MlpModel mlp_init(int hidden, std::vector<int> persons, std::uint64_t seed);

/// Flattened parameters: for each hidden unit its input weights then bias,
/// then for each output its hidden weights then bias.
Eigen::VectorXd mlp_parameters(const MlpModel& model);
void mlp_set_parameters(MlpModel& model, const Eigen::VectorXd& params);

Eigen::VectorXd mlp_forward(const MlpModel& model, const FeatureVector& x);

/// d(outputs)/d(parameters), one row per (sample, output) pair, sample-major.
Eigen::MatrixXd mlp_jacobian(const MlpModel& model, std::span<const FeatureVector> inputs);

/// +1 at the person's output, -1 elsewhere; rows follow `inputs`.
Eigen::MatrixXd mlp_targets(const std::vector<int>& persons, std::span<const FeatureRow> rows);

/// Loss of the model on the rows under config.loss / config.gamma.
double mlp_loss(const MlpModel& model, std::span<const FeatureRow> rows, const TrainConfig& config);

/// The damped step for the LM system (s_e J'J + (s_w + lambda) I) d = -(s_e J'e + s_w w),
/// where s_e, s_w weight the data and weight terms of the loss. Solved through
/// the network's block structure; mlp_step_dense is the reference.
Eigen::VectorXd mlp_step(const MlpModel& model, std::span<const FeatureRow> rows,
                         const TrainConfig& config, double lambda);
Eigen::VectorXd mlp_step_dense(const MlpModel& model, std::span<const FeatureRow> rows,
                               const TrainConfig& config, double lambda);

/// Levenberg-Marquardt on scaled inputs. Throws kConfig for a bad config and
/// kTraining when the damped system cannot be solved.
MlpModel mlp_train(std::span<const FeatureRow> training, const TrainConfig& config);

/// Argmax over the outputs; ties go to the lowest person id.
int mlp_identify(const MlpModel& model, const FeatureVector& x);

/// config.multistart models with seeds seed, seed+1, ... (failed runs are
/// skipped; throws if every run fails).
std::vector<MlpModel> multistart_models(std::span<const FeatureRow> training,
                                        const TrainConfig& config);

/// Index of the model with the best training identification rate (lowest
/// index on ties).
std::size_t select_best(std::span<const MlpModel> models, std::span<const FeatureRow> training);

MlpModel multistart_train(std::span<const FeatureRow> training, const TrainConfig& config);

/// Mean of the members' output vectors.
Eigen::VectorXd committee_outputs(std::span<const MlpModel> members, const FeatureVector& x);

/// Argmax of the mean output. Throws kInvalidArgument for an empty committee
/// or members with different outputs.
int committee_identify(std::span<const MlpModel> members, const FeatureVector& x);

/// Argmax of a score vector; ties go to the lowest index.
std::size_t argmax(const Eigen::VectorXd& scores);

/// Fraction (0..1) of rows identified correctly.
double training_rate(const MlpModel& model, std::span<const FeatureRow> rows);

}  // namespace handgeo

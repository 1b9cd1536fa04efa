#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "handgeo/features.hpp"
#include "handgeo/mlp.hpp"
#include "handgeo/pipeline.hpp"
#include "handgeo/synthgen.hpp"

namespace handgeo {

/// Sample indices (1-based) used for enrollment and for testing.
struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

/// Samples 1..half for training, the rest for testing.
Split default_split(int samples = 10);

/// Throws kConfig unless the halves are disjoint and together cover 1..samples.
void validate(const Split& split, int samples);

struct TrialCounts {
  long long clients = 0;
  long long impostors = 0;
  long long total = 0;

  friend bool operator==(const TrialCounts&, const TrialCounts&) = default;
};

/// Genuine and impostor comparisons when every test image is matched against
/// every enrolled person.
TrialCounts count_trials(int persons, int tests_per_person);

struct ExtractionFailure {
  int person = 0;
  int sample = 0;
  std::string message;
};

struct FeatureSet {
  std::vector<FeatureRow> rows;
  std::vector<ExtractionFailure> failures;
};

/// Features recorded while the corpus was generated (none of them failed).
FeatureSet corpus_features(const Corpus& corpus);

/// Runs the pipeline on every scan under dir (person_<i>/sample_<j>.bmp).
FeatureSet directory_features(const std::filesystem::path& dir, const ExtractionConfig& config = {});

/// Train and test rows scaled with a scaler fitted on the training half.
struct Partition {
  std::vector<FeatureRow> train;
  std::vector<FeatureRow> test;
  ScalerParams scaler{};
};

Partition partition(std::span<const FeatureRow> rows, const Split& split);

using Classifier = std::function<int(const FeatureVector&)>;

struct RateResult {
  double rate = 0;  // percent
  int correct = 0;
  int tested = 0;
  int excluded = 0;
};

/// Percentage of test rows whose identity is recovered. Images that failed
/// extraction are not in `test`; their count is carried through `excluded`.
RateResult run_identification(const Classifier& classify, std::span<const FeatureRow> test,
                              int excluded = 0);

struct SweepPoint {
  int centres = 0;
  int achieved = 0;
  double rate = 0;
  std::string error;  // empty when the point trained
};

/// One RBF per centre count; a failing count is recorded and skipped.
std::vector<SweepPoint> sweep_rbf(const Partition& data, std::span<const int> centre_counts,
                                  double spread = 0.0);

std::vector<int> default_sweep_centres();

struct EvalConfig {
  /// Shared MLP settings; epochs and loss are set per row.
  TrainConfig mlp{};
  int epochs_mse = 10;
  int epochs_msereg = 50;
  int committee_size = 3;
  int rbf_centres = 50;
  double rbf_spread = 0.0;  // <= 0: median pairwise distance
  std::vector<int> sweep_centres = default_sweep_centres();
  /// Echoed in the report only.
  std::uint64_t corpus_seed = 0;
};

struct ReportRow {
  std::string name;
  RateResult result;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  int persons = 0;
  TrialCounts trials;
  int excluded = 0;
  int train_failures = 0;
  double rbf_spread = 0;
  EvalConfig config;
  std::vector<SweepPoint> sweep;

  const ReportRow& row(const std::string& name) const;
};

std::vector<std::string> table_row_names(const EvalConfig& config);

/// Trains and scores every classifier on unscaled feature rows.
EvalReport evaluate(const FeatureSet& features, const Split& split, const EvalConfig& config);

/// Aligned text table with the configuration echo.
std::string format_table(const EvalReport& report);
std::string report_csv(const EvalReport& report);
/// Configuration echo and trial accounting as key,value rows.
std::string config_csv(const EvalReport& report);
std::string sweep_csv(std::span<const SweepPoint> sweep);

/// report.txt, report.csv, config.csv and sweep.csv under dir.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace handgeo

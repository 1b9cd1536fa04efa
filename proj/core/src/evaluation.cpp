#include "handgeo/evaluation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "handgeo/bmp.hpp"
#include "handgeo/error.hpp"
#include "handgeo/nearest_neighbor.hpp"
#include "handgeo/rbf.hpp"

namespace handgeo {

namespace {

std::string shortest(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string fixed(double v, int digits) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", digits, v);
  return buf.data();
}

std::string quoted(const std::string& s) { return '"' + s + '"'; }

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::vector<std::pair<std::string, std::string>> config_echo(const EvalReport& r) {
  const auto& c = r.config;
  return {
      {"persons", std::to_string(r.persons)},
      {"clients", std::to_string(r.trials.clients)},
      {"impostors", std::to_string(r.trials.impostors)},
      {"total_trials", std::to_string(r.trials.total)},
      {"excluded", std::to_string(r.excluded)},
      {"train_failures", std::to_string(r.train_failures)},
      {"corpus_seed", std::to_string(c.corpus_seed)},
      {"mlp_seed", std::to_string(c.mlp.seed)},
      {"hidden", std::to_string(c.mlp.hidden)},
      {"gamma", shortest(c.mlp.gamma)},
      {"multistart", std::to_string(c.mlp.multistart)},
      {"epochs_mse", std::to_string(c.epochs_mse)},
      {"epochs_msereg", std::to_string(c.epochs_msereg)},
      {"committee_size", std::to_string(c.committee_size)},
      {"lambda0", shortest(c.mlp.lambda0)},
      {"lambda_factor", shortest(c.mlp.lambda_factor)},
      {"rbf_centres", std::to_string(c.rbf_centres)},
      {"rbf_spread", shortest(r.rbf_spread)},
  };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << text;
}

}  // namespace

Split default_split(int samples) {
  Split s;
  const int half = samples / 2;
  for (int i = 1; i <= samples; ++i) (i <= half ? s.train : s.test).push_back(i);
  return s;
}

void validate(const Split& split, int samples) {
  std::set<int> seen;
  for (const auto* half : {&split.train, &split.test}) {
    for (const int i : *half) {
      if (i < 1 || i > samples) {
        throw Error(ErrorKind::kConfig, "split index " + std::to_string(i) + " out of range");
      }
      if (!seen.insert(i).second) {
        throw Error(ErrorKind::kConfig, "sample " + std::to_string(i) + " appears twice in the split");
      }
    }
  }
  if (static_cast<int>(seen.size()) != samples) {
    throw Error(ErrorKind::kConfig, "split does not cover every sample");
  }
}

TrialCounts count_trials(int persons, int tests_per_person) {
  if (persons < 0 || tests_per_person < 0) {
    throw Error(ErrorKind::kInvalidArgument, "negative trial dimensions");
  }
  TrialCounts t;
  t.clients = static_cast<long long>(persons) * tests_per_person;
  t.impostors = static_cast<long long>(persons) * (persons - (persons > 0 ? 1 : 0)) * tests_per_person;
  t.total = t.clients + t.impostors;
  return t;
}

FeatureSet corpus_features(const Corpus& corpus) {
  FeatureSet fs;
  for (const auto& s : corpus.samples) fs.rows.push_back({s.person, s.index, s.features});
  return fs;
}

FeatureSet directory_features(const std::filesystem::path& dir, const ExtractionConfig& config) {
  FeatureSet fs;
  for (const auto& scan : list_scans(dir)) {
    try {
      const Extraction ex = extract(load_bmp(scan.path), config);
      fs.rows.push_back({scan.person, scan.sample, ex.features});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kContour && e.kind() != ErrorKind::kLandmark) throw;
      fs.failures.push_back({scan.person, scan.sample, std::string(e.category()) + ": " + e.what()});
    }
  }
  return fs;
}

Partition partition(std::span<const FeatureRow> rows, const Split& split) {
  Partition p;
  for (const auto& r : rows) {
    if (contains(split.train, r.sample)) p.train.push_back(r);
    else if (contains(split.test, r.sample)) p.test.push_back(r);
  }
  std::vector<FeatureVector> train_vectors;
  for (const auto& r : p.train) train_vectors.push_back(r.features);
  p.scaler = fit_scaler(train_vectors);
  for (auto* half : {&p.train, &p.test}) {
    for (auto& r : *half) r.features = apply_scaler(p.scaler, r.features);
  }
  return p;
}

RateResult run_identification(const Classifier& classify, std::span<const FeatureRow> test,
                              int excluded) {
  RateResult r;
  r.excluded = excluded;
  for (const auto& row : test) {
    ++r.tested;
    if (classify(row.features) == row.person) ++r.correct;
  }
  r.rate = r.tested ? 100.0 * r.correct / r.tested : 0.0;
  return r;
}

std::vector<int> default_sweep_centres() {
  std::vector<int> c;
  for (int k = 5; k <= 110; k += 5) c.push_back(k);
  return c;
}

std::vector<SweepPoint> sweep_rbf(const Partition& data, std::span<const int> centre_counts,
                                  double spread) {
  std::vector<SweepPoint> curve;
  for (const int centres : centre_counts) {
    SweepPoint pt;
    pt.centres = centres;
    try {
      const RbfModel m = rbf_train(data.train, centres, spread);
      pt.achieved = static_cast<int>(m.centres.size());
      pt.rate = run_identification([&](const FeatureVector& x) { return rbf_identify(m, x); },
                                   data.test)
                    .rate;
    } catch (const Error& e) {
      pt.error = std::string(e.category()) + ": " + e.what();
    }
    curve.push_back(pt);
  }
  return curve;
}

const ReportRow& EvalReport::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw Error(ErrorKind::kInvalidArgument, "report has no row '" + name + "'");
}

std::vector<std::string> table_row_names(const EvalConfig& c) {
  const std::string mse = "MSE, " + std::to_string(c.epochs_mse) + " epoch";
  const std::string reg = "MSEREG, " + std::to_string(c.epochs_msereg) + " epoch";
  const std::string committee = "MLP committee " + std::to_string(c.committee_size) + " nets (";
  return {"Nearest Neighbor (MAD)",
          "Nearest Neighbor (MSE)",
          "Multi-Layer Perceptron (" + mse + ")",
          "Multi-Layer Perceptron (" + reg + ")",
          committee + mse + ")",
          committee + reg + ")",
          "Radial Basis Function"};
}

EvalReport evaluate(const FeatureSet& features, const Split& split, const EvalConfig& config) {
  if (config.committee_size < 1 || config.committee_size > config.mlp.multistart) {
    throw Error(ErrorKind::kConfig, "committee size must lie in [1, multistart]");
  }
  EvalReport report;
  report.config = config;
  for (const auto& f : features.failures) {
    if (contains(split.test, f.sample)) ++report.excluded;
    else if (contains(split.train, f.sample)) ++report.train_failures;
  }
  std::set<int> persons;
  for (const auto& r : features.rows) persons.insert(r.person);
  report.persons = static_cast<int>(persons.size());
  report.trials = count_trials(report.persons, static_cast<int>(split.test.size()));

  const Partition data = partition(features.rows, split);
  const auto names = table_row_names(config);
  auto score = [&](const std::string& name, const Classifier& c) {
    report.rows.push_back({name, run_identification(c, data.test, report.excluded)});
  };

  const TemplateDb db = build_templates(data.train);
  score(names[0], [&](const FeatureVector& x) { return nn_identify(x, db, Metric::kMad); });
  score(names[1], [&](const FeatureVector& x) { return nn_identify(x, db, Metric::kMse); });

  std::array<std::vector<MlpModel>, 2> starts;
  for (std::size_t v = 0; v < 2; ++v) {
    TrainConfig tc = config.mlp;
    tc.loss = v == 0 ? Loss::kMse : Loss::kMseReg;
    tc.epochs = v == 0 ? config.epochs_mse : config.epochs_msereg;
    starts[v] = multistart_models(data.train, tc);
    const MlpModel& best = starts[v][select_best(starts[v], data.train)];
    score(names[2 + v], [&](const FeatureVector& x) { return mlp_identify(best, x); });
  }
  for (std::size_t v = 0; v < 2; ++v) {
    const auto n = std::min(starts[v].size(), static_cast<std::size_t>(config.committee_size));
    const std::span<const MlpModel> members(starts[v].data(), n);
    score(names[4 + v], [&](const FeatureVector& x) { return committee_identify(members, x); });
  }

  const int centres = std::min(config.rbf_centres, static_cast<int>(data.train.size()));
  const RbfModel rbf = rbf_train(data.train, centres, config.rbf_spread);
  report.rbf_spread = rbf.spread;
  score(names[6], [&](const FeatureVector& x) { return rbf_identify(rbf, x); });

  report.sweep = sweep_rbf(data, config.sweep_centres, config.rbf_spread);
  return report;
}

std::string format_table(const EvalReport& r) {
  std::size_t width = 10;
  for (const auto& row : r.rows) width = std::max(width, row.name.size());
  std::ostringstream os;
  os << "Identification rate (%)\n\n";
  os << "Classifier" << std::string(width - 10 + 2, ' ') << "    Rate  Correct\n";
  for (const auto& row : r.rows) {
    const std::string rate = fixed(row.result.rate, 2);
    os << row.name << std::string(width - row.name.size() + 2, ' ')
       << std::string(8 - std::min<std::size_t>(8, rate.size()), ' ') << rate << "  "
       << row.result.correct << '/' << row.result.tested << '\n';
  }
  os << '\n';
  for (const auto& [k, v] : config_echo(r)) os << k << " = " << v << '\n';
  return os.str();
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "classifier,rate,correct,tested,excluded\n";
  for (const auto& row : r.rows) {
    os << quoted(row.name) << ',' << shortest(row.result.rate) << ',' << row.result.correct << ','
       << row.result.tested << ',' << row.result.excluded << '\n';
  }
  return os.str();
}

std::string config_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : config_echo(r)) os << k << ',' << v << '\n';
  return os.str();
}

std::string sweep_csv(std::span<const SweepPoint> sweep) {
  std::ostringstream os;
  os << "centres,rate\n";
  for (const auto& p : sweep) {
    if (p.error.empty()) os << p.centres << ',' << shortest(p.rate) << '\n';
  }
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.txt", format_table(report));
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "config.csv", config_csv(report));
  write_text(dir / "sweep.csv", sweep_csv(report.sweep));
}

}  // namespace handgeo

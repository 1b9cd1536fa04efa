// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "handgeo/contour.hpp"
#include "handgeo/error.hpp"
#include "handgeo/evaluation.hpp"
#include "handgeo/features.hpp"
#include "handgeo/imaging.hpp"
#include "handgeo/mlp.hpp"
#include "handgeo/nearest_neighbor.hpp"
#include "handgeo/pipeline.hpp"
#include "handgeo/rbf.hpp"
#include "handgeo/synthgen.hpp"

using namespace handgeo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first failing check of a criterion.
class Check {
 public:
  void operator()(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& s) {
    if (out_.pass) out_.detail = s;
  }
  Outcome outcome() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

constexpr std::array<std::uint64_t, 5> kSeeds{1, 2, 3, 4, 5};

std::map<std::uint64_t, Corpus>& corpora() {
  static std::map<std::uint64_t, Corpus> cache;
  return cache;
}

const Corpus& default_corpus(std::uint64_t seed) {
  auto& cache = corpora();
  auto it = cache.find(seed);
  if (it == cache.end()) {
    CorpusConfig c;
    c.master_seed = seed;
    it = cache.emplace(seed, make_corpus(c)).first;
  }
  return it->second;
}

EvalReport default_eval(std::uint64_t seed) {
  EvalConfig c;
  c.corpus_seed = seed;
  return evaluate(corpus_features(default_corpus(seed)), default_split(), c);
}

double dist_px(PointF a, PointF b) { return std::hypot(a.x - b.x, a.y - b.y); }

// --- criteria --------------------------------------------------------------

Outcome binarize_exact() {
  Check check;
  GrayImage img(256, 1);
  for (int b = 0; b < 256; ++b) img.at(b, 0) = b / 255.0;
  const BinaryImage out = binarize(img, 0.07);
  int on = 0;
  for (int b = 0; b < 256; ++b) {
    const bool want = b / 255.0 >= 0.07;
    check(out.at(b, 0) == (want ? 1 : 0), "byte " + std::to_string(b));
    on += want;
  }
  check.note("256/256 bytes, first foreground byte " + std::to_string(256 - on));
  return check.outcome();
}

Outcome perimeter_rule() {
  Check check;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> side(2, 60);
  for (int i = 0; i < 50; ++i) {
    const int w = side(rng);
    const int h = side(rng);
    BinaryImage img(w + 6, h + 6);
    for (int y = 3; y < 3 + h; ++y) {
      for (int x = 3; x < 3 + w; ++x) img.at(x, y) = 1;
    }
    // Brute force: boundary pixels of the filled rectangle, one step each.
    const BinaryImage boundary = boundary_map(img);
    const double brute = static_cast<double>(boundary.count());
    const ChainCode chain = trace_contour(boundary);
    check(perimeter(chain) == brute, "rectangle " + std::to_string(w) + "x" + std::to_string(h));
  }
  for (int k = 1; k <= 200; k += 7) {
    ChainCode stair;
    stair.codes.assign(static_cast<std::size_t>(k), 1);
    check(std::abs(perimeter(stair) - k * std::sqrt(2.0)) <= 1e-9, "staircase k=" + std::to_string(k));
  }
  // A traced diamond is four such staircases.
  BinaryImage diamond(41, 41);
  for (int y = 0; y < 41; ++y) {
    for (int x = 0; x < 41; ++x) diamond.at(x, y) = std::abs(x - 20) + std::abs(y - 20) <= 15;
  }
  const ChainCode d = trace_contour(boundary_map(diamond));
  check(std::abs(perimeter(d) - 60 * std::sqrt(2.0)) <= 1e-9, "diamond");
  check.note("50 rectangles exact, staircases within 1e-9");
  return check.outcome();
}

CorpusConfig noise_free_corpus() {
  CorpusConfig c;
  c.master_seed = 77;
  c.persons = 10;
  c.samples = 10;
  c.noise_level = 0.0;
  return c;
}

Outcome landmark_oracle() {
  Check check;
  const Corpus corpus = make_corpus(noise_free_corpus());
  double worst = 0;
  int detected = 0;
  for (const auto& s : corpus.samples) {
    check(s.attempts == 1, "sample replaced after a failed detection");
    try {
      const Extraction ex = extract(s.image, corpus.config.extraction);
      for (int i = 0; i < 5; ++i) worst = std::max(worst, dist_px(ex.landmarks.tips[i], s.truth.tips[i]));
      for (int i = 0; i < 4; ++i) {
        worst = std::max(worst, dist_px(ex.landmarks.valleys[i], s.truth.valleys[i]));
      }
      ++detected;
    } catch (const Error& e) {
      check(false, std::string("extraction failed: ") + e.what());
    }
  }
  check(detected == 100, "detected " + std::to_string(detected) + "/100");
  check(worst <= 2.0, "landmark error " + fmt("%.2f px", worst));

  int merged_errors = 0;
  for (int i = 0; i < 20; ++i) {
    RenderOptions o;
    o.defect = Defect::kMergedFingers;
    o.merged_finger = 1 + i % 3;
    try {
      extract(render(corpus.prototypes[static_cast<std::size_t>(i % 10)], o).image);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kLandmark) ++merged_errors;
    }
  }
  check(merged_errors == 20, "merged-finger landmark errors " + std::to_string(merged_errors) + "/20");
  check.note("100/100 detected, max error " + fmt("%.2f px", worst) + ", merged 20/20 rejected");
  return check.outcome();
}

Outcome feature_oracle() {
  Check check;
  const Corpus corpus = make_corpus(noise_free_corpus());
  double worst = 0;
  double worst_surface = 0;
  for (const auto& s : corpus.samples) {
    const RawFeatures got = extract(s.image, corpus.config.extraction).raw;
    const RawFeatures& want = s.truth.features;
    const std::array<std::pair<double, double>, 10> pairs{{
        {got.thumb_length, want.thumb_length}, {got.first_length, want.first_length},
        {got.middle_length, want.middle_length}, {got.ring_length, want.ring_length},
        {got.little_length, want.little_length}, {got.thumb_base_width, want.thumb_base_width},
        {got.first_width, want.first_width}, {got.middle_width, want.middle_width},
        {got.ring_width, want.ring_width}, {got.little_width, want.little_width}}};
    for (const auto& [g, w] : pairs) worst = std::max(worst, std::abs(g - w) / w);
    worst_surface = std::max(worst_surface, std::abs(got.surface - want.surface) / want.surface);
  }
  check(worst <= 0.05, "length/width error " + fmt("%.2f%%", 100 * worst));
  check(worst_surface <= 0.02, "surface error " + fmt("%.2f%%", 100 * worst_surface));
  check.note("max length/width error " + fmt("%.2f%%", 100 * worst) + ", surface " +
             fmt("%.2f%%", 100 * worst_surface));
  return check.outcome();
}

Outcome formula_suite() {
  Check check;
  using V = std::vector<double>;
  check(dist_mse(V{1, 2, 3}, V{1, 2, 3}) == 0, "mse identity");
  check(dist_mse(V{0, 0}, V{3, 4}) == 25, "mse 3-4");
  check(dist_mse(V{1}, V{-1}) == 4, "mse 1,-1");
  check(dist_mad(V{0, 0}, V{3, 4}) == 7, "mad 3-4");
  check(dist_mad(V{2, 5}, V{2, 5}) == 0, "mad identity");
  check(dist_mad(V{-1, 1}, V{1, -1}) == 4, "mad crossed");
  try {
    dist_mse(V{1, 2}, V{1});
    check(false, "dimension mismatch accepted");
  } catch (const Error&) {
  }
  TemplateDb db{{{1, FeatureVector{0, 0}}, {2, FeatureVector{10, 10}}}};
  check(nn_identify(FeatureVector{1, 1}, db, Metric::kMse) == 1, "nn nearest");
  check(nn_identify(FeatureVector{10, 10}, db, Metric::kMad) == 2, "nn exact template");
  TemplateDb tie{{{7, FeatureVector{2, 0}}, {3, FeatureVector{0, 2}}}};
  check(nn_identify(FeatureVector{1, 1}, tie, Metric::kMse) == 3, "nn tie-break");

  check(loss_mse(V{1, -1}, V{1, -1}) == 0, "loss identity");
  check(loss_mse(V{1, -1}, V{0, 0}) == 1, "loss single sample");
  check(loss_mse(V{1, -1, 1, 1}, V{0, 0, 2, 0}) == 1, "loss batch mean");
  const V t{1, -1, -1, 1};
  const V a{0.5, -0.5, 0.1, 0.7};
  const V w{0.3, -0.2, 0.9};
  check(loss_msereg(t, a, w, 1.0) == loss_mse(t, a), "msereg gamma 1");
  check(loss_msereg(t, a, V{0.5, 0.5, 0.5}, 0.0) == 0.25, "msereg gamma 0");
  // MSE 0.2 and mean squared weight 0.1 mix to 0.15.
  const V t2{1, 1, 1, 1, 1};
  const V a2{1, 1, 1, 1, 0};
  const double mw = 0.1;
  const V w2{std::sqrt(mw), -std::sqrt(mw)};
  check(std::abs(loss_msereg(t2, a2, w2, 0.5) - 0.15) <= 1e-15, "msereg mix");

  // Same seed: MSEREG at gamma 1 retraces MSE.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<FeatureRow> rows;
  for (int p = 1; p <= 4; ++p) {
    for (int s = 1; s <= 5; ++s) {
      FeatureVector x{};
      for (auto& v : x) v = u(rng);
      rows.push_back({p, s, x});
    }
  }
  TrainConfig mse;
  mse.hidden = 10;
  mse.epochs = 10;
  TrainConfig reg = mse;
  reg.loss = Loss::kMseReg;
  reg.gamma = 1.0;
  const auto ha = mlp_train(rows, mse).loss_history;
  const auto hb = mlp_train(rows, reg).loss_history;
  check(ha.size() == hb.size(), "trajectory lengths differ");
  double diff = 0;
  for (std::size_t i = 0; i < std::min(ha.size(), hb.size()); ++i) diff = std::max(diff, std::abs(ha[i] - hb[i]));
  check(diff <= 1e-12, "trajectory difference " + fmt("%g", diff));
  check.note("all examples exact, gamma=1 trajectory difference " + fmt("%g", diff));
  return check.outcome();
}

Outcome lm_correctness() {
  Check check;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MlpModel m = mlp_init(3, {1, 2}, seed);
    std::vector<FeatureVector> xs(6);
    for (auto& x : xs) {
      for (auto& v : x) v = u(rng);
    }
    const Eigen::MatrixXd j = mlp_jacobian(m, xs);
    const Eigen::VectorXd p = mlp_parameters(m);
    Eigen::MatrixXd fd(j.rows(), j.cols());
    const double h = 1e-5;
    for (Eigen::Index c = 0; c < p.size(); ++c) {
      MlpModel plus = m;
      MlpModel minus = m;
      Eigen::VectorXd pp = p;
      Eigen::VectorXd pm = p;
      pp(c) += h;
      pm(c) -= h;
      mlp_set_parameters(plus, pp);
      mlp_set_parameters(minus, pm);
      for (std::size_t n = 0; n < xs.size(); ++n) {
        fd.block(static_cast<Eigen::Index>(2 * n), c, 2, 1) =
            (mlp_forward(plus, xs[n]) - mlp_forward(minus, xs[n])) / (2 * h);
      }
    }
    worst = std::max(worst, (j - fd).norm() / fd.norm());
  }
  check(worst <= 1e-4, "Jacobian relative error " + fmt("%g", worst));

  std::vector<FeatureRow> rows;
  for (int p = 1; p <= 6; ++p) {
    FeatureVector c{};
    for (auto& v : c) v = u(rng);
    for (int s = 1; s <= 5; ++s) {
      FeatureVector x = c;
      for (auto& v : x) v += 0.2 * u(rng);
      rows.push_back({p, s, x});
    }
  }
  for (const Loss loss : {Loss::kMse, Loss::kMseReg}) {
    TrainConfig cfg;
    cfg.loss = loss;
    cfg.epochs = 50;
    const auto hist = mlp_train(rows, cfg).loss_history;
    for (std::size_t i = 1; i < hist.size(); ++i) check(hist[i] < hist[i - 1], "loss rose at step " + std::to_string(i));
  }

  const std::vector<FeatureRow> toy{{1, 1, FeatureVector{-0.9, -0.2}},
                                    {1, 2, FeatureVector{-0.6, 0.3}},
                                    {2, 1, FeatureVector{0.7, -0.1}},
                                    {2, 2, FeatureVector{0.9, 0.4}}};
  TrainConfig cfg;
  cfg.epochs = 10;
  check(training_rate(mlp_train(toy, cfg), toy) == 1.0, "toy problem not learned in 10 epochs");
  check.note("Jacobian error " + fmt("%.2g", worst) + ", losses strictly decreasing, toy 4/4");
  return check.outcome();
}

Outcome rbf_interpolation() {
  Check check;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<FeatureRow> rows;
  for (int p = 1; p <= 5; ++p) {
    for (int s = 1; s <= 5; ++s) {
      FeatureVector x{};
      for (auto& v : x) v = u(rng);
      rows.push_back({p, s, x});
    }
  }
  const RbfModel m = rbf_train(rows, static_cast<int>(rows.size()));
  const double residual = rbf_residual(m, rows);
  check(m.centres.size() == rows.size(), "centres dropped");
  check(residual <= 1e-6, "residual " + fmt("%g", residual));

  const Partition data = partition(corpus_features(default_corpus(1)).rows, default_split());
  const auto curve = sweep_rbf(data, default_sweep_centres());
  double first = -1;
  double best = -1;
  int best_at = 0;
  for (const auto& pt : curve) {
    check(pt.error.empty(), "sweep point " + std::to_string(pt.centres) + ": " + pt.error);
    if (pt.centres == 5) first = pt.rate;
    if (pt.rate > best) {
      best = pt.rate;
      best_at = pt.centres;
    }
  }
  check(best > first, "sweep maximum does not exceed the 5-centre rate");
  check.note("residual " + fmt("%.2g", residual) + ", sweep " + fmt("%.2f%%", first) + " at 5 centres, peak " +
             fmt("%.2f%%", best) + " at " + std::to_string(best_at));
  return check.outcome();
}

Outcome protocol_accounting() {
  Check check;
  check(count_trials(22, 5) == TrialCounts{110, 2310, 2420}, "count_trials(22,5)");
  const Split split = default_split();
  try {
    validate(split, 10);
  } catch (const Error& e) {
    check(false, e.what());
  }
  CorpusConfig cc;
  cc.master_seed = 9;
  cc.persons = 6;
  const Corpus corpus = make_corpus(cc);
  const FeatureSet features = corpus_features(corpus);
  const Partition data = partition(features.rows, split);
  std::map<int, std::pair<int, int>> per_person;
  for (const auto& r : data.train) {
    check(r.sample >= 1 && r.sample <= 5, "training row from sample " + std::to_string(r.sample));
    ++per_person[r.person].first;
  }
  for (const auto& r : data.test) {
    check(r.sample >= 6 && r.sample <= 10, "test row from sample " + std::to_string(r.sample));
    ++per_person[r.person].second;
  }
  for (const auto& [p, n] : per_person) check(n == std::pair{5, 5}, "person " + std::to_string(p) + " split");

  EvalConfig ec;
  ec.sweep_centres = {5, 10};
  const EvalReport report = evaluate(features, split, ec);
  const std::string text = format_table(report);
  for (const char* row : {"Nearest Neighbor (MAD)", "Nearest Neighbor (MSE)",
                          "Multi-Layer Perceptron (MSE, 10 epoch)",
                          "Multi-Layer Perceptron (MSEREG, 50 epoch)",
                          "MLP committee 3 nets (MSE, 10 epoch)",
                          "MLP committee 3 nets (MSEREG, 50 epoch)", "Radial Basis Function"}) {
    check(text.find(row) != std::string::npos, std::string("report lacks ") + row);
  }
  check.note("(110, 2310, 2420), split 5/5 per person, 7 table rows");
  return check.outcome();
}

std::map<std::uint64_t, EvalReport>& reports() {
  static std::map<std::uint64_t, EvalReport> cache;
  return cache;
}

Outcome end_to_end_ordering() {
  Check check;
  std::map<std::string, double> mean;
  const auto names = table_row_names(EvalConfig{});
  for (const auto seed : kSeeds) {
    const EvalReport r = default_eval(seed);
    for (const auto& row : r.rows) mean[row.name] += row.result.rate / kSeeds.size();
    reports()[seed] = r;
  }
  const double nn = mean[names[1]];
  const double single_mse = mean[names[2]];
  const double single_reg = mean[names[3]];
  const double com_mse = mean[names[4]];
  const double com_reg = mean[names[5]];
  check(single_reg >= nn, "MLP-MSEREG " + fmt("%.2f", single_reg) + " < NN-MSE " + fmt("%.2f", nn));
  check(com_mse >= single_mse - 1, "committee MSE " + fmt("%.2f", com_mse) + " vs " + fmt("%.2f", single_mse));
  check(com_reg >= single_reg - 1, "committee MSEREG " + fmt("%.2f", com_reg) + " vs " + fmt("%.2f", single_reg));
  check.note("means: NN-MSE " + fmt("%.2f", nn) + ", MLP-MSE " + fmt("%.2f", single_mse) + ", MLP-MSEREG " +
             fmt("%.2f", single_reg) + ", committee MSE " + fmt("%.2f", com_mse) + ", committee MSEREG " +
             fmt("%.2f", com_reg) + ", RBF " + fmt("%.2f", mean[names[6]]));
  return check.outcome();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Check check;
  const fs::path root = fs::temp_directory_path() / "handgeo_acceptance";
  fs::remove_all(root);
  corpora().clear();
  int files = 0;
  for (const auto seed : kSeeds) {
    auto it = reports().find(seed);
    const EvalReport first = it != reports().end() ? it->second : default_eval(seed);
    const EvalReport again = default_eval(seed);
    const fs::path a = root / ("a" + std::to_string(seed));
    const fs::path b = root / ("b" + std::to_string(seed));
    write_report(first, a);
    write_report(again, b);
    for (const char* f : {"report.txt", "report.csv", "config.csv", "sweep.csv"}) {
      check(slurp(a / f) == slurp(b / f), std::string(f) + " differs for seed " + std::to_string(seed));
      ++files;
    }
  }
  fs::remove_all(root);
  check.note(std::to_string(files) + " report files byte-identical");
  return check.outcome();
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "binarization exactness", 1, binarize_exact},
      {2, "perimeter rule", 5, perimeter_rule},
      {3, "landmark oracle", 30, landmark_oracle},
      {4, "feature oracle", 30, feature_oracle},
      {5, "distance and loss formulas", 10, formula_suite},
      {6, "LM correctness", 60, lm_correctness},
      {7, "RBF interpolation and sweep", 180, rbf_interpolation},
      {8, "protocol accounting", 60, protocol_accounting},
      {9, "end-to-end ordering", 600, end_to_end_ordering},
      {10, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > c.limit_s) {
      o = {false, "took " + fmt("%.1f s", secs) + ", limit " + fmt("%.0f s", c.limit_s)};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s: %s (%.1f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}

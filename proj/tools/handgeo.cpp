// handgeo: corpus generation, feature extraction, training and evaluation.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "handgeo/bmp.hpp"
#include "handgeo/error.hpp"
#include "handgeo/evaluation.hpp"
#include "handgeo/model_io.hpp"
#include "handgeo/pipeline.hpp"
#include "handgeo/synthgen.hpp"

namespace fs = std::filesystem;
using namespace handgeo;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;

  // gen
  CorpusConfig corpus{};

  // extract
  std::string input;
  ExtractionConfig extraction{};

  // train / eval / sweep
  std::string features;
  std::string corpus_dir;
  std::string kind = "mlp";
  std::string metric = "mse";
  std::string loss = "mse";
  int epochs = 0;
  TrainConfig train{};
  int committee_size = 3;
  int centres = 50;
  double spread = 0.0;
  std::vector<int> train_samples = default_split().train;
  std::vector<int> test_samples = default_split().test;
  int epochs_mse = 10;
  int epochs_msereg = 50;
  std::vector<int> sweep_centres = default_sweep_centres();
  std::uint64_t corpus_seed = 1;
  std::vector<std::string> models;
};

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Fills options the command line left unset from the config file. Keys must
// name an option of the tool or of some subcommand.
void apply_config(CLI::App& app, CLI::App* active, const std::map<std::string, std::string>& kv) {
  std::set<std::string> known;
  auto collect = [&](const CLI::App* a) {
    for (const CLI::Option* o : a->get_options()) {
      for (const auto& n : o->get_lnames()) known.insert(n);
    }
  };
  collect(&app);
  for (const CLI::App* sub : app.get_subcommands({})) collect(sub);
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw Error(ErrorKind::kConfig, "unknown config key '" + k + "'");
  }
  for (CLI::App* a : {&app, active}) {
    if (!a) continue;
    for (CLI::Option* o : a->get_options()) {
      if (o->count() > 0) continue;
      for (const auto& n : o->get_lnames()) {
        const auto it = kv.find(n);
        if (it == kv.end() || n == "config") continue;
        try {
          if (o->get_expected_max() > 1) {
            std::stringstream ss(it->second);
            std::string item;
            while (std::getline(ss, item, ',')) o->add_result(item);
          } else {
            o->add_result(it->second);
          }
          o->run_callback();
        } catch (const CLI::Error& e) {
          throw Error(ErrorKind::kConfig, "config key '" + n + "': " + e.what());
        }
      }
    }
  }
}

Loss parse_loss(const std::string& s) {
  if (s == "mse") return Loss::kMse;
  if (s == "msereg") return Loss::kMseReg;
  throw Error(ErrorKind::kConfig, "unknown loss '" + s + "'");
}

Split split_of(const Options& o) {
  Split s{o.train_samples, o.test_samples};
  validate(s, static_cast<int>(s.train.size() + s.test.size()));
  return s;
}

std::vector<FeatureRow> rows_in(const std::vector<FeatureRow>& rows, const std::vector<int>& samples) {
  std::vector<FeatureRow> out;
  for (const auto& r : rows) {
    if (std::find(samples.begin(), samples.end(), r.sample) != samples.end()) out.push_back(r);
  }
  return out;
}

FeatureSet load_inputs(const Options& o) {
  if (!o.features.empty() && !o.corpus_dir.empty()) {
    throw Error(ErrorKind::kConfig, "give either --features or --corpus, not both");
  }
  if (!o.features.empty()) return FeatureSet{load_feature_csv(o.features), {}};
  if (!o.corpus_dir.empty()) return directory_features(o.corpus_dir, o.extraction);
  throw Error(ErrorKind::kConfig, "no input: give --features or --corpus");
}

fs::path out_or(const Options& o, const char* fallback) {
  return o.out.empty() ? fs::path(fallback) : fs::path(o.out);
}

void run_gen(const Options& o) {
  CorpusConfig cfg = o.corpus;
  cfg.master_seed = o.seed;
  const Corpus corpus = make_corpus(cfg);
  const fs::path dir = out_or(o, "corpus");
  save_corpus(corpus, dir);
  std::cout << "wrote " << corpus.samples.size() << " scans to " << dir.string() << '\n';
}

void run_extract(const Options& o) {
  const fs::path in(o.input);
  FeatureSet set;
  if (fs::is_directory(in)) {
    set = directory_features(in, o.extraction);
  } else {
    const Extraction ex = extract(load_bmp(in), o.extraction);
    set.rows.push_back({0, 0, ex.features});
  }
  for (const auto& f : set.failures) {
    std::cerr << "warning: person " << f.person << " sample " << f.sample << ": " << f.message
              << '\n';
  }
  const fs::path out = out_or(o, "features.csv");
  save_feature_csv(set.rows, out);
  std::cout << "wrote " << set.rows.size() << " feature rows to " << out.string() << " ("
            << set.failures.size() << " failed)\n";
}

void run_train(const Options& o) {
  const auto all = load_feature_csv(o.features);
  const Split split = split_of(o);
  const auto train = rows_in(all, split.train);
  const Partition data = partition(train, Split{split.train, {}});

  TrainConfig tc = o.train;
  tc.seed = o.seed;
  tc.loss = parse_loss(o.loss);
  tc.epochs = o.epochs > 0 ? o.epochs : (tc.loss == Loss::kMse ? 10 : 50);

  Model model;
  if (o.kind == "nn") {
    if (o.metric != "mse" && o.metric != "mad") {
      throw Error(ErrorKind::kConfig, "unknown metric '" + o.metric + "'");
    }
    model = NnModel{build_templates(data.train), o.metric == "mse" ? Metric::kMse : Metric::kMad,
                    data.scaler};
  } else if (o.kind == "mlp") {
    MlpModel m = multistart_train(data.train, tc);
    m.scaler = data.scaler;
    model = std::move(m);
  } else if (o.kind == "committee") {
    if (o.committee_size < 1 || o.committee_size > tc.multistart) {
      throw Error(ErrorKind::kConfig, "committee-size must lie in [1, multistart]");
    }
    auto members = multistart_models(data.train, tc);
    members.resize(std::min(members.size(), static_cast<std::size_t>(o.committee_size)));
    for (auto& m : members) m.scaler = data.scaler;
    model = CommitteeModel{std::move(members)};
  } else if (o.kind == "rbf") {
    RbfModel m = rbf_train(data.train, o.centres, o.spread);
    m.scaler = data.scaler;
    model = std::move(m);
  } else {
    throw Error(ErrorKind::kConfig, "unknown classifier kind '" + o.kind + "'");
  }
  const fs::path out = out_or(o, "model.txt");
  save_model(model, out);
  std::cout << "wrote " << o.kind << " model to " << out.string() << '\n';
}

void run_eval(const Options& o) {
  const Split split = split_of(o);
  FeatureSet set;
  std::uint64_t corpus_seed = o.corpus_seed;
  if (o.features.empty() && o.corpus_dir.empty()) {
    CorpusConfig cc = o.corpus;
    cc.master_seed = o.corpus_seed;
    set = corpus_features(make_corpus(cc));
  } else {
    set = load_inputs(o);
  }
  const fs::path dir = out_or(o, "report");

  EvalConfig ec;
  ec.mlp = o.train;
  ec.mlp.seed = o.seed;
  ec.epochs_mse = o.epochs_mse;
  ec.epochs_msereg = o.epochs_msereg;
  ec.committee_size = o.committee_size;
  ec.rbf_centres = o.centres;
  ec.rbf_spread = o.spread;
  ec.sweep_centres = o.sweep_centres;
  ec.corpus_seed = corpus_seed;

  if (o.models.empty()) {
    const EvalReport report = evaluate(set, split, ec);
    write_report(report, dir);
    std::cout << format_table(report);
    return;
  }

  EvalReport report;
  report.config = ec;
  std::set<int> persons;
  for (const auto& r : set.rows) persons.insert(r.person);
  report.persons = static_cast<int>(persons.size());
  report.trials = count_trials(report.persons, static_cast<int>(split.test.size()));
  for (const auto& f : set.failures) {
    if (std::find(split.test.begin(), split.test.end(), f.sample) != split.test.end()) ++report.excluded;
  }
  const auto test = rows_in(set.rows, split.test);
  for (const auto& path : o.models) {
    const Model model = load_model(path);
    report.rows.push_back({fs::path(path).filename().string(),
                           run_identification([&](const FeatureVector& x) { return identify(model, x); },
                                              test, report.excluded)});
  }
  write_report(report, dir);
  std::cout << format_table(report);
}

void run_sweep(const Options& o) {
  const Split split = split_of(o);
  const FeatureSet set = load_inputs(o);
  const Partition data = partition(set.rows, split);
  const auto curve = sweep_rbf(data, o.sweep_centres, o.spread);
  for (const auto& p : curve) {
    if (!p.error.empty()) std::cerr << "warning: " << p.centres << " centres: " << p.error << '\n';
  }
  const fs::path out = out_or(o, "sweep.csv");
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + out.string());
  os << sweep_csv(curve);
  std::cout << "wrote " << curve.size() << " sweep points to " << out.string() << '\n';
}

void add_train_options(CLI::App* sub, Options& o) {
  sub->add_option("--hidden", o.train.hidden, "Hidden units")->capture_default_str();
  sub->add_option("--gamma", o.train.gamma, "MSEREG mix of data and weight terms")
      ->capture_default_str();
  sub->add_option("--multistart", o.train.multistart, "Random starts")->capture_default_str();
  sub->add_option("--lambda0", o.train.lambda0, "Initial LM damping")->capture_default_str();
  sub->add_option("--lambda-factor", o.train.lambda_factor, "LM damping factor")
      ->capture_default_str();
  sub->add_option("--committee-size", o.committee_size, "Committee members")->capture_default_str();
  sub->add_option("--centres", o.centres, "RBF centres")->capture_default_str();
  sub->add_option("--spread", o.spread, "RBF kernel width (0: median pairwise distance)")
      ->capture_default_str();
}

void add_split_options(CLI::App* sub, Options& o) {
  sub->add_option("--train-samples", o.train_samples, "Enrollment sample indices")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--test-samples", o.test_samples, "Test sample indices")
      ->delimiter(',')
      ->capture_default_str();
}

void add_extraction_options(CLI::App* sub, Options& o) {
  sub->add_option("--threshold", o.extraction.threshold, "Binarization threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--sigma", o.extraction.sigma, "LoG scale in pixels")->capture_default_str();
  sub->add_option("--filter-radius", o.extraction.filter_radius, "Box filter radius")
      ->capture_default_str();
}

void add_corpus_options(CLI::App* sub, Options& o) {
  sub->add_option("--persons", o.corpus.persons, "Persons")->capture_default_str();
  sub->add_option("--samples", o.corpus.samples, "Samples per person")->capture_default_str();
  sub->add_option("--intra-sigma", o.corpus.intra_sigma, "Per-sample relative jitter")
      ->capture_default_str();
  sub->add_option("--noise", o.corpus.noise_level, "Additive scanner noise amplitude")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Hand-geometry identification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config, "key=value file; command-line flags take precedence");
  app.add_option("--seed", o.seed, "Corpus seed for gen, training seed otherwise")
      ->capture_default_str();
  app.add_option("--out", o.out, "Output path");

  auto* gen = app.add_subcommand("gen", "Render a synthetic scan corpus");
  add_corpus_options(gen, o);

  auto* ext = app.add_subcommand("extract", "Extract features from a scan or a corpus directory");
  ext->add_option("--input", o.input, "BMP file or corpus directory")->required();
  add_extraction_options(ext, o);

  auto* train = app.add_subcommand("train", "Train a classifier on a feature CSV");
  train->add_option("--features", o.features, "Feature CSV")->required();
  train->add_option("--kind", o.kind, "nn, mlp, committee or rbf")
      ->check(CLI::IsMember({"nn", "mlp", "committee", "rbf"}))
      ->capture_default_str();
  train->add_option("--metric", o.metric, "nn distance: mse or mad")
      ->check(CLI::IsMember({"mse", "mad"}))
      ->capture_default_str();
  train->add_option("--loss", o.loss, "mlp loss: mse or msereg")
      ->check(CLI::IsMember({"mse", "msereg"}))
      ->capture_default_str();
  train->add_option("--epochs", o.epochs, "LM epochs (default 10 for mse, 50 for msereg)");
  add_train_options(train, o);
  add_split_options(train, o);

  auto* eval = app.add_subcommand("eval", "Run the identification protocol or score models");
  eval->add_option("--features", o.features, "Feature CSV");
  eval->add_option("--corpus", o.corpus_dir, "Corpus directory of BMP scans");
  eval->add_option("--models", o.models, "Model files to score instead of training");
  eval->add_option("--corpus-seed", o.corpus_seed,
                   "Seed of the in-memory corpus when no input is given")
      ->capture_default_str();
  eval->add_option("--epochs-mse", o.epochs_mse, "Epochs for MSE training")->capture_default_str();
  eval->add_option("--epochs-msereg", o.epochs_msereg, "Epochs for MSEREG training")
      ->capture_default_str();
  eval->add_option("--sweep-centres", o.sweep_centres, "RBF sweep centre counts")
      ->delimiter(',')
      ->capture_default_str();
  add_train_options(eval, o);
  add_split_options(eval, o);
  add_extraction_options(eval, o);
  add_corpus_options(eval, o);

  auto* sweep = app.add_subcommand("sweep", "RBF identification rate against centre count");
  sweep->add_option("--features", o.features, "Feature CSV");
  sweep->add_option("--corpus", o.corpus_dir, "Corpus directory of BMP scans");
  sweep->add_option("--sweep-centres", o.sweep_centres, "Centre counts")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--spread", o.spread, "RBF kernel width (0: median pairwise distance)")
      ->capture_default_str();
  add_split_options(sweep, o);
  add_extraction_options(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << "error: config_error: " << e.what() << '\n';
    return 2;
  }

  try {
    CLI::App* active = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (!o.config.empty()) apply_config(app, active, read_config(o.config));
    if (active == gen) run_gen(o);
    else if (active == ext) run_extract(o);
    else if (active == train) run_train(o);
    else if (active == eval) run_eval(o);
    else if (active == sweep) run_sweep(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: io_error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

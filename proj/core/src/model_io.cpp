#include "handgeo/model_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

constexpr int kFormatVersion = 1;

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  template <typename T>
  void line(const char* key, const T& value) {
    os_ << key << ' ' << value << '\n';
  }
  void real(const char* key, double v) { os_ << key << ' ' << num(v) << '\n'; }

  void ints(const char* key, const std::vector<int>& v) {
    os_ << key << ' ' << v.size();
    for (const int x : v) os_ << ' ' << x;
    os_ << '\n';
  }
  void vec(const char* key, const FeatureVector& v) {
    os_ << key;
    for (const double x : v) os_ << ' ' << num(x);
    os_ << '\n';
  }
  void values(const char* key, const std::vector<double>& v) {
    os_ << key << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? " " : "") << num(v[i]);
    os_ << '\n';
  }
  void matrix(const char* key, const Eigen::MatrixXd& m) {
    os_ << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) os_ << (c ? " " : "") << num(m(r, c));
      os_ << '\n';
    }
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string token() {
    std::string t;
    if (!(is_ >> t)) fail("unexpected end of model file");
    return t;
  }
  void expect(const std::string& key) {
    const std::string t = token();
    if (t != key) fail("expected '" + key + "', found '" + t + "'");
  }
  double real() {
    const std::string t = token();
    double v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) fail("invalid number '" + t + "'");
    return v;
  }
  long long integer() {
    const std::string t = token();
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) fail("invalid integer '" + t + "'");
    return v;
  }
  long long count(long long max = 1'000'000) {
    const long long v = integer();
    if (v < 0 || v > max) fail("size out of range: " + std::to_string(v));
    return v;
  }

  double real(const std::string& key) {
    expect(key);
    return real();
  }
  long long integer(const std::string& key) {
    expect(key);
    return integer();
  }
  std::string word(const std::string& key) {
    expect(key);
    return token();
  }
  std::vector<int> ints(const std::string& key) {
    expect(key);
    std::vector<int> v(static_cast<std::size_t>(count()));
    for (auto& x : v) x = static_cast<int>(integer());
    return v;
  }
  FeatureVector vec(const std::string& key) {
    expect(key);
    FeatureVector v{};
    for (auto& x : v) x = real();
    return v;
  }
  std::vector<double> values(const std::string& key) {
    expect(key);
    std::vector<double> v(static_cast<std::size_t>(count()));
    for (auto& x : v) x = real();
    return v;
  }
  Eigen::MatrixXd matrix(const std::string& key, Eigen::Index rows, Eigen::Index cols) {
    expect(key);
    const long long r = count();
    const long long c = count();
    if (r != rows || c != cols) {
      fail(key + " is " + std::to_string(r) + "x" + std::to_string(c) + ", expected " +
           std::to_string(rows) + "x" + std::to_string(cols));
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = real();
    }
    return m;
  }

  [[noreturn]] static void fail(const std::string& msg) { throw Error(ErrorKind::kModel, msg); }

 private:
  std::istream& is_;
};

const char* loss_name(Loss l) { return l == Loss::kMse ? "mse" : "msereg"; }

void write_scaler(Writer& w, const ScalerParams& s) {
  w.vec("scaler_min", s.min);
  w.vec("scaler_max", s.max);
}

ScalerParams read_scaler(Reader& r) {
  ScalerParams s;
  s.min = r.vec("scaler_min");
  s.max = r.vec("scaler_max");
  return s;
}

void write_body(Writer& w, const NnModel& m) {
  w.line("kind", "nn");
  w.line("metric", m.metric == Metric::kMse ? "mse" : "mad");
  write_scaler(w, m.scaler);
  Eigen::MatrixXd t(static_cast<Eigen::Index>(m.db.templates.size()), kFeatureDim + 1);
  for (std::size_t i = 0; i < m.db.templates.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    t(r, 0) = m.db.templates[i].person;
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      t(r, static_cast<Eigen::Index>(d + 1)) = m.db.templates[i].features[d];
    }
  }
  w.matrix("templates", t);
}

void write_body(Writer& w, const MlpModel& m) {
  const auto& c = m.config;
  w.line("kind", "mlp");
  w.line("inputs", kFeatureDim);
  w.line("hidden", m.hidden());
  w.ints("persons", m.persons);
  w.line("seed", c.seed);
  w.line("loss", loss_name(c.loss));
  w.real("gamma", c.gamma);
  w.line("epochs", c.epochs);
  w.line("multistart", c.multistart);
  w.real("lambda0", c.lambda0);
  w.real("lambda_factor", c.lambda_factor);
  w.real("lambda_max", c.lambda_max);
  w.line("max_retries", c.max_retries);
  write_scaler(w, m.scaler);
  w.matrix("w1", m.w1);
  w.matrix("b1", m.b1);
  w.matrix("w2", m.w2);
  w.matrix("b2", m.b2);
  w.values("loss_history", m.loss_history);
}

void write_body(Writer& w, const CommitteeModel& m) {
  w.line("kind", "committee");
  w.line("members", m.members.size());
  for (const auto& member : m.members) write_body(w, member);
}

void write_body(Writer& w, const RbfModel& m) {
  w.line("kind", "rbf");
  w.ints("persons", m.persons);
  w.line("requested_centres", m.requested_centres);
  w.real("spread", m.spread);
  write_scaler(w, m.scaler);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(m.centres.size()), kFeatureDim);
  for (std::size_t i = 0; i < m.centres.size(); ++i) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = m.centres[i][d];
    }
  }
  w.matrix("centres", c);
  w.matrix("weights", m.weights);
}

NnModel read_nn(Reader& r) {
  NnModel m;
  const std::string metric = r.word("metric");
  if (metric != "mse" && metric != "mad") Reader::fail("unknown metric '" + metric + "'");
  m.metric = metric == "mse" ? Metric::kMse : Metric::kMad;
  m.scaler = read_scaler(r);
  r.expect("templates");
  const long long rows = r.count();
  if (r.count() != static_cast<long long>(kFeatureDim + 1)) Reader::fail("bad template width");
  for (long long i = 0; i < rows; ++i) {
    Template t;
    t.person = static_cast<int>(r.real());
    for (auto& x : t.features) x = r.real();
    m.db.templates.push_back(t);
  }
  return m;
}

MlpModel read_mlp(Reader& r) {
  MlpModel m;
  if (r.integer("inputs") != static_cast<long long>(kFeatureDim)) Reader::fail("input dimension must be 9");
  const auto hidden = static_cast<Eigen::Index>(r.integer("hidden"));
  if (hidden < 1) Reader::fail("hidden must be >= 1");
  m.persons = r.ints("persons");
  const auto c = static_cast<Eigen::Index>(m.persons.size());
  auto& cfg = m.config;
  cfg.hidden = static_cast<int>(hidden);
  cfg.seed = static_cast<std::uint64_t>(r.integer("seed"));
  const std::string loss = r.word("loss");
  if (loss != "mse" && loss != "msereg") Reader::fail("unknown loss '" + loss + "'");
  cfg.loss = loss == "mse" ? Loss::kMse : Loss::kMseReg;
  cfg.gamma = r.real("gamma");
  cfg.epochs = static_cast<int>(r.integer("epochs"));
  cfg.multistart = static_cast<int>(r.integer("multistart"));
  cfg.lambda0 = r.real("lambda0");
  cfg.lambda_factor = r.real("lambda_factor");
  cfg.lambda_max = r.real("lambda_max");
  cfg.max_retries = static_cast<int>(r.integer("max_retries"));
  m.scaler = read_scaler(r);
  m.w1 = r.matrix("w1", hidden, kFeatureDim);
  m.b1 = r.matrix("b1", hidden, 1);
  m.w2 = r.matrix("w2", c, hidden);
  m.b2 = r.matrix("b2", c, 1);
  m.loss_history = r.values("loss_history");
  return m;
}

RbfModel read_rbf(Reader& r) {
  RbfModel m;
  m.persons = r.ints("persons");
  m.requested_centres = static_cast<int>(r.integer("requested_centres"));
  m.spread = r.real("spread");
  m.scaler = read_scaler(r);
  r.expect("centres");
  const long long rows = r.count();
  if (r.count() != static_cast<long long>(kFeatureDim)) Reader::fail("bad centre width");
  for (long long i = 0; i < rows; ++i) {
    FeatureVector v{};
    for (auto& x : v) x = r.real();
    m.centres.push_back(v);
  }
  m.weights = r.matrix("weights", static_cast<Eigen::Index>(rows),
                       static_cast<Eigen::Index>(m.persons.size()));
  return m;
}

Model read_body(Reader& r, bool allow_committee) {
  const std::string kind = r.word("kind");
  if (kind == "nn") return read_nn(r);
  if (kind == "mlp") return read_mlp(r);
  if (kind == "rbf") return read_rbf(r);
  if (kind == "committee" && allow_committee) {
    CommitteeModel m;
    const long long n = r.integer("members");
    if (n < 1 || n > 1000) Reader::fail("bad committee size");
    for (long long i = 0; i < n; ++i) {
      if (r.word("kind") != "mlp") Reader::fail("committee members must be mlp models");
      m.members.push_back(read_mlp(r));
    }
    return m;
  }
  Reader::fail("unknown model kind '" + kind + "'");
}

}  // namespace

void write_model(std::ostream& os, const Model& model) {
  Writer w(os);
  w.line("handgeo-model", kFormatVersion);
  std::visit([&](const auto& m) { write_body(w, m); }, model);
  os << "end\n";
}

Model read_model(std::istream& is) {
  Reader r(is);
  if (r.integer("handgeo-model") != kFormatVersion) Reader::fail("unsupported model version");
  Model m = read_body(r, true);
  r.expect("end");
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_model(os, model);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_model(is);
}

const ScalerParams& model_scaler(const Model& model) {
  return std::visit(
      [](const auto& m) -> const ScalerParams& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CommitteeModel>) {
          if (m.members.empty()) throw Error(ErrorKind::kModel, "empty committee");
          return m.members.front().scaler;
        } else {
          return m.scaler;
        }
      },
      model);
}

int identify(const Model& model, const FeatureVector& raw) {
  const FeatureVector x = apply_scaler(model_scaler(model), raw);
  return std::visit(
      [&](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NnModel>) return nn_identify(x, m.db, m.metric);
        if constexpr (std::is_same_v<T, MlpModel>) return mlp_identify(m, x);
        if constexpr (std::is_same_v<T, CommitteeModel>) return committee_identify(m.members, x);
        if constexpr (std::is_same_v<T, RbfModel>) return rbf_identify(m, x);
      },
      model);
}

}  // namespace handgeo

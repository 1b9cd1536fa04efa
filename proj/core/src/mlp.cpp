#include "handgeo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "handgeo/error.hpp"

namespace handgeo {

namespace {

constexpr int kInputs = static_cast<int>(kFeatureDim);
constexpr int kAug = kInputs + 1;

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " size mismatch: " +
                                                 std::to_string(a) + " vs " + std::to_string(b));
  }
}

int output_index(const std::vector<int>& persons, int person) {
  const auto it = std::lower_bound(persons.begin(), persons.end(), person);
  if (it == persons.end() || *it != person) {
    throw Error(ErrorKind::kInvalidArgument,
                "person " + std::to_string(person) + " is not enrolled in the model");
  }
  return static_cast<int>(it - persons.begin());
}

// Inputs with a trailing 1 for the bias, one row per sample.
Eigen::MatrixXd augmented_inputs(std::span<const FeatureRow> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), kAug);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (int i = 0; i < kInputs; ++i) x(static_cast<Eigen::Index>(n), i) = rows[n].features[i];
    x(static_cast<Eigen::Index>(n), kInputs) = 1.0;
  }
  return x;
}

Eigen::MatrixXd w1_aug(const MlpModel& m) {
  Eigen::MatrixXd w(m.hidden(), kAug);
  w << m.w1, m.b1;
  return w;
}

Eigen::MatrixXd w2_aug(const MlpModel& m) {
  Eigen::MatrixXd w(m.outputs(), m.hidden() + 1);
  w << m.w2, m.b2;
  return w;
}

struct Forward {
  Eigen::MatrixXd h;      // N x (H+1), last column ones
  Eigen::MatrixXd a;      // N x C
  Eigen::MatrixXd slope;  // N x H, 1 - tanh^2
};

Forward forward(const MlpModel& m, const Eigen::MatrixXd& x) {
  Forward f;
  const Eigen::MatrixXd z = x * w1_aug(m).transpose();
  f.h.resize(x.rows(), m.hidden() + 1);
  f.h.leftCols(m.hidden()) = z.array().tanh().matrix();
  f.h.col(m.hidden()).setOnes();
  f.a = f.h * w2_aug(m).transpose();
  f.slope = (1.0 - f.h.leftCols(m.hidden()).array().square()).matrix();
  return f;
}

std::span<const double> as_span(const Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Weights of the data and weight-decay terms, scaled so the data term has unit
// weight whenever it is present (the loss is a positive multiple of this).
struct Terms {
  double data;
  double decay;
};

Terms loss_terms(const TrainConfig& cfg, std::size_t residuals, std::size_t params) {
  if (cfg.loss == Loss::kMse) return {1.0, 0.0};
  if (cfg.gamma == 0.0) return {0.0, 1.0};
  return {1.0, (1.0 - cfg.gamma) * static_cast<double>(residuals) /
                   (cfg.gamma * static_cast<double>(params))};
}

double loss_of(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
               const TrainConfig& cfg) {
  const Forward f = forward(m, x);
  if (cfg.loss == Loss::kMse) return loss_mse(as_span(t), as_span(f.a));
  const Eigen::VectorXd w = mlp_parameters(m);
  return loss_msereg(as_span(t), as_span(f.a), as_span(w), cfg.gamma);
}

// Everything the damped system needs that does not depend on lambda.
class LmSystem {
 public:
  LmSystem(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
           const TrainConfig& cfg)
      : hidden_(m.hidden()), outputs_(m.outputs()), w2_(m.w2) {
    const Forward f = forward(m, x);
    const Eigen::MatrixXd e = f.a - t;
    const Eigen::Index n = x.rows();
    const Eigen::Index nh = static_cast<Eigen::Index>(hidden_) * kAug;

    Eigen::MatrixXd u(n, nh);
    for (int j = 0; j < hidden_; ++j) {
      u.middleCols(static_cast<Eigen::Index>(j) * kAug, kAug) =
          x.array().colwise() * f.slope.col(j).array();
    }
    gram_ = m.w2.transpose() * m.w2;
    hh_ = u.transpose() * u;
    hh_.array() *= expand(gram_).array();
    q_ = f.h.transpose() * f.h;
    r_ = u.transpose() * f.h;

    const Eigen::MatrixXd delta = ((e * m.w2).array() * f.slope.array()).matrix();
    const Eigen::MatrixXd gh = delta.transpose() * x;  // H x kAug
    const Eigen::MatrixXd go = e.transpose() * f.h;    // C x (H+1)

    const Terms terms = loss_terms(cfg, static_cast<std::size_t>(e.size()), m.parameter_count());
    se_ = terms.data;
    sw_ = terms.decay;
    const Eigen::VectorXd w = mlp_parameters(m);
    bh_.resize(nh);
    for (int j = 0; j < hidden_; ++j) {
      for (int i = 0; i < kAug; ++i) {
        const Eigen::Index p = static_cast<Eigen::Index>(j) * kAug + i;
        bh_(p) = -(se_ * gh(j, i) + sw_ * w(p));
      }
    }
    bo_.resize(hidden_ + 1, outputs_);
    for (int k = 0; k < outputs_; ++k) {
      for (int j = 0; j <= hidden_; ++j) {
        bo_(j, k) = -(se_ * go(k, j) + sw_ * w(nh + static_cast<Eigen::Index>(k) * (hidden_ + 1) + j));
      }
    }
  }

  // Returns false when a factorization fails.
  bool solve(double lambda, Eigen::VectorXd& step) const {
    const double mu = sw_ + lambda;
    const Eigen::Index nh = hh_.rows();
    Eigen::MatrixXd mo = se_ * q_;
    mo.diagonal().array() += mu;
    const Eigen::LLT<Eigen::MatrixXd> mo_llt(mo);
    if (mo_llt.info() != Eigen::Success) return false;

    // Eliminate the output weights; their block is the same for every output.
    const Eigen::MatrixXd minv_rt = mo_llt.solve(r_.transpose());
    Eigen::MatrixXd s = r_ * minv_rt;
    s.array() *= expand(gram_).array();
    s = se_ * hh_ - (se_ * se_) * s;
    s.diagonal().array() += mu;

    const Eigen::MatrixXd y = mo_llt.solve(bo_);
    const Eigen::MatrixXd ry = r_ * y;  // nh x C
    Eigen::VectorXd rhs = bh_;
    for (Eigen::Index p = 0; p < nh; ++p) {
      rhs(p) -= se_ * w2_.col(p / kAug).dot(ry.row(p));
    }
    const Eigen::LLT<Eigen::MatrixXd> s_llt(s);
    if (s_llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd dh = s_llt.solve(rhs);

    Eigen::MatrixXd v(nh, outputs_);
    for (Eigen::Index p = 0; p < nh; ++p) v.row(p) = w2_.col(p / kAug).transpose() * dh(p);
    const Eigen::MatrixXd dout = mo_llt.solve(bo_ - se_ * (r_.transpose() * v));

    step.resize(nh + dout.size());
    step.head(nh) = dh;
    for (int k = 0; k < outputs_; ++k) {
      step.segment(nh + static_cast<Eigen::Index>(k) * (hidden_ + 1), hidden_ + 1) = dout.col(k);
    }
    return step.allFinite();
  }

 private:
  // Hidden-unit matrix spread over the (unit, input) parameter grid.
  Eigen::MatrixXd expand(const Eigen::MatrixXd& g) const {
    const Eigen::Index nh = static_cast<Eigen::Index>(hidden_) * kAug;
    Eigen::MatrixXd out(nh, nh);
    for (Eigen::Index a = 0; a < nh; ++a) {
      for (Eigen::Index b = 0; b < nh; ++b) out(a, b) = g(a / kAug, b / kAug);
    }
    return out;
  }

  int hidden_;
  int outputs_;
  Eigen::MatrixXd w2_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd hh_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd bh_;
  Eigen::MatrixXd bo_;
  double se_ = 1.0;
  double sw_ = 0.0;
};

std::vector<int> persons_of(std::span<const FeatureRow> rows) {
  std::vector<int> persons;
  for (const auto& r : rows) persons.push_back(r.person);
  std::sort(persons.begin(), persons.end());
  persons.erase(std::unique(persons.begin(), persons.end()), persons.end());
  return persons;
}

}  // namespace

double loss_mse(std::span<const double> targets, std::span<const double> outputs) {
  check_sizes(targets.size(), outputs.size(), "target/output");
  if (targets.empty()) throw Error(ErrorKind::kInvalidArgument, "empty batch");
  double acc = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = targets[i] - outputs[i];
    acc += d * d;
  }
  return acc / static_cast<double>(targets.size());
}

double loss_msereg(std::span<const double> targets, std::span<const double> outputs,
                   std::span<const double> weights, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "gamma must lie in [0, 1]");
  }
  const double mse = loss_mse(targets, outputs);
  double msw = 0;
  for (const double w : weights) msw += w * w;
  if (!weights.empty()) msw /= static_cast<double>(weights.size());
  return gamma * mse + (1.0 - gamma) * msw;
}

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (c.hidden < 1) fail("hidden must be >= 1");
  if (c.epochs < 1) fail("epochs must be >= 1");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (c.multistart < 1) fail("multistart must be >= 1");
  if (!(c.lambda0 > 0.0)) fail("lambda0 must be > 0");
  if (!(c.lambda_factor > 1.0)) fail("lambda_factor must be > 1");
  if (!(c.lambda_max >= c.lambda0)) fail("lambda_max must be >= lambda0");
  if (c.max_retries < 1) fail("max_retries must be >= 1");
}

std::size_t MlpModel::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

MlpModel mlp_init(int hidden, std::vector<int> persons, std::uint64_t seed) {
  if (hidden < 1 || persons.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "network needs hidden units and outputs");
  }
  MlpModel m;
  m.persons = std::move(persons);
  const int c = static_cast<int>(m.persons.size());
  m.w1.resize(hidden, kInputs);
  m.b1.resize(hidden);
  m.w2.resize(c, hidden);
  m.b2.resize(c);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::VectorXd p(static_cast<Eigen::Index>(m.parameter_count()));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
  mlp_set_parameters(m, p);
  return m;
}

Eigen::VectorXd mlp_parameters(const MlpModel& m) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(m.parameter_count()));
  Eigen::Index k = 0;
  for (int j = 0; j < m.hidden(); ++j) {
    for (int i = 0; i < kInputs; ++i) p(k++) = m.w1(j, i);
    p(k++) = m.b1(j);
  }
  for (int o = 0; o < m.outputs(); ++o) {
    for (int j = 0; j < m.hidden(); ++j) p(k++) = m.w2(o, j);
    p(k++) = m.b2(o);
  }
  return p;
}

void mlp_set_parameters(MlpModel& m, const Eigen::VectorXd& p) {
  check_sizes(static_cast<std::size_t>(p.size()), m.parameter_count(), "parameter");
  Eigen::Index k = 0;
  for (int j = 0; j < m.hidden(); ++j) {
    for (int i = 0; i < kInputs; ++i) m.w1(j, i) = p(k++);
    m.b1(j) = p(k++);
  }
  for (int o = 0; o < m.outputs(); ++o) {
    for (int j = 0; j < m.hidden(); ++j) m.w2(o, j) = p(k++);
    m.b2(o) = p(k++);
  }
}

Eigen::VectorXd mlp_forward(const MlpModel& m, const FeatureVector& x) {
  const Eigen::Map<const Eigen::VectorXd> in(x.data(), kInputs);
  const Eigen::VectorXd h = (m.w1 * in + m.b1).array().tanh().matrix();
  return m.w2 * h + m.b2;
}

Eigen::MatrixXd mlp_jacobian(const MlpModel& m, std::span<const FeatureVector> inputs) {
  const int hh = m.hidden();
  const int c = m.outputs();
  const Eigen::Index nh = static_cast<Eigen::Index>(hh) * kAug;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(inputs.size()) * c,
                                              static_cast<Eigen::Index>(m.parameter_count()));
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    Eigen::VectorXd xa(kAug);
    for (int i = 0; i < kInputs; ++i) xa(i) = inputs[n][i];
    xa(kInputs) = 1.0;
    const Eigen::VectorXd h = (w1_aug(m) * xa).array().tanh().matrix();
    for (int k = 0; k < c; ++k) {
      const Eigen::Index row = static_cast<Eigen::Index>(n) * c + k;
      for (int j = 0; j < hh; ++j) {
        const double g = m.w2(k, j) * (1.0 - h(j) * h(j));
        for (int i = 0; i < kAug; ++i) jac(row, static_cast<Eigen::Index>(j) * kAug + i) = g * xa(i);
      }
      const Eigen::Index off = nh + static_cast<Eigen::Index>(k) * (hh + 1);
      jac.row(row).segment(off, hh) = h.transpose();
      jac(row, off + hh) = 1.0;
    }
  }
  return jac;
}

Eigen::MatrixXd mlp_targets(const std::vector<int>& persons, std::span<const FeatureRow> rows) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(rows.size()),
                                                static_cast<Eigen::Index>(persons.size()), -1.0);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    t(static_cast<Eigen::Index>(n), output_index(persons, rows[n].person)) = 1.0;
  }
  return t;
}

double mlp_loss(const MlpModel& m, std::span<const FeatureRow> rows, const TrainConfig& cfg) {
  return loss_of(m, augmented_inputs(rows), mlp_targets(m.persons, rows), cfg);
}

Eigen::VectorXd mlp_step(const MlpModel& m, std::span<const FeatureRow> rows,
                         const TrainConfig& cfg, double lambda) {
  const LmSystem sys(m, augmented_inputs(rows), mlp_targets(m.persons, rows), cfg);
  Eigen::VectorXd step;
  if (!sys.solve(lambda, step)) throw Error(ErrorKind::kTraining, "damped system is singular");
  return step;
}

Eigen::VectorXd mlp_step_dense(const MlpModel& m, std::span<const FeatureRow> rows,
                               const TrainConfig& cfg, double lambda) {
  std::vector<FeatureVector> inputs;
  for (const auto& r : rows) inputs.push_back(r.features);
  const Eigen::MatrixXd jac = mlp_jacobian(m, inputs);
  const Eigen::MatrixXd t = mlp_targets(m.persons, rows);
  Eigen::VectorXd e(jac.rows());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const Eigen::VectorXd a = mlp_forward(m, rows[n].features);
    for (int k = 0; k < m.outputs(); ++k) {
      e(static_cast<Eigen::Index>(n) * m.outputs() + k) = a(k) - t(static_cast<Eigen::Index>(n), k);
    }
  }
  const Terms terms = loss_terms(cfg, static_cast<std::size_t>(e.size()), m.parameter_count());
  Eigen::MatrixXd a = terms.data * (jac.transpose() * jac);
  a.diagonal().array() += terms.decay + lambda;
  const Eigen::VectorXd b = -(terms.data * (jac.transpose() * e) + terms.decay * mlp_parameters(m));
  return a.ldlt().solve(b);
}

MlpModel mlp_train(std::span<const FeatureRow> training, const TrainConfig& cfg) {
  validate(cfg);
  if (training.empty()) throw Error(ErrorKind::kTraining, "empty training set");
  MlpModel m = mlp_init(cfg.hidden, persons_of(training), cfg.seed);
  m.config = cfg;
  const Eigen::MatrixXd x = augmented_inputs(training);
  const Eigen::MatrixXd t = mlp_targets(m.persons, training);

  double loss = loss_of(m, x, t, cfg);
  m.loss_history.push_back(loss);
  double lambda = cfg.lambda0;
  bool stalled = false;
  for (int epoch = 0; epoch < cfg.epochs && !stalled && loss > 0.0; ++epoch) {
    const LmSystem sys(m, x, t, cfg);
    const Eigen::VectorXd params = mlp_parameters(m);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
      Eigen::VectorXd step;
      const bool solved = sys.solve(lambda, step);
      if (solved) {
        MlpModel trial = m;
        mlp_set_parameters(trial, params + step);
        const double trial_loss = loss_of(trial, x, t, cfg);
        if (trial_loss < loss) {
          m = std::move(trial);
          loss = trial_loss;
          m.loss_history.push_back(loss);
          lambda /= cfg.lambda_factor;
          break;
        }
      }
      lambda *= cfg.lambda_factor;
      if (lambda > cfg.lambda_max) {
        if (!solved) {
          throw Error(ErrorKind::kTraining, "normal equations singular at maximal damping");
        }
        stalled = true;
        break;
      }
    }
  }
  return m;
}

std::size_t argmax(const Eigen::VectorXd& scores) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

int mlp_identify(const MlpModel& m, const FeatureVector& x) {
  return m.persons[argmax(mlp_forward(m, x))];
}

double training_rate(const MlpModel& m, std::span<const FeatureRow> rows) {
  if (rows.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : rows) correct += mlp_identify(m, r.features) == r.person ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

std::vector<MlpModel> multistart_models(std::span<const FeatureRow> training,
                                        const TrainConfig& cfg) {
  validate(cfg);
  std::vector<MlpModel> models;
  std::string last_error;
  for (int k = 0; k < cfg.multistart; ++k) {
    TrainConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(k);
    try {
      models.push_back(mlp_train(training, run));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTraining) throw;
      last_error = e.what();
    }
  }
  if (models.empty()) throw Error(ErrorKind::kTraining, "every start failed: " + last_error);
  return models;
}

std::size_t select_best(std::span<const MlpModel> models, std::span<const FeatureRow> training) {
  std::size_t best = 0;
  double best_rate = -1.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double rate = training_rate(models[i], training);
    if (rate > best_rate) {
      best_rate = rate;
      best = i;
    }
  }
  return best;
}

MlpModel multistart_train(std::span<const FeatureRow> training, const TrainConfig& cfg) {
  auto models = multistart_models(training, cfg);
  return std::move(models[select_best(models, training)]);
}

Eigen::VectorXd committee_outputs(std::span<const MlpModel> members, const FeatureVector& x) {
  if (members.empty()) throw Error(ErrorKind::kInvalidArgument, "empty committee");
  Eigen::VectorXd sum = mlp_forward(members.front(), x);
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (members[i].persons != members.front().persons) {
      throw Error(ErrorKind::kInvalidArgument, "committee members enroll different persons");
    }
    sum += mlp_forward(members[i], x);
  }
  return sum / static_cast<double>(members.size());
}

int committee_identify(std::span<const MlpModel> members, const FeatureVector& x) {
  const Eigen::VectorXd mean = committee_outputs(members, x);
  return members.front().persons[argmax(mean)];
}

}  // namespace handgeo

#include "handgeo/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "handgeo/error.hpp"
#include "handgeo/mlp.hpp"
#include "handgeo/nearest_neighbor.hpp"

namespace handgeo {

namespace {

// Orthogonalized columns this small relative to the original are treated as
// linearly dependent.
constexpr double kDependentTol = 1e-13;

std::vector<int> persons_of(std::span<const FeatureRow> rows) {
  std::vector<int> persons;
  for (const auto& r : rows) persons.push_back(r.person);
  std::sort(persons.begin(), persons.end());
  persons.erase(std::unique(persons.begin(), persons.end()), persons.end());
  return persons;
}

}  // namespace

double median_pairwise_distance(std::span<const FeatureRow> rows) {
  std::vector<double> d;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      d.push_back(std::sqrt(dist_mse(rows[i].features, rows[j].features)));
    }
  }
  if (d.empty()) throw Error(ErrorKind::kTraining, "need at least two training vectors");
  std::sort(d.begin(), d.end());
  const std::size_t mid = d.size() / 2;
  return d.size() % 2 ? d[mid] : (d[mid - 1] + d[mid]) / 2.0;
}

double rbf_kernel(const FeatureVector& x, const FeatureVector& c, double spread) {
  return std::exp(-dist_mse(x, c) / (2.0 * spread * spread));
}

RbfModel rbf_train(std::span<const FeatureRow> training, int centres, double spread) {
  const auto n = static_cast<Eigen::Index>(training.size());
  if (centres < 1 || centres > n) {
    throw Error(ErrorKind::kInvalidArgument, "centre count " + std::to_string(centres) +
                                                 " outside [1, " + std::to_string(n) + "]");
  }
  RbfModel m;
  m.persons = persons_of(training);
  m.requested_centres = centres;
  m.spread = spread > 0.0 ? spread : median_pairwise_distance(training);
  if (!(m.spread > 0.0)) throw Error(ErrorKind::kTraining, "training vectors coincide");

  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      phi(r, c) = rbf_kernel(training[static_cast<std::size_t>(r)].features,
                             training[static_cast<std::size_t>(c)].features, m.spread);
    }
  }
  const Eigen::MatrixXd t = mlp_targets(m.persons, training);

  Eigen::MatrixXd w = phi;
  const Eigen::VectorXd norms = phi.colwise().squaredNorm().transpose();
  std::vector<bool> open(static_cast<std::size_t>(n), true);
  std::vector<Eigen::Index> chosen;
  while (static_cast<int>(chosen.size()) < centres) {
    Eigen::Index best = -1;
    double best_gain = -1.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!open[static_cast<std::size_t>(c)]) continue;
      const double ww = w.col(c).squaredNorm();
      if (ww <= kDependentTol * norms(c)) {
        open[static_cast<std::size_t>(c)] = false;
        continue;
      }
      const double gain = (t.transpose() * w.col(c)).squaredNorm() / ww;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best < 0) break;
    open[static_cast<std::size_t>(best)] = false;
    chosen.push_back(best);
    const Eigen::VectorXd q = w.col(best) / w.col(best).norm();
    for (Eigen::Index c = 0; c < n; ++c) {
      if (open[static_cast<std::size_t>(c)]) w.col(c) -= q.dot(w.col(c)) * q;
    }
  }

  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    design.col(static_cast<Eigen::Index>(k)) = phi.col(chosen[k]);
    m.centres.push_back(training[static_cast<std::size_t>(chosen[k])].features);
  }
  m.weights = design.colPivHouseholderQr().solve(t);
  return m;
}

Eigen::VectorXd rbf_outputs(const RbfModel& m, const FeatureVector& x) {
  Eigen::RowVectorXd k(static_cast<Eigen::Index>(m.centres.size()));
  for (std::size_t c = 0; c < m.centres.size(); ++c) {
    k(static_cast<Eigen::Index>(c)) = rbf_kernel(x, m.centres[c], m.spread);
  }
  return (k * m.weights).transpose();
}

int rbf_identify(const RbfModel& m, const FeatureVector& x) {
  return m.persons[argmax(rbf_outputs(m, x))];
}

double rbf_residual(const RbfModel& m, std::span<const FeatureRow> rows) {
  const Eigen::MatrixXd t = mlp_targets(m.persons, rows);
  double worst = 0;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const Eigen::VectorXd a = rbf_outputs(m, rows[n].features);
    worst = std::max(worst, (a - t.row(static_cast<Eigen::Index>(n)).transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace handgeo

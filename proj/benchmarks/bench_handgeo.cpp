#include <benchmark/benchmark.h>

#include <random>

#include "handgeo/imaging.hpp"
#include "handgeo/mlp.hpp"
#include "handgeo/pipeline.hpp"
#include "handgeo/rbf.hpp"
#include "handgeo/synthgen.hpp"

using namespace handgeo;

namespace {

const GrayImage& scan() {
  static const GrayImage img = [] {
    RenderOptions o;
    o.noise_level = 0.01;
    return render(canonical_hand(), o).image;
  }();
  return img;
}

// 22 persons x 5 enrolment images, scaled range, like the training half.
std::vector<FeatureRow> training_rows() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<FeatureRow> rows;
  for (int p = 1; p <= 22; ++p) {
    FeatureVector c{};
    for (auto& v : c) v = u(rng);
    for (int s = 1; s <= 5; ++s) {
      FeatureVector x = c;
      for (auto& v : x) v += n(rng);
      rows.push_back({p, s, x});
    }
  }
  return rows;
}

void BM_Extract(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(extract(scan()));
}
BENCHMARK(BM_Extract)->Unit(benchmark::kMillisecond);

void BM_LoG(benchmark::State& state) {
  const BinaryImage sil = binarize(lowpass_filter(scan(), 1));
  const double sigma = static_cast<double>(state.range(0)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(detect_edges_log(sil, sigma));
}
BENCHMARK(BM_LoG)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_LmStep(benchmark::State& state) {
  const auto rows = training_rows();
  TrainConfig c;
  c.loss = state.range(0) ? Loss::kMseReg : Loss::kMse;
  const MlpModel m = mlp_init(c.hidden, [] {
    std::vector<int> p(22);
    for (int i = 0; i < 22; ++i) p[static_cast<std::size_t>(i)] = i + 1;
    return p;
  }(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_step(m, rows, c, 1e-3));
}
BENCHMARK(BM_LmStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LmStepDense(benchmark::State& state) {
  const auto rows = training_rows();
  TrainConfig c;
  std::vector<int> persons(22);
  for (int i = 0; i < 22; ++i) persons[static_cast<std::size_t>(i)] = i + 1;
  const MlpModel m = mlp_init(c.hidden, persons, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_step_dense(m, rows, c, 1e-3));
}
BENCHMARK(BM_LmStepDense)->Unit(benchmark::kMillisecond);

void BM_RbfTrain(benchmark::State& state) {
  const auto rows = training_rows();
  const int centres = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rbf_train(rows, centres));
}
BENCHMARK(BM_RbfTrain)->Arg(10)->Arg(50)->Arg(110)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

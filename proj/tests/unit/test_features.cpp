#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "handgeo/error.hpp"
#include "handgeo/features.hpp"
#include "handgeo/pipeline.hpp"
#include "handgeo/synthgen.hpp"
#include "helpers.hpp"

using namespace handgeo;

namespace {

RawFeatures one_to_thirteen() {
  std::array<double, kRawFeatureCount> v{};
  std::iota(v.begin(), v.end(), 1.0);
  return RawFeatures::from_values(v);
}

BinaryImage shifted(const BinaryImage& img, int dx, int dy) {
  BinaryImage out(img.width(), img.height(), img.dpi());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y) && out.contains(x + dx, y + dy)) out.at(x + dx, y + dy) = 1;
    }
  }
  return out;
}

RawFeatures measure_silhouette(const BinaryImage& sil) {
  const ChainCode chain = trace_contour(detect_edges_log(sil, 1.0));
  return measure(find_landmarks(chain), chain, sil);
}

}  // namespace

TEST_CASE("select keeps features 2-5 and 8-12") {
  const FeatureVector v = select(one_to_thirteen());
  CHECK(v == FeatureVector{2, 3, 4, 5, 8, 9, 10, 11, 12});
  RawFeatures a = one_to_thirteen();
  RawFeatures b = a;
  b.thumb_length = 999;
  b.surface = 12345;
  b.wrist_length = -1;
  b.thumb_base_width = 0;
  CHECK(select(a) == select(b));
  CHECK(feature_names()[0] == "first_length");
  CHECK(feature_names()[8] == "perimeter");
}

TEST_CASE("measure: lengths and widths from landmarks") {
  Landmarks lm{};
  lm.tips = {{{200, 150}, {150, 50}, {120, 40}, {90, 50}, {60, 80}}};
  lm.valleys = {{{170, 160}, {110, 140}, {130, 140}, {75, 150}}};
  lm.wrist = {{{180, 300}, {60, 300}}};
  // Middle finger: tip (120,40), base (110,140)-(130,140) -> 100 px.
  BinaryImage sil(10, 10);
  ChainCode chain;
  chain.codes = {0, 2, 4, 6};
  const RawFeatures raw = measure(lm, chain, sil);
  CHECK(raw.middle_length == doctest::Approx(25.4).epsilon(1e-12));
  CHECK(raw.middle_width == doctest::Approx(20 * 0.254).epsilon(1e-12));
  CHECK(raw.wrist_length == doctest::Approx(120 * 0.254).epsilon(1e-12));
  // Little finger closes its base with the nearest wrist endpoint (60,300).
  CHECK(raw.little_width == doctest::Approx(std::hypot(15, 150) * 0.254).epsilon(1e-12));
  CHECK(raw.perimeter == doctest::Approx(4 * 0.254).epsilon(1e-12));
}

TEST_CASE("surface and perimeter of a 100 px square") {
  const BinaryImage sq = test::filled_rect(120, 120, 10, 10, 100, 100);
  CHECK(surface_mm2(sq) == doctest::Approx(645.16).epsilon(1e-12));
  const ChainCode chain = trace_contour(boundary_map(sq));
  CHECK(chain.codes.size() == 396);
  CHECK(perimeter_mm(chain, 100) == doctest::Approx(396 * 0.254).epsilon(1e-12));
}

TEST_CASE("scaler: endpoints, midpoint and clipping") {
  const std::vector<FeatureVector> train{test::fv({0, 10, -5, 1, 1, 1, 1, 1, 1}),
                                         test::fv({4, 20, 5, 2, 2, 2, 2, 2, 3})};
  const ScalerParams p = fit_scaler(train);
  const FeatureVector lo = apply_scaler(p, train[0]);
  const FeatureVector hi = apply_scaler(p, train[1]);
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    CHECK(lo[d] == -1.0);
    CHECK(hi[d] == 1.0);
  }
  const FeatureVector mid = apply_scaler(p, test::fv({2, 15, 0, 1.5, 1.5, 1.5, 1.5, 1.5, 2}));
  for (const double v : mid) CHECK(v == 0.0);
  const FeatureVector out = apply_scaler(p, test::fv({14, -100, 5, 2, 2, 2, 2, 2, 3}));
  CHECK(out[0] == 1.0);
  CHECK(out[1] == -1.0);
}

TEST_CASE("scaler: degenerate dimension is named") {
  const std::vector<FeatureVector> train{test::fv({0, 1, 7, 1, 1, 1, 1, 1, 1}),
                                         test::fv({1, 2, 7, 2, 2, 2, 2, 2, 2})};
  try {
    fit_scaler(train);
    FAIL("expected scaler error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kScaler);
    CHECK(std::string(e.what()).find("ring_length") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_scaler(std::span<const FeatureVector>(train.data(), 1)), Error);
}

TEST_CASE("feature CSV round trip is exact") {
  std::vector<FeatureRow> rows{{1, 1, test::fv({0.1, 1.0 / 3, 2e-300, -7, 1e10, 3.14159, 2, 3, 4})},
                               {22, 10, test::fv({1, 2, 3, 4, 5, 6, 7, 8, 9})}};
  std::stringstream ss;
  write_feature_csv(ss, rows);
  CHECK(ss.str().rfind("person,sample,first_length,", 0) == 0);
  CHECK(read_feature_csv(ss) == rows);
  std::stringstream bad("person,sample\n1,2\n");
  CHECK_THROWS_AS(read_feature_csv(bad), Error);
}

TEST_CASE("measurements are translation invariant") {
  const Rendering r = render(canonical_hand());
  const BinaryImage sil = clear_border(binarize(lowpass_filter(r.image, 1)), 1);
  const auto base = measure_silhouette(sil).values();
  for (const auto [dx, dy] : {std::pair{3, 0}, std::pair{-4, -2}, std::pair{7, -5}}) {
    CHECK(measure_silhouette(shifted(sil, dx, dy)).values() == base);
  }
}

TEST_CASE("mm features are resolution independent") {
  RenderOptions lo;
  RenderOptions hi;
  hi.dpi = 200;
  const auto a = extract(render(canonical_hand(), lo).image).raw.values();
  const auto b = extract(render(canonical_hand(), hi).image).raw.values();
  for (std::size_t i = 0; i < kRawFeatureCount; ++i) {
    CAPTURE(kRawFeatureNames[i]);
    CHECK(std::abs(b[i] - a[i]) <= 0.02 * a[i]);
  }
}

TEST_CASE("extracted features agree with the ideal shape") {
  const Rendering r = render(canonical_hand());
  const Extraction ex = extract(r.image);
  const auto got = ex.raw.values();
  const auto want = r.truth.features.values();
  for (std::size_t i : {0, 1, 2, 3, 4, 6, 7, 8, 9, 10}) {
    CAPTURE(kRawFeatureNames[i]);
    CHECK(std::abs(got[i] - want[i]) <= 0.05 * want[i]);
  }
  CHECK(std::abs(ex.raw.surface - r.truth.features.surface) <= 0.02 * r.truth.features.surface);
  CHECK(extract(r.image).features == ex.features);
}

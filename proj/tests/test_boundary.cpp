// Copyright 2026 the mi-audit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <doctest.h>

#include "miaudit/boundary.hpp"
#include "miaudit/errors.hpp"
#include "miaudit/model.hpp"
#include "miaudit/synthetic.hpp"

using namespace miaudit;

namespace {

Classifier make_logistic(const Vec& w, double b) {
  Architecture arch = Architecture::logistic(w.size(), 2);
  DenseLayer d;
  d.weights = Matrix(2, w.size());
  for (std::size_t i = 0; i < w.size(); ++i) d.weights.at(1, i) = w[i];
  d.bias = {0.0, b};
  std::vector<Layer> layers;
  layers.push_back(std::move(d));
  return Classifier(arch, std::move(layers));
}

FeatureBox cube(std::size_t dim, double lo, double hi) {
  FeatureBox box;
  box.lo.assign(dim, lo);
  box.hi.assign(dim, hi);
  return box;
}

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("analytic_linear_distance: closed forms") {
  DistanceEstimate est = analytic_linear_distance({3.0, 4.0}, 0.0, {1.0, 1.0});
  CHECK(est.value == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(est.method == DistanceMethod::kAnalytic);

  // A point on the hyperplane has distance zero.
  DistanceEstimate zero = analytic_linear_distance({1.0, 0.0}, -2.0, {2.0, 5.0});
  CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(analytic_linear_distance({0.0, 0.0}, 1.0, {1.0, 1.0}), DegenerateModelError);
}

TEST_CASE("analytic distance equals the logistic confidence identity") {
  // For h(x) = sigmoid(w.x + b): |w.x+b| / ||w|| = |sigma^-1(h(x))| / ||w||.
  RngStream rng(19, 0);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t dim = 2 + trial % 6;
    Vec w(dim);
    for (double& v : w) v = rng.uniform(-2.0, 2.0);
    if (l2_norm(w) < 1e-6) continue;
    double b = rng.uniform(-1.0, 1.0);
    Vec x(dim);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);

    Classifier m = make_logistic(w, b);
    double conf1 = m.confidences(x).scores[1];
    double via_confidence = std::abs(logistic_inverse(conf1)) / l2_norm(w);
    double analytic = analytic_linear_distance(w, b, x).value;
    CHECK(analytic == doctest::Approx(via_confidence).epsilon(1e-9));
  }
}

TEST_CASE("hsja: misclassified point returns zero after one query") {
  Classifier m = make_logistic({1.0, 0.0}, 0.0);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  HsjaConfig cfg;
  RngStream rng(1, 0);
  // x with w.x < 0 is predicted class 0; claim y_true = 1 so it's misclassified.
  DistanceEstimate est = hsja_distance(oracle, {-1.0, 0.0}, 1, cube(2, -4, 4), cfg, rng);
  CHECK(est.value == 0.0);
  CHECK(est.queries_used == 1);
}

TEST_CASE("hsja: matches the analytic oracle on random logistic models") {
  // Small-instance equivalence suite: 2% relative error at budget 2500.
  RngStream model_rng(23, 0);
  std::size_t checked = 0, within = 0;
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t dim = 2 + (trial % 5);
    Vec w(dim);
    for (double& v : w) v = model_rng.normal();
    double norm = l2_norm(w);
    if (norm < 0.3) continue;
    double b = model_rng.uniform(-0.5, 0.5);
    Classifier m = make_logistic(w, b);
    ConfidenceOracle conf(m);
    LabelOracle oracle(conf);
    FeatureBox box = cube(dim, -4.0, 4.0);

    for (int p = 0; p < 4; ++p) {
      Vec x(dim);
      for (double& v : x) v = model_rng.uniform(-1.5, 1.5);
      double analytic = analytic_linear_distance(w, b, x).value;
      if (analytic < 0.2 || analytic > 2.0) continue;
      std::size_t y = m.predicted_label(x);  // correctly classified by construction

      HsjaConfig cfg;
      cfg.query_budget = 2500;
      RngStream rng(100 + trial, p);
      DistanceEstimate est = hsja_distance(oracle, x, y, box, cfg, rng);
      ++checked;
      double rel = std::abs(est.value - analytic) / analytic;
      if (rel <= 0.02) ++within;
      CHECK(est.queries_used <= cfg.query_budget);
      CHECK(est.value >= analytic - 1e-9);  // adversarial-side estimate upper-bounds
    }
  }
  REQUIRE(checked >= 20);
  MESSAGE("hsja within 2%: ", within, "/", checked);
  CHECK(static_cast<double>(within) / static_cast<double>(checked) >= 0.95);
}

TEST_CASE("hsja: trajectory is non-increasing and deterministic") {
  Classifier m = make_logistic({1.0, -1.5, 0.7}, 0.2);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  FeatureBox box = cube(3, -4, 4);
  Vec x = {0.8, -0.6, 0.4};
  std::size_t y = m.predicted_label(x);
  HsjaConfig cfg;
  cfg.query_budget = 2000;

  RngStream r1(7, 7), r2(7, 7);
  DistanceEstimate a = hsja_distance(oracle, x, y, box, cfg, r1);
  DistanceEstimate b = hsja_distance(oracle, x, y, box, cfg, r2);
  CHECK(a.value == b.value);
  CHECK(a.queries_used == b.queries_used);

  REQUIRE(a.trajectory.size() >= 3);
  for (std::size_t i = 1; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].second <= a.trajectory[i - 1].second + 1e-12);
    CHECK(a.trajectory[i].first >= a.trajectory[i - 1].first);
  }
}

TEST_CASE("hsja: budget accounting matches the oracle counter") {
  Classifier m = make_logistic({1.0, 1.0}, 0.0);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  HsjaConfig cfg;
  cfg.query_budget = 600;
  RngStream rng(3, 1);
  std::uint64_t before = conf.counter().total();
  DistanceEstimate est = hsja_distance(oracle, {1.0, 1.0}, 1, cube(2, -4, 4), cfg, rng);
  CHECK(conf.counter().total() - before == est.queries_used);
  CHECK(est.queries_used <= 600);
}

TEST_CASE("hsja: initialization failure yields the +inf sentinel") {
  // A constant model never misclassifies relative to its own prediction, so
  // no adversarial starting point exists.
  Classifier m = make_logistic({0.0, 0.0}, 5.0);  // always predicts class 1
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  HsjaConfig cfg;
  cfg.query_budget = 300;
  cfg.init_attempts = 50;
  RngStream rng(4, 0);
  DistanceEstimate est = hsja_distance(oracle, {0.5, 0.5}, 1, cube(2, -4, 4), cfg, rng);
  CHECK(std::isinf(est.value));
  CHECK_FALSE(est.converged);
}

TEST_CASE("whitebox: exact on linear models, zero when misclassified") {
  RngStream rng(29, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t dim = 2 + trial % 4;
    Vec w(dim);
    for (double& v : w) v = rng.normal();
    if (l2_norm(w) < 0.3) continue;
    double b = rng.uniform(-0.5, 0.5);
    Classifier m = make_logistic(w, b);
    Vec x(dim);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    double analytic = analytic_linear_distance(w, b, x).value;
    if (analytic < 1e-3) continue;
    std::size_t y = m.predicted_label(x);
    DistanceEstimate est = whitebox_distance(m, x, y, 50);
    CHECK(est.value == doctest::Approx(analytic).epsilon(1e-4));
    // Misclassified relative to the other label.
    DistanceEstimate zero = whitebox_distance(m, x, 1 - y, 50);
    CHECK(zero.value == 0.0);
  }
}

TEST_CASE("whitebox upper-bounds and hsja approaches it on a small MLP") {
  BlobsParams p;
  p.num_classes = 3;
  p.dim = 4;
  p.count = 150;
  p.center_scale = 2.5;
  RngStream drng(31, 0);
  Dataset ds = make_blobs(p, drng);
  Architecture arch = Architecture::mlp(4, {16}, Activation::kTanh, 3);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 0.1;
  cfg.seed = 5;
  RngStream rng(5, 0);
  Classifier m = train_classifier(arch, ds.schema, ds.records, cfg, rng);

  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  FeatureBox box = feature_box_for(ds.schema, ds.records);

  std::size_t compared = 0, ok = 0;
  RngStream walk_rng(6, 0);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto& rec = ds.records[i];
    if (m.predicted_label(rec.x) != rec.y_true) continue;
    DistanceEstimate wb = whitebox_distance(m, rec.x, rec.y_true, 80);
    if (!wb.converged) continue;
    HsjaConfig hs;
    hs.query_budget = 2500;
    RngStream sub = walk_rng.split(i);
    DistanceEstimate walk = hsja_distance(oracle, rec.x, rec.y_true, box, hs, sub);
    if (!std::isfinite(walk.value)) continue;
    ++compared;
    if (wb.value <= walk.value * 1.05 + 1e-9) ++ok;
  }
  REQUIRE(compared >= 20);
  MESSAGE("whitebox <= hsja + 5%: ", ok, "/", compared);
  CHECK(static_cast<double>(ok) / static_cast<double>(compared) >= 0.9);
}

TEST_CASE("noise_robustness: misclassified short-circuits, deep points are robust") {
  Classifier m = make_logistic({2.0, 0.0}, 0.0);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  FeatureSchema schema;
  schema.num_classes = 2;
  schema.feature_kinds.assign(2, FeatureKind::kContinuous);

  NoiseRobustnessConfig cfg;
  cfg.kind = NoiseRobustnessConfig::Kind::kGaussian;
  cfg.sigma = 0.05;
  cfg.num_queries = 50;

  RngStream rng(8, 0);
  std::uint64_t before = conf.counter().total();
  double mis = noise_robustness(oracle, {-3.0, 0.0}, 1, schema, cfg, rng);
  CHECK(mis == 0.0);
  CHECK(conf.counter().total() - before == 1);  // one query then short-circuit

  double deep = noise_robustness(oracle, {3.0, 0.0}, 1, schema, cfg, rng);
  CHECK(deep == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("noise_robustness: Monte-Carlo matches the Gaussian half-space probability") {
  // For a linear model, robustness converges to Phi(distance / sigma).
  Vec w = {1.5, -0.8, 0.4};
  double b = 0.1;
  Classifier m = make_logistic(w, b);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  FeatureSchema schema;
  schema.num_classes = 2;
  schema.feature_kinds.assign(3, FeatureKind::kContinuous);

  Vec x = {0.5, -0.2, 0.3};
  std::size_t y = m.predicted_label(x);
  double dist = analytic_linear_distance(w, b, x).value;
  double sigma = 0.6;
  double expected = phi(dist / sigma);

  NoiseRobustnessConfig cfg;
  cfg.kind = NoiseRobustnessConfig::Kind::kGaussian;
  cfg.sigma = sigma;
  cfg.num_queries = 20000;
  RngStream rng(9, 0);
  double score = noise_robustness(oracle, x, y, schema, cfg, rng);
  // Binomial noise at N=20000 is ~0.01 at three sigma.
  CHECK(score == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("combined_distances: list shape and misclassified entries") {
  GlyphsParams p;
  p.count = 80;
  p.height = 8;
  p.width = 8;
  p.num_classes = 3;
  RngStream drng(41, 0);
  Dataset ds = make_glyphs(p, drng);
  Architecture arch = Architecture::mlp(64, {16}, Activation::kTanh, 3);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.learning_rate = 0.1;
  cfg.seed = 10;
  RngStream rng(10, 0);
  Classifier m = train_classifier(arch, ds.schema, ds.records, cfg, rng);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);
  FeatureBox box = feature_box_for(ds.schema, ds.records);

  AugmentationSpec rot;
  rot.kind = AugmentationKind::kRotation;
  rot.rotation_degrees = 10.0;
  HsjaConfig hs;
  hs.query_budget = 400;

  RngStream walk(11, 0);
  auto ests = combined_distances(oracle, ds.records[0], ds.schema, rot, box, hs, walk);
  CHECK(ests.size() == 3);

  // A deliberately misclassified source point gives a zero first entry.
  ExampleRecord wrong = ds.records[0];
  wrong.y_true = (m.predicted_label(wrong.x) + 1) % 3;
  RngStream walk2(11, 1);
  auto ests2 = combined_distances(oracle, wrong, ds.schema, rot, box, hs, walk2);
  CHECK(ests2[0].value == 0.0);
}

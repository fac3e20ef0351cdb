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

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "miaudit/attacks.hpp"
#include "miaudit/errors.hpp"
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

struct SmallGlyphWorld {
  Dataset ds;
  std::vector<ExampleRecord> train, test;
  Classifier model;
  FeatureBox box;

  SmallGlyphWorld(std::size_t n_train, std::size_t epochs, std::uint64_t seed) {
    GlyphsParams p;
    p.count = 2 * n_train;
    p.height = 10;
    p.width = 10;
    p.num_classes = 4;
    RngStream drng(seed, 0);
    ds = make_glyphs(p, drng);
    train.assign(ds.records.begin(), ds.records.begin() + n_train);
    test.assign(ds.records.begin() + n_train, ds.records.end());
    Architecture arch = Architecture::mlp(100, {32}, Activation::kTanh, 4);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = 0.1;
    cfg.seed = seed;
    RngStream rng(seed, 1);
    model = train_classifier(arch, ds.schema, train, cfg, rng);
    box = feature_box_for(ds.schema, ds.records);
  }

  std::vector<ExampleRecord> balanced_eval() const {
    std::vector<ExampleRecord> pts = train;
    pts.insert(pts.end(), test.begin(), test.end());
    return pts;
  }

  std::vector<bool> truth() const {
    std::vector<bool> t(train.size(), true);
    t.insert(t.end(), test.size(), false);
    return t;
  }
};

double balanced_accuracy(const std::vector<MembershipPrediction>& preds,
                         const std::vector<bool>& truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].member == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace

TEST_CASE("gap_attack: accuracy equals the Eq.(1) identity exactly") {
  SmallGlyphWorld world(60, 40, 111);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  auto points = world.balanced_eval();
  auto truth = world.truth();

  auto preds = gap_attack(oracle, points);
  double acc = balanced_accuracy(preds, truth);
  double acc_train = accuracy(world.model, world.train);
  double acc_test = accuracy(world.model, world.test);
  CHECK(std::abs(acc - (0.5 + (acc_train - acc_test) / 2.0)) < 1e-12);
}

TEST_CASE("gap_attack: degenerate rates recover the closed forms") {
  // acc_train = 1, acc_test = 0.8 -> 0.9; equal accuracies -> 0.5. Build the
  // balanced set directly from correctness counts.
  Classifier m = make_logistic({1.0, 0.0}, 0.0);
  ConfidenceOracle conf(m);
  LabelOracle oracle(conf);

  std::vector<ExampleRecord> points;
  std::vector<bool> truth;
  // 10 members, all classified correctly (x0 > 0 predicts class 1).
  for (int i = 0; i < 10; ++i) {
    points.push_back({static_cast<std::uint64_t>(i), {1.0, 0.0}, 1});
    truth.push_back(true);
  }
  // 10 non-members, 8 correct, 2 wrong.
  for (int i = 0; i < 8; ++i) {
    points.push_back({static_cast<std::uint64_t>(10 + i), {1.0, 0.0}, 1});
    truth.push_back(false);
  }
  for (int i = 0; i < 2; ++i) {
    points.push_back({static_cast<std::uint64_t>(18 + i), {-1.0, 0.0}, 1});
    truth.push_back(false);
  }
  auto preds = gap_attack(oracle, points);
  CHECK(balanced_accuracy(preds, truth) == doctest::Approx(0.5 + (1.0 - 0.8) / 2.0));
}

TEST_CASE("tune_threshold: separable scores, ties toward smaller tau") {
  DecisionThreshold th = tune_threshold({2.0, 3.0}, {0.0, 1.0});
  CHECK(th.tau == doctest::Approx(1.5));
  CHECK(th.shadow_balanced_accuracy == doctest::Approx(1.0));

  // Identical distributions: no threshold beats chance.
  DecisionThreshold flat = tune_threshold({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  CHECK(flat.shadow_balanced_accuracy == doctest::Approx(0.5));

  CHECK_THROWS_AS(tune_threshold({}, {1.0}), InvalidInputError);
  CHECK_THROWS_AS(tune_threshold({1.0}, {}), InvalidInputError);
}

TEST_CASE("tune_threshold: matches a brute-force grid oracle") {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec members(40), nonmembers(40);
    for (double& v : members) v = rng.normal(0.8, 1.0);
    for (double& v : nonmembers) v = rng.normal(0.0, 1.0);
    DecisionThreshold th = tune_threshold(members, nonmembers);

    // Grid oracle: 10^4 candidate thresholds over the observed range.
    double lo = std::min(*std::min_element(members.begin(), members.end()),
                         *std::min_element(nonmembers.begin(), nonmembers.end())) -
                0.5;
    double hi = std::max(*std::max_element(members.begin(), members.end()),
                         *std::max_element(nonmembers.begin(), nonmembers.end())) +
                0.5;
    double best_grid = 0.0;
    for (int g = 0; g <= 10000; ++g) {
      double tau = lo + (hi - lo) * g / 10000.0;
      double tpr = 0.0, fpr = 0.0;
      for (double v : members) tpr += v > tau ? 1.0 : 0.0;
      for (double v : nonmembers) fpr += v > tau ? 1.0 : 0.0;
      best_grid = std::max(best_grid, 0.5 * (tpr / 40.0 + 1.0 - fpr / 40.0));
    }
    CHECK(th.shadow_balanced_accuracy >= best_grid - 1e-12);  // exact sweep dominates the grid
    CHECK(th.shadow_balanced_accuracy <= best_grid + 0.05);
  }
}

TEST_CASE("threshold attacks are monotone in tau") {
  SmallGlyphWorld world(40, 30, 117);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  auto points = world.balanced_eval();

  HsjaConfig cfg;
  cfg.query_budget = 300;
  RngStream r1(5, 5), r2(5, 5);
  auto low = boundary_distance_attack(oracle, points, world.box, cfg, 0.1, r1);
  auto high = boundary_distance_attack(oracle, points, world.box, cfg, 0.4, r2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    // Raising tau never flips non-member to member.
    if (!low[i].member) CHECK_FALSE(high[i].member);
    CHECK(low[i].score == high[i].score);  // same seeds, same estimates
  }
}

TEST_CASE("confidence_threshold_attack: one-hot member rule") {
  Classifier m = make_logistic({10.0, 0.0}, 0.0);
  ConfidenceOracle conf(m);
  std::vector<ExampleRecord> points = {{0, {5.0, 0.0}, 1}};
  auto preds = confidence_threshold_attack(conf, points, 0.99);
  CHECK(preds[0].member);  // sigmoid(50) ~ 1.0 > 0.99
  auto preds2 = confidence_threshold_attack(conf, points, 1.1);
  CHECK_FALSE(preds2[0].member);
}

TEST_CASE("train_shadow_attack: separable features reach shadow accuracy 1.0") {
  std::vector<AttackTrainExample> examples;
  RngStream rng(21, 0);
  for (int i = 0; i < 200; ++i) {
    AttackTrainExample e;
    e.member = i % 2;
    e.task_class = i % 4;
    e.features = {e.member ? rng.uniform(2.0, 3.0) : rng.uniform(-3.0, -2.0),
                  rng.uniform(-1.0, 1.0)};
    examples.push_back(e);
  }
  RngStream train_rng(21, 1);
  AttackClassifier f = train_shadow_attack(examples, AttackMode::kCombined, 4, train_rng);
  std::size_t correct = 0;
  for (const auto& e : examples) {
    double s = f.score(e.features, e.task_class);
    if ((s > 0.5) == (e.member == 1)) ++correct;
  }
  CHECK(correct == examples.size());
}

TEST_CASE("train_shadow_attack: shuffled labels stay near chance") {
  std::vector<AttackTrainExample> examples;
  RngStream rng(22, 0);
  for (int i = 0; i < 400; ++i) {
    AttackTrainExample e;
    e.member = static_cast<int>(rng.uniform_int(2));  // label carries no signal
    e.task_class = 0;
    e.features = {rng.normal(), rng.normal(), rng.normal()};
    examples.push_back(e);
  }
  RngStream train_rng(22, 1);
  AttackClassifier f = train_shadow_attack(examples, AttackMode::kCombined, 1, train_rng);
  std::size_t member_calls = 0;
  std::size_t correct = 0;
  for (const auto& e : examples) {
    bool says_member = f.score(e.features, 0) > 0.5;
    member_calls += says_member;
    if (says_member == (e.member == 1)) ++correct;
  }
  double acc = static_cast<double>(correct) / static_cast<double>(examples.size());
  MESSAGE("shuffled-label shadow accuracy: ", acc);
  CHECK(acc < 0.65);  // in-sample fit on noise stays weak for the tiny net
}

TEST_CASE("train_shadow_attack: sparse classes fall back to the global predictor") {
  std::vector<AttackTrainExample> examples;
  RngStream rng(23, 0);
  for (int i = 0; i < 60; ++i) {
    AttackTrainExample e;
    e.member = i % 2;
    e.task_class = 0;  // class 1 gets only three examples, class 2 none
    e.features = {e.member ? 1.0 : -1.0};
    examples.push_back(e);
  }
  for (int i = 0; i < 3; ++i) {
    AttackTrainExample e;
    e.member = i % 2;
    e.task_class = 1;
    e.features = {e.member ? 1.0 : -1.0};
    examples.push_back(e);
  }
  RngStream train_rng(23, 1);
  AttackClassifier f = train_shadow_attack(examples, AttackMode::kAugmentationBits, 3, train_rng);
  CHECK(f.per_class[0].has_value());
  CHECK_FALSE(f.per_class[1].has_value());
  CHECK_FALSE(f.per_class[2].has_value());
  CHECK(f.global_fallback.has_value());
  CHECK(f.degraded_classes == std::vector<std::size_t>{1, 2});
  // Scoring a degraded class routes through the fallback.
  CHECK(f.score({1.0}, 2) > 0.5);
}

TEST_CASE("train_shadow_attack: coverage errors") {
  RngStream rng(24, 0);
  CHECK_THROWS_AS(train_shadow_attack({}, AttackMode::kConfidence, 2, rng), CoverageError);
  std::vector<AttackTrainExample> one_sided;
  for (int i = 0; i < 20; ++i) one_sided.push_back({{1.0}, 0, 1});
  CHECK_THROWS_AS(train_shadow_attack(one_sided, AttackMode::kConfidence, 1, rng),
                  CoverageError);
}

TEST_CASE("perturbation bits: 1 means correctly labeled, source first") {
  SmallGlyphWorld world(30, 30, 121);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  AugmentationSpec spec;
  spec.kind = AugmentationKind::kTranslation;
  spec.translation_pixels = 1;

  ExampleRecord rec = world.train[0];
  PerturbationBits bits = compute_perturbation_bits(oracle, rec, world.ds.schema, spec);
  REQUIRE(bits.bits.size() == 5);
  bool source_correct = world.model.predicted_label(rec.x) == rec.y_true;
  CHECK(bits.bits[0] == (source_correct ? 1 : 0));
}

TEST_CASE("augmentation_attack: query count is exactly N per point") {
  SmallGlyphWorld world(30, 30, 122);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  AugmentationSpec spec;
  spec.kind = AugmentationKind::kTranslation;
  spec.translation_pixels = 1;

  // Tune on the shadow side of the world (here: the same model is fine for
  // the query-count check).
  std::vector<AttackTrainExample> examples;
  for (const auto& rec : world.train) {
    examples.push_back(
        {compute_perturbation_bits(oracle, rec, world.ds.schema, spec).as_features(),
         rec.y_true, 1});
  }
  for (const auto& rec : world.test) {
    examples.push_back(
        {compute_perturbation_bits(oracle, rec, world.ds.schema, spec).as_features(),
         rec.y_true, 0});
  }
  RngStream rng(25, 0);
  AttackClassifier f = train_shadow_attack(examples, AttackMode::kAugmentationBits, 4, rng);

  auto points = world.balanced_eval();
  std::uint64_t before = conf.counter().total();
  augmentation_attack(oracle, points, world.ds.schema, spec, f);
  CHECK(conf.counter().total() - before == points.size() * 5);  // N = 4d+1 = 5
  CHECK(conf.counter().for_point(points[0].id) == 5);
}

TEST_CASE("augmentation_attack: spec mismatch is a configuration error") {
  SmallGlyphWorld world(20, 10, 123);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  AugmentationSpec d1;
  d1.kind = AugmentationKind::kTranslation;
  d1.translation_pixels = 1;
  AugmentationSpec d2 = d1;
  d2.translation_pixels = 2;

  std::vector<AttackTrainExample> examples;
  for (const auto& rec : world.train) {
    examples.push_back(
        {compute_perturbation_bits(oracle, rec, world.ds.schema, d1).as_features(), rec.y_true,
         1});
  }
  for (const auto& rec : world.test) {
    examples.push_back(
        {compute_perturbation_bits(oracle, rec, world.ds.schema, d1).as_features(), rec.y_true,
         0});
  }
  RngStream rng(26, 0);
  AttackClassifier f = train_shadow_attack(examples, AttackMode::kAugmentationBits, 4, rng);
  CHECK_THROWS_AS(augmentation_attack(oracle, world.balanced_eval(), world.ds.schema, d2, f),
                  ConfigurationError);
  AttackClassifier wrong_mode = f;
  wrong_mode.mode = AttackMode::kConfidence;
  CHECK_THROWS_AS(
      augmentation_attack(oracle, world.balanced_eval(), world.ds.schema, d1, wrong_mode),
      ConfigurationError);
}

TEST_CASE("boundary and noise attacks: misclassified points are never members") {
  SmallGlyphWorld world(40, 30, 124);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  auto points = world.balanced_eval();

  HsjaConfig cfg;
  cfg.query_budget = 250;
  RngStream r1(6, 6);
  auto bpreds = boundary_distance_attack(oracle, points, world.box, cfg, 0.0, r1);
  NoiseRobustnessConfig ncfg;
  ncfg.kind = NoiseRobustnessConfig::Kind::kGaussian;
  ncfg.sigma = 0.2;
  ncfg.num_queries = 30;
  RngStream r2(6, 7);
  auto npreds = noise_attack(oracle, points, world.ds.schema, ncfg, 0.0, r2);

  for (std::size_t i = 0; i < points.size(); ++i) {
    bool correct = world.model.predicted_label(points[i].x) == points[i].y_true;
    if (!correct) {
      CHECK(bpreds[i].score == 0.0);
      CHECK_FALSE(bpreds[i].member);  // 0 > tau fails for every tau >= 0
      CHECK(npreds[i].score == 0.0);
      CHECK_FALSE(npreds[i].member);
    }
  }
}

TEST_CASE("label-only attacks are invariant under confidence defenses") {
  SmallGlyphWorld world(30, 30, 125);
  auto points = world.balanced_eval();

  AugmentationSpec spec;
  spec.kind = AugmentationKind::kTranslation;
  spec.translation_pixels = 1;
  std::vector<AttackTrainExample> examples;
  {
    ConfidenceOracle conf(world.model);
    LabelOracle oracle(conf);
    for (const auto& rec : world.train) {
      examples.push_back(
          {compute_perturbation_bits(oracle, rec, world.ds.schema, spec).as_features(),
           rec.y_true, 1});
    }
    for (const auto& rec : world.test) {
      examples.push_back(
          {compute_perturbation_bits(oracle, rec, world.ds.schema, spec).as_features(),
           rec.y_true, 0});
    }
  }
  RngStream rng(27, 0);
  AttackClassifier f = train_shadow_attack(examples, AttackMode::kAugmentationBits, 4, rng);

  HsjaConfig hs;
  hs.query_budget = 250;
  NoiseRobustnessConfig ncfg;
  ncfg.kind = NoiseRobustnessConfig::Kind::kGaussian;
  ncfg.sigma = 0.15;
  ncfg.num_queries = 25;

  struct Run {
    std::vector<MembershipPrediction> gap, aug, boundary, noise;
  };
  auto run_all = [&](const ConfidenceOracle& base) {
    LabelOracle oracle(base);
    Run r;
    r.gap = gap_attack(oracle, points);
    r.aug = augmentation_attack(oracle, points, world.ds.schema, spec, f);
    RngStream rb(9, 1);
    r.boundary = boundary_distance_attack(oracle, points, world.box, hs, 0.2, rb);
    RngStream rn(9, 2);
    r.noise = noise_attack(oracle, points, world.ds.schema, ncfg, 0.6, rn);
    return r;
  };

  ConfidenceOracle raw(world.model);
  Run undefended = run_all(raw);
  std::vector<ConfidenceOracle> defended = {wrap_memguard(raw), wrap_topk(raw, 1),
                                            wrap_round(raw, 0)};
  for (const auto& oracle : defended) {
    Run r = run_all(oracle);
    for (std::size_t i = 0; i < points.size(); ++i) {
      CHECK(r.gap[i].member == undefended.gap[i].member);
      CHECK(r.aug[i].member == undefended.aug[i].member);
      CHECK(r.aug[i].score == undefended.aug[i].score);
      CHECK(r.boundary[i].member == undefended.boundary[i].member);
      CHECK(r.boundary[i].score == undefended.boundary[i].score);
      CHECK(r.noise[i].member == undefended.noise[i].member);
      CHECK(r.noise[i].score == undefended.noise[i].score);
    }
  }
}

TEST_CASE("combined_attack: degenerate classifier reduces to the boundary rule") {
  SmallGlyphWorld world(24, 25, 126);
  ConfidenceOracle conf(world.model);
  LabelOracle oracle(conf);
  auto points = world.balanced_eval();

  AugmentationSpec spec;
  spec.kind = AugmentationKind::kRotation;
  spec.rotation_degrees = 8.0;
  HsjaConfig hs;
  hs.query_budget = 250;

  // Hand-built f: logistic on feature 0 only, threshold tau.
  double tau = 0.25, sharpness = 200.0;
  AttackClassifier f;
  f.mode = AttackMode::kCombined;
  f.num_task_classes = 4;
  f.feature_dim = spec.query_count();
  f.per_class.resize(4);
  {
    Architecture arch = Architecture::logistic(3, 2);
    DenseLayer d;
    d.weights = Matrix(2, 3);
    d.weights.at(1, 0) = sharpness;
    d.bias = {0.0, -sharpness * tau};
    std::vector<Layer> layers;
    layers.push_back(std::move(d));
    f.global_fallback = Classifier(arch, std::move(layers));
  }

  RngStream rc(12, 0);
  auto combined = combined_attack(oracle, points, world.ds.schema, spec, world.box, hs, f, rc);

  // Recompute the source distance with the stream layout the combined attack
  // uses and apply the threshold by hand.
  RngStream rebuild(12, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    RngStream sub = rebuild.split(points[i].id);
    Vec features = combined_feature_vector(oracle, points[i], world.ds.schema, spec, world.box,
                                           hs, sub);
    CHECK(combined[i].member == (features[0] > tau));
  }
}

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

#include <thread>

#include <doctest.h>

#include "miaudit/errors.hpp"
#include "miaudit/model.hpp"
#include "miaudit/oracle.hpp"
#include "miaudit/synthetic.hpp"

using namespace miaudit;

namespace {

// Small trained model shared by the wrapper tests.
Classifier trained_model(std::size_t classes = 4, std::uint64_t seed = 91) {
  BlobsParams p;
  p.num_classes = classes;
  p.dim = 6;
  p.count = 120;
  RngStream drng(seed, 0);
  Dataset ds = make_blobs(p, drng);
  Architecture arch = Architecture::mlp(6, {16}, Activation::kTanh, classes);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.learning_rate = 0.1;
  cfg.seed = seed;
  RngStream rng(seed, 1);
  return train_classifier(arch, ds.schema, ds.records, cfg, rng);
}

Vec random_point(RngStream& rng, std::size_t dim) {
  Vec x(dim);
  for (double& v : x) v = rng.uniform(-4.0, 4.0);
  return x;
}

}  // namespace

TEST_CASE("confidence_query: matches predict_confidences and counts") {
  Classifier m = trained_model();
  ConfidenceOracle oracle(m);
  RngStream rng(1, 0);
  Vec x = random_point(rng, 6);
  ConfidenceVector direct = m.confidences(x);
  ConfidenceVector via = oracle.query(x);
  CHECK(via.scores == direct.scores);
  oracle.query(x);
  CHECK(oracle.counter().total() == 2);
}

TEST_CASE("label_query equals argmax of confidence_query and counts once") {
  Classifier m = trained_model();
  ConfidenceOracle conf(m);
  LabelOracle labels(conf);
  RngStream rng(2, 0);
  for (int i = 0; i < 20; ++i) {
    Vec x = random_point(rng, 6);
    std::size_t label = labels.query(x);
    ConfidenceVector c = conf.query(x);
    CHECK(label == argmax_label(c));
  }
  CHECK(labels.counter().total() == 40);  // both interfaces share the counter
}

TEST_CASE("memguard: canonical vector formula") {
  // K=10, predicted class 3: 0.11 at index 3, (1-0.11)/9 elsewhere.
  ConfidenceVector raw;
  raw.scores.assign(10, 0.05);
  raw.scores[3] = 0.55;
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kMemguard;
  ConfidenceVector out = apply_defense(raw, spec);
  CHECK(out.scores[3] == doctest::Approx(0.11).epsilon(1e-12));
  for (std::size_t i = 0; i < 10; ++i) {
    if (i != 3) CHECK(out.scores[i] == doctest::Approx(0.0988888888888889).epsilon(1e-12));
  }
  double sum = 0.0;
  for (double s : out.scores) sum += s;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  out.validate();
}

TEST_CASE("memguard: argmax preserved, vector changed, labels unchanged") {
  Classifier m = trained_model();
  ConfidenceOracle raw(m);
  ConfidenceOracle guarded = wrap_memguard(raw);
  LabelOracle raw_labels(raw);
  LabelOracle guarded_labels(guarded);
  RngStream rng(3, 0);
  for (int i = 0; i < 50; ++i) {
    Vec x = random_point(rng, 6);
    ConfidenceVector a = raw.query(x);
    ConfidenceVector b = guarded.query(x);
    CHECK(argmax_label(a) == argmax_label(b));
    CHECK(a.scores != b.scores);
    CHECK(raw_labels.query(x) == guarded_labels.query(x));
  }
}

TEST_CASE("top-k: zeroes the tail without renormalizing") {
  ConfidenceVector raw{{0.6, 0.3, 0.1}};
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kTopK;
  spec.k = 1;
  ConfidenceVector out = apply_defense(raw, spec);
  CHECK(out.scores == Vec{0.6, 0.0, 0.0});

  spec.k = 3;  // k = K is the identity
  CHECK(apply_defense(raw, spec).scores == raw.scores);
}

TEST_CASE("round: digits=0 turns a strict-argmax vector into one-hot") {
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kRound;
  spec.digits = 0;

  ConfidenceVector big{{0.6, 0.3, 0.1}};
  CHECK(apply_defense(big, spec).scores == Vec{1.0, 0.0, 0.0});

  // Max below 0.5 still becomes one-hot through the argmax repair.
  ConfidenceVector small{{0.4, 0.35, 0.25}};
  CHECK(apply_defense(small, spec).scores == Vec{1.0, 0.0, 0.0});
}

TEST_CASE("round: truncates to the requested precision") {
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kRound;
  spec.digits = 1;
  ConfidenceVector raw{{0.58, 0.31, 0.11}};
  ConfidenceVector out = apply_defense(raw, spec);
  CHECK(out.scores[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(out.scores[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(out.scores[2] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("all wrappers preserve argmax on randomized batches") {
  Classifier m = trained_model(6, 97);
  ConfidenceOracle raw(m);
  std::vector<ConfidenceOracle> defended;
  defended.push_back(wrap_memguard(raw));
  defended.push_back(wrap_topk(raw, 1));
  defended.push_back(wrap_topk(raw, 3));
  defended.push_back(wrap_round(raw, 0));
  defended.push_back(wrap_round(raw, 1));
  defended.push_back(wrap_round(raw, 3));

  RngStream rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    Vec x = random_point(rng, 6);
    std::size_t truth = argmax_label(raw.query(x));
    for (auto& oracle : defended) {
      // Defended vectors may not sum to 1 (top-k does not renormalize), so
      // compare raw argmax rather than validating.
      CHECK(argmax_index(oracle.query(x).scores) == truth);
    }
  }
}

TEST_CASE("wrapper constructors validate their parameters") {
  Classifier m = trained_model();
  ConfidenceOracle raw(m);
  CHECK_THROWS_AS(wrap_topk(raw, 0), InvalidInputError);
  CHECK_THROWS_AS(wrap_topk(raw, 5), InvalidInputError);  // K = 4
  CHECK_THROWS_AS(wrap_round(raw, -1), InvalidInputError);
}

TEST_CASE("query counter: per-point accounting sums to the total") {
  Classifier m = trained_model();
  ConfidenceOracle conf(m);
  LabelOracle labels(conf);
  RngStream rng(6, 0);
  Vec x = random_point(rng, 6);
  labels.query(x, 0);
  labels.query(x, 0);
  labels.query(x, 2);
  labels.query(x);  // untagged
  CHECK(conf.counter().total() == 4);
  CHECK(conf.counter().for_point(0) == 2);
  CHECK(conf.counter().for_point(1) == 0);
  CHECK(conf.counter().for_point(2) == 1);
  CHECK(conf.counter().untagged() == 1);
  CHECK(conf.counter().sum_of_parts() == conf.counter().total());
}

TEST_CASE("query counter is safe under concurrent increments") {
  Classifier m = trained_model();
  ConfidenceOracle conf(m);
  RngStream rng(7, 0);
  Vec x = random_point(rng, 6);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 250; ++i) conf.query(x, t);
    });
  }
  for (auto& th : threads) th.join();
  CHECK(conf.counter().total() == 1000);
  CHECK(conf.counter().sum_of_parts() == 1000);
  for (int t = 0; t < 4; ++t) CHECK(conf.counter().for_point(t) == 250);
}

TEST_CASE("fresh point ids are tracked on first use") {
  Classifier m = trained_model();
  ConfidenceOracle conf(m);
  RngStream rng(8, 0);
  Vec x = random_point(rng, 6);
  CHECK(conf.counter().for_point(5) == 0);
  conf.query(x, 5);
  CHECK(conf.counter().for_point(5) == 1);
}

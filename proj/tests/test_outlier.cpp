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

#include "miaudit/errors.hpp"
#include "miaudit/outlier.hpp"

using namespace miaudit;

namespace {

// Independent quadratic-scan oracle: counts neighbors with the public
// cosine_distance, no shared code with find_outliers' normalized fast path.
std::unordered_set<std::uint64_t> brute_outliers(const std::vector<FeatureEmbedding>& embs,
                                                 double delta, std::size_t gamma) {
  std::unordered_set<std::uint64_t> out;
  for (std::size_t i = 0; i < embs.size(); ++i) {
    std::size_t neighbors = 0;
    for (std::size_t j = 0; j < embs.size(); ++j) {
      if (i == j) continue;
      if (cosine_distance(embs[i].z, embs[j].z) <= delta) ++neighbors;
    }
    if (neighbors < gamma) out.insert(embs[i].point_id);
  }
  return out;
}

std::vector<FeatureEmbedding> random_embeddings(std::size_t n, std::size_t dim,
                                                std::uint64_t seed, std::size_t clusters = 5) {
  RngStream rng(seed, 0);
  std::vector<Vec> centers(clusters, Vec(dim));
  for (auto& c : centers) {
    for (double& v : c) v = rng.normal(0.0, 2.0);
  }
  std::vector<FeatureEmbedding> embs(n);
  for (std::size_t i = 0; i < n; ++i) {
    embs[i].point_id = i;
    embs[i].z.resize(dim);
    const Vec& c = centers[i % clusters];
    for (std::size_t d = 0; d < dim; ++d) embs[i].z[d] = c[d] + rng.normal(0.0, 0.4);
  }
  return embs;
}

}  // namespace

TEST_CASE("cosine_distance: identical, orthogonal, opposite") {
  CHECK(cosine_distance({1.0, 2.0}, {2.0, 4.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_distance({1.0, 0.0}, {0.0, 3.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_distance({1.0, 1.0}, {-2.0, -2.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_distance({0.0, 0.0}, {1.0, 0.0}), DegenerateModelError);
}

TEST_CASE("find_outliers: identical points are never outliers") {
  std::vector<FeatureEmbedding> embs(10);
  for (std::size_t i = 0; i < embs.size(); ++i) {
    embs[i].point_id = i;
    embs[i].z = {1.0, 2.0, 3.0};
  }
  for (std::size_t gamma : {1, 3, 9}) {
    OutlierParams params;
    params.delta = 0.01;
    params.gamma = gamma;
    CHECK(find_outliers(embs, params).empty());
  }
}

TEST_CASE("find_outliers: one isolated point among a tight cluster") {
  std::vector<FeatureEmbedding> embs;
  RngStream rng(3, 0);
  for (std::size_t i = 0; i < 20; ++i) {
    FeatureEmbedding e;
    e.point_id = i;
    e.z = {1.0 + rng.normal(0.0, 0.001), 1.0 + rng.normal(0.0, 0.001)};
    embs.push_back(e);
  }
  FeatureEmbedding isolated;
  isolated.point_id = 99;
  isolated.z = {-1.0, 1.0};  // ~90 degrees from the cluster
  embs.push_back(isolated);

  OutlierParams params;
  params.delta = 0.1;
  params.gamma = 1;
  auto out = find_outliers(embs, params);
  REQUIRE(out.size() == 1);
  CHECK(out.count(99) == 1);
}

TEST_CASE("find_outliers: matches the quadratic-scan oracle on random embeddings") {
  auto embs = random_embeddings(150, 8, 17);
  for (double delta : {0.02, 0.1, 0.4}) {
    for (std::size_t gamma : {1, 5, 20}) {
      OutlierParams params;
      params.delta = delta;
      params.gamma = gamma;
      auto fast = find_outliers(embs, params);
      auto brute = brute_outliers(embs, delta, gamma);
      CHECK(fast == brute);
    }
  }
}

TEST_CASE("find_outliers: monotone in delta and gamma") {
  auto embs = random_embeddings(120, 6, 23);
  OutlierParams a;
  a.delta = 0.05;
  a.gamma = 5;
  OutlierParams wider = a;
  wider.delta = 0.3;
  OutlierParams stricter = a;
  stricter.gamma = 15;

  auto base = find_outliers(embs, a);
  auto with_wider = find_outliers(embs, wider);
  auto with_stricter = find_outliers(embs, stricter);

  // Wider neighborhoods only remove outliers; larger gamma only adds them.
  for (std::uint64_t id : with_wider) CHECK(base.count(id) == 1);
  for (std::uint64_t id : base) CHECK(with_stricter.count(id) == 1);
}

TEST_CASE("neighbor relation is symmetric") {
  auto embs = random_embeddings(60, 5, 29);
  for (std::size_t i = 0; i < embs.size(); i += 7) {
    for (std::size_t j = 0; j < embs.size(); j += 5) {
      if (i == j) continue;
      double dij = cosine_distance(embs[i].z, embs[j].z);
      double dji = cosine_distance(embs[j].z, embs[i].z);
      CHECK(dij == doctest::Approx(dji).epsilon(1e-12));
    }
  }
}

TEST_CASE("calibrate_delta: hand geometry on a three-point instance") {
  // Two nearby directions and one isolated: with gamma=1 and beta=1/3, the
  // calibrated delta must fall between the pair distance and the isolated
  // point's distance to either.
  std::vector<FeatureEmbedding> embs(3);
  embs[0].point_id = 0;
  embs[0].z = {1.0, 0.0};
  embs[1].point_id = 1;
  embs[1].z = {1.0, 0.05};  // ~0.0012 cosine distance to embs[0]
  embs[2].point_id = 2;
  embs[2].z = {0.0, 1.0};   // ~1.0 to embs[0], ~0.95 to embs[1]

  double d01 = cosine_distance(embs[0].z, embs[1].z);
  double d02 = cosine_distance(embs[0].z, embs[2].z);
  double d12 = cosine_distance(embs[1].z, embs[2].z);
  double lo = d01, hi = std::min(d02, d12);
  REQUIRE(lo < hi);

  OutlierParams params = calibrate_delta(embs, 1.0 / 3.0, 1);
  CHECK(params.calibration_ok);
  CHECK(params.delta > lo);
  CHECK(params.delta < hi);
  CHECK(params.achieved_fraction == doctest::Approx(1.0 / 3.0));

  auto out = find_outliers(embs, params);
  REQUIRE(out.size() == 1);
  CHECK(out.count(2) == 1);
}

TEST_CASE("calibrate_delta: beta near 1 drives delta toward 0") {
  auto embs = random_embeddings(50, 4, 31);
  OutlierParams params = calibrate_delta(embs, 0.95, 5);
  CHECK(params.delta < 0.05);
  CHECK(params.achieved_fraction >= 0.75);
}

TEST_CASE("calibrate_delta: reproduces the reported fraction exactly") {
  auto embs = random_embeddings(400, 10, 37);
  OutlierParams params = calibrate_delta(embs, 0.05, 4);
  auto out = find_outliers(embs, params);
  double fraction = static_cast<double>(out.size()) / static_cast<double>(embs.size());
  CHECK(fraction == doctest::Approx(params.achieved_fraction).epsilon(1e-12));
  if (params.calibration_ok) {
    CHECK(std::abs(fraction - 0.05) <= 0.25 * 0.05 + 1e-12);
  }
}

TEST_CASE("calibrate_delta: default-run scale lands near the target count") {
  // beta = 2%, gamma = 10 over 2500 embeddings: expect roughly 50 outliers.
  auto embs = random_embeddings(2500, 16, 41, 12);
  OutlierParams params = calibrate_delta(embs, 0.02, 10);
  auto out = find_outliers(embs, params);
  MESSAGE("calibrated outliers: ", out.size(), " (delta=", params.delta, ")");
  CHECK(params.calibration_ok);
  CHECK(out.size() >= 38);  // within +-25% of beta * n = 50
  CHECK(out.size() <= 63);
}

TEST_CASE("outlier_precision: closed cases") {
  std::vector<MembershipPrediction> preds;
  std::vector<bool> truth;
  std::unordered_set<std::uint64_t> outliers = {0, 1, 2, 3};
  // Points 0,1 members predicted member; 2 non-member predicted member;
  // 3 non-member predicted non-member; 4 member predicted member (not outlier).
  preds.push_back({0, true, 1.0});
  truth.push_back(true);
  preds.push_back({1, true, 1.0});
  truth.push_back(true);
  preds.push_back({2, true, 1.0});
  truth.push_back(false);
  preds.push_back({3, false, 0.0});
  truth.push_back(false);
  preds.push_back({4, true, 1.0});
  truth.push_back(true);

  PrecisionResult r = outlier_precision(preds, truth, outliers);
  CHECK(r.defined);
  CHECK(r.true_positives == 2);
  CHECK(r.false_positives == 1);
  CHECK(r.value == doctest::Approx(2.0 / 3.0));

  // Perfect predictions give precision 1.
  std::vector<MembershipPrediction> perfect = {{0, true, 1.0}, {1, true, 1.0}, {2, false, 0.0}};
  std::vector<bool> perfect_truth = {true, true, false};
  PrecisionResult p = outlier_precision(perfect, perfect_truth, {0, 1, 2});
  CHECK(p.value == doctest::Approx(1.0));

  // No member predictions among outliers: undefined sentinel, not an error.
  std::vector<MembershipPrediction> none = {{0, false, 0.0}, {1, false, 0.0}};
  std::vector<bool> none_truth = {true, false};
  PrecisionResult u = outlier_precision(none, none_truth, {0, 1});
  CHECK_FALSE(u.defined);

  CHECK_THROWS_AS(outlier_precision(preds, truth, {}), InvalidInputError);
}

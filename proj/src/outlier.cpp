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

#include "miaudit/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "miaudit/errors.hpp"
#include "miaudit/parallel.hpp"

namespace miaudit {

double cosine_distance(const Vec& a, const Vec& b) {
  double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw DegenerateModelError("cosine distance of a zero vector");
  double c = dot(a, b) / (na * nb);
  c = std::min(std::max(c, -1.0), 1.0);
  return 1.0 - c;
}

namespace {

// Unit-normalized copies so the all-pairs loop is a plain dot product.
std::vector<Vec> normalized(const std::vector<FeatureEmbedding>& embeddings) {
  std::vector<Vec> unit(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    double n = l2_norm(embeddings[i].z);
    if (n == 0.0) throw DegenerateModelError("zero embedding vector");
    unit[i].resize(embeddings[i].z.size());
    for (std::size_t j = 0; j < unit[i].size(); ++j) unit[i][j] = embeddings[i].z[j] / n;
  }
  return unit;
}

std::vector<std::size_t> neighbor_counts(const std::vector<Vec>& unit, double delta) {
  std::vector<std::size_t> counts(unit.size(), 0);
  double cos_threshold = 1.0 - delta;  // d(a,b) <= delta  <=>  cos >= 1 - delta
  parallel_for(unit.size(), [&](std::size_t i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < unit.size(); ++j) {
      if (j == i) continue;
      if (dot(unit[i], unit[j]) >= cos_threshold) ++c;
    }
    counts[i] = c;
  });
  return counts;
}

}  // namespace

std::unordered_set<std::uint64_t> find_outliers(const std::vector<FeatureEmbedding>& embeddings,
                                                const OutlierParams& params) {
  if (embeddings.size() < 2) throw InvalidInputError("find_outliers needs >= 2 embeddings");
  std::vector<std::size_t> counts = neighbor_counts(normalized(embeddings), params.delta);
  std::unordered_set<std::uint64_t> outliers;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (counts[i] < params.gamma) outliers.insert(embeddings[i].point_id);
  }
  return outliers;
}

OutlierParams calibrate_delta(const std::vector<FeatureEmbedding>& embeddings, double beta,
                              std::size_t gamma) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInputError("beta must be in (0,1)");
  if (gamma < 1) throw InvalidInputError("gamma must be >= 1");
  if (embeddings.size() < 2) throw InvalidInputError("calibration needs >= 2 embeddings");

  std::vector<Vec> unit = normalized(embeddings);
  auto fraction_at = [&](double delta) {
    std::vector<std::size_t> counts = neighbor_counts(unit, delta);
    std::size_t n_out = 0;
    for (std::size_t c : counts) {
      if (c < gamma) ++n_out;
    }
    return static_cast<double>(n_out) / static_cast<double>(unit.size());
  };

  OutlierParams best;
  best.gamma = gamma;
  best.beta = beta;
  double lo = 0.0, hi = 2.0;
  double best_err = std::numeric_limits<double>::infinity();
  // The outlier fraction is non-increasing in delta, so bisect.
  for (int iter = 0; iter < 50; ++iter) {
    double mid = 0.5 * (lo + hi);
    double frac = fraction_at(mid);
    if (std::abs(frac - beta) < best_err) {
      best_err = std::abs(frac - beta);
      best.delta = mid;
      best.achieved_fraction = frac;
    }
    if (std::abs(frac - beta) <= 0.25 * beta) {
      best.calibration_ok = true;
      return best;
    }
    if (frac > beta) {
      lo = mid;  // too many outliers: widen the neighborhood
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-9) break;
  }
  best.calibration_ok = best_err <= 0.25 * beta;
  return best;
}

PrecisionResult outlier_precision(const std::vector<MembershipPrediction>& predictions,
                                  const std::vector<bool>& truth_member,
                                  const std::unordered_set<std::uint64_t>& outlier_ids) {
  if (outlier_ids.empty()) throw InvalidInputError("outlier set is empty");
  if (predictions.size() != truth_member.size()) {
    throw InvalidInputError("predictions and truth must align");
  }
  PrecisionResult r;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!outlier_ids.count(predictions[i].point_id)) continue;
    if (!predictions[i].member) continue;
    if (truth_member[i]) {
      ++r.true_positives;
    } else {
      ++r.false_positives;
    }
  }
  std::size_t denom = r.true_positives + r.false_positives;
  if (denom == 0) {
    r.defined = false;
    r.value = 0.0;
  } else {
    r.defined = true;
    r.value = static_cast<double>(r.true_positives) / static_cast<double>(denom);
  }
  return r;
}

}  // namespace miaudit

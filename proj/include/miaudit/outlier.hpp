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

#ifndef MIAUDIT_OUTLIER_HPP
#define MIAUDIT_OUTLIER_HPP

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "miaudit/attacks.hpp"
#include "miaudit/numerics.hpp"

namespace miaudit {

/// Penultimate-layer embedding of one target point under the shadow model.
struct FeatureEmbedding {
  std::uint64_t point_id = 0;
  Vec z;
};

struct OutlierParams {
  double delta = 0.1;      // cosine-distance neighbor radius, in [0, 2]
  std::size_t gamma = 10;  // neighbor-count threshold
  double beta = 0.02;      // intended outlier fraction
  double achieved_fraction = 0.0;
  bool calibration_ok = true;
};

/// 1 - cos(a, b), in [0, 2]. Zero vectors are degenerate.
double cosine_distance(const Vec& a, const Vec& b);

/// Points with fewer than gamma neighbors within cosine distance delta
/// (excluding themselves). Brute-force all-pairs; parallel over rows.
std::unordered_set<std::uint64_t> find_outliers(const std::vector<FeatureEmbedding>& embeddings,
                                                const OutlierParams& params);

/// Fixes gamma and binary-searches delta until the outlier fraction lands
/// within +-0.25*beta of beta or the interval collapses; the latter is
/// reported as a calibration warning with the best delta found.
OutlierParams calibrate_delta(const std::vector<FeatureEmbedding>& embeddings, double beta,
                              std::size_t gamma);

struct PrecisionResult {
  double value = 0.0;
  bool defined = false;  // false when no outlier was predicted member
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

/// Precision restricted to predicted-member outliers. truth_member runs
/// parallel to predictions.
PrecisionResult outlier_precision(const std::vector<MembershipPrediction>& predictions,
                                  const std::vector<bool>& truth_member,
                                  const std::unordered_set<std::uint64_t>& outlier_ids);

}  // namespace miaudit

#endif  // MIAUDIT_OUTLIER_HPP

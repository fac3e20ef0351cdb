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

#ifndef MIAUDIT_BOUNDARY_HPP
#define MIAUDIT_BOUNDARY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "miaudit/data.hpp"
#include "miaudit/numerics.hpp"
#include "miaudit/oracle.hpp"

namespace miaudit {

enum class DistanceMethod { kWalk, kNoiseProxy, kWhiteBox, kAnalytic };

/// A point's estimated L2 distance to the decision boundary.
/// value is 0 exactly when the start point is misclassified; it is +infinity
/// when the walk found no misclassified point to start from (the thresholding
/// attack then treats the point as maximally robust, i.e. a member).
struct DistanceEstimate {
  double value = 0.0;
  DistanceMethod method = DistanceMethod::kWalk;
  std::uint64_t queries_used = 0;
  bool converged = true;

  /// (queries_used, best distance so far) after each walk iteration; the
  /// best-so-far convention makes the series non-increasing in queries.
  std::vector<std::pair<std::uint64_t, double>> trajectory;
};

struct HsjaConfig {
  std::uint64_t query_budget = 2500;
  std::size_t iterations = 0;               // 0 = budget-driven
  std::size_t gradient_samples_initial = 25;  // B0; B_t = B0 * sqrt(t+1)
  double binary_search_tolerance = 1e-3;      // theta, absolute L2 in input units
  std::size_t init_attempts = 100;

  void validate() const;
};

struct NoiseRobustnessConfig {
  enum class Kind { kGaussian, kBernoulli };
  Kind kind = Kind::kGaussian;
  double sigma = 0.1;      // Gaussian
  double flip_prob = 0.05; // Bernoulli
  std::size_t num_queries = 100;
};

/// |w.x + b| / ||w||_2 — exact distance to a linear decision boundary.
DistanceEstimate analytic_linear_distance(const Vec& w, double b, const Vec& x);

/// Label-only boundary walk in the HopSkipJump family: random misclassified
/// initialization, binary-search projection, Monte-Carlo normal estimation
/// with B_t probes, geometric step decay and re-projection. Deterministic
/// given (oracle, x, cfg, rng) and clipped to the feature box throughout.
DistanceEstimate hsja_distance(const LabelOracle& oracle, const Vec& x, std::size_t y_true,
                               const FeatureBox& box, const HsjaConfig& cfg, RngStream& rng,
                               std::int64_t point_id = kUntaggedPoint);

/// Gradient-based upper bound on the boundary distance: iterative margin
/// descent plus a bisection refinement to within 1e-5 of the boundary.
/// Requires direct model access; exact for linear margins.
DistanceEstimate whitebox_distance(const Classifier& model, const Vec& x, std::size_t y_true,
                                   std::size_t steps = 50);

/// Fraction of the perturbed queries keeping the true label; misclassified
/// points short-circuit to 0 after a single query.
double noise_robustness(const LabelOracle& oracle, const Vec& x, std::size_t y_true,
                        const FeatureSchema& schema, const NoiseRobustnessConfig& cfg,
                        RngStream& rng, std::int64_t point_id = kUntaggedPoint);

/// hsja_distance at the source point and at every augmented query, in
/// augmentation_set order.
std::vector<DistanceEstimate> combined_distances(const LabelOracle& oracle,
                                                 const ExampleRecord& x,
                                                 const FeatureSchema& schema,
                                                 const AugmentationSpec& aug,
                                                 const FeatureBox& box, const HsjaConfig& cfg,
                                                 RngStream& rng,
                                                 std::int64_t point_id = kUntaggedPoint);

}  // namespace miaudit

#endif  // MIAUDIT_BOUNDARY_HPP

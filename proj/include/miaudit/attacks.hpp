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

#ifndef MIAUDIT_ATTACKS_HPP
#define MIAUDIT_ATTACKS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "miaudit/boundary.hpp"
#include "miaudit/data.hpp"
#include "miaudit/model.hpp"
#include "miaudit/oracle.hpp"

namespace miaudit {

struct MembershipPrediction {
  std::uint64_t point_id = 0;
  bool member = false;
  double score = 0.0;  // decision statistic; member iff score > tau for threshold attacks
};

/// Attack threshold tau, tuned on shadow data for maximum balanced accuracy.
struct DecisionThreshold {
  double tau = 0.0;
  double shadow_balanced_accuracy = 0.0;
};

/// Per-augmentation correctness indicators, in augmentation_set order.
/// bits[i] = 1 iff query i was labeled y_true.
struct PerturbationBits {
  std::vector<int> bits;

  Vec as_features() const { return Vec(bits.begin(), bits.end()); }
};

enum class AttackMode { kConfidence, kAugmentationBits, kCombined };

/// One labeled shadow observation for attack-classifier training.
struct AttackTrainExample {
  Vec features;
  std::size_t task_class = 0;
  int member = 0;
};

/// Per-class membership predictors (bit-vector inputs use two hidden layers
/// of 10 with leaky ReLU; confidence inputs one hidden layer of 64). Classes
/// with fewer than 10 shadow examples fall back to a single global predictor.
class AttackClassifier {
 public:
  AttackClassifier() = default;

  /// P(member) for a target point of the given task class.
  double score(const Vec& features, std::size_t task_class) const;

  AttackMode mode = AttackMode::kConfidence;
  std::size_t num_task_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<std::optional<Classifier>> per_class;
  std::optional<Classifier> global_fallback;
  std::vector<std::size_t> degraded_classes;  // fell back to the global predictor
  Vec feature_mean, feature_scale;            // standardization (combined mode)

  Vec standardize(const Vec& features) const;
};

// -- Decision rules ------------------------------------------------------------

/// Predicts member iff the model labels the point correctly. On a balanced
/// evaluation set its accuracy is exactly 1/2 + (acc_train - acc_test)/2.
std::vector<MembershipPrediction> gap_attack(const LabelOracle& oracle,
                                             const std::vector<ExampleRecord>& points);

/// Exact balanced-accuracy threshold sweep over the midpoints of the merged
/// sorted scores; ties break toward the smaller tau.
DecisionThreshold tune_threshold(const Vec& member_scores, const Vec& nonmember_scores);

/// Member iff max confidence exceeds tau.
std::vector<MembershipPrediction> confidence_threshold_attack(
    const ConfidenceOracle& oracle, const std::vector<ExampleRecord>& points, double tau);

/// Trains the per-class shadow attack classifier on labeled shadow features.
AttackClassifier train_shadow_attack(const std::vector<AttackTrainExample>& examples,
                                     AttackMode mode, std::size_t num_task_classes,
                                     RngStream& rng);

PerturbationBits compute_perturbation_bits(const LabelOracle& oracle, const ExampleRecord& x,
                                           const FeatureSchema& schema,
                                           const AugmentationSpec& spec,
                                           std::int64_t point_id = kUntaggedPoint);

/// Label-only attack over augmentation bit-vectors.
std::vector<MembershipPrediction> augmentation_attack(const LabelOracle& oracle,
                                                      const std::vector<ExampleRecord>& points,
                                                      const FeatureSchema& schema,
                                                      const AugmentationSpec& spec,
                                                      const AttackClassifier& f);

/// Member iff the walked boundary distance exceeds tau. Misclassified points
/// (distance 0) are non-members for every tau >= 0; failed walk
/// initializations (+infinity) are members for every tau.
std::vector<MembershipPrediction> boundary_distance_attack(
    const LabelOracle& oracle, const std::vector<ExampleRecord>& points, const FeatureBox& box,
    const HsjaConfig& cfg, double tau, RngStream& rng);

/// Member iff the noise-robustness score exceeds tau.
std::vector<MembershipPrediction> noise_attack(const LabelOracle& oracle,
                                               const std::vector<ExampleRecord>& points,
                                               const FeatureSchema& schema,
                                               const NoiseRobustnessConfig& cfg, double tau,
                                               RngStream& rng);

/// Boundary distances at the source point and its augmentations, fed to the
/// per-class combined classifier. Infinite (failed-init) distances are
/// capped at the feature-box diameter before standardization.
std::vector<MembershipPrediction> combined_attack(const LabelOracle& oracle,
                                                  const std::vector<ExampleRecord>& points,
                                                  const FeatureSchema& schema,
                                                  const AugmentationSpec& aug,
                                                  const FeatureBox& box, const HsjaConfig& cfg,
                                                  const AttackClassifier& f, RngStream& rng);

/// Distance feature vector used by the combined attack (shared between
/// shadow tuning and target evaluation).
Vec combined_feature_vector(const LabelOracle& oracle, const ExampleRecord& x,
                            const FeatureSchema& schema, const AugmentationSpec& aug,
                            const FeatureBox& box, const HsjaConfig& cfg, RngStream& rng,
                            std::int64_t point_id = kUntaggedPoint);

}  // namespace miaudit

#endif  // MIAUDIT_ATTACKS_HPP

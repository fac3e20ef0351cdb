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

#include "miaudit/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "miaudit/errors.hpp"
#include "miaudit/parallel.hpp"

namespace miaudit {

namespace {

constexpr std::size_t kPerClassMinimum = 10;

// Shadow attack predictors are tiny nets; these hyperparameters are fixed
// across every attack so runs stay reproducible from the experiment seed.
TrainConfig attack_net_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 120;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.08;
  cfg.seed = seed;
  return cfg;
}

Architecture attack_net_architecture(AttackMode mode, std::size_t feature_dim) {
  if (mode == AttackMode::kConfidence) {
    return Architecture::mlp(feature_dim, {64}, Activation::kRelu, 2);
  }
  // Bit vectors and combined distance vectors share the small leaky-ReLU net.
  return Architecture::mlp(feature_dim, {10, 10}, Activation::kLeakyRelu, 2);
}

Classifier train_attack_net(const std::vector<const AttackTrainExample*>& subset,
                            AttackMode mode, RngStream& rng) {
  std::vector<ExampleRecord> records;
  records.reserve(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    ExampleRecord rec;
    rec.id = i;
    rec.x = subset[i]->features;
    rec.y_true = subset[i]->member ? 1 : 0;
    records.push_back(std::move(rec));
  }
  FeatureSchema schema;
  schema.num_classes = 2;
  schema.feature_kinds.assign(records.front().x.size(), FeatureKind::kContinuous);
  Architecture arch = attack_net_architecture(mode, records.front().x.size());
  RngStream net_rng = rng.split(0xa77ac);
  return train_classifier(arch, schema, records, attack_net_config(rng.seed()), net_rng);
}

}  // namespace

Vec AttackClassifier::standardize(const Vec& features) const {
  if (feature_mean.empty()) return features;
  Vec out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out[i] = (features[i] - feature_mean[i]) / feature_scale[i];
  }
  return out;
}

double AttackClassifier::score(const Vec& features, std::size_t task_class) const {
  const Classifier* net = nullptr;
  if (task_class < per_class.size() && per_class[task_class].has_value()) {
    net = &*per_class[task_class];
  } else if (global_fallback.has_value()) {
    net = &*global_fallback;
  } else {
    throw CoverageError("no attack predictor covers task class " + std::to_string(task_class));
  }
  return net->confidences(standardize(features)).scores[1];
}

std::vector<MembershipPrediction> gap_attack(const LabelOracle& oracle,
                                             const std::vector<ExampleRecord>& points) {
  std::vector<MembershipPrediction> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool correct = oracle.query(points[i].x, static_cast<std::int64_t>(points[i].id)) ==
                   points[i].y_true;
    out[i] = MembershipPrediction{points[i].id, correct, correct ? 1.0 : 0.0};
  }
  return out;
}

DecisionThreshold tune_threshold(const Vec& member_scores, const Vec& nonmember_scores) {
  if (member_scores.empty() || nonmember_scores.empty()) {
    throw InvalidInputError("tune_threshold needs nonempty score lists");
  }
  // Sort each side once; sweep candidate taus from low to high, tracking how
  // many scores sit above the candidate on each side.
  Vec members = member_scores;
  Vec nonmembers = nonmember_scores;
  std::sort(members.begin(), members.end());
  std::sort(nonmembers.begin(), nonmembers.end());

  Vec merged;
  merged.reserve(members.size() + nonmembers.size());
  merged.insert(merged.end(), members.begin(), members.end());
  merged.insert(merged.end(), nonmembers.begin(), nonmembers.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  // Candidates: one below every score, the midpoints, one above.
  Vec candidates;
  candidates.push_back(merged.front() - 1.0);
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    candidates.push_back(0.5 * (merged[i] + merged[i + 1]));
  }
  candidates.push_back(merged.back() + 1.0);

  auto above = [](const Vec& sorted, double tau) {
    return static_cast<double>(sorted.end() -
                               std::upper_bound(sorted.begin(), sorted.end(), tau));
  };
  DecisionThreshold best;
  best.tau = candidates.front();
  best.shadow_balanced_accuracy = -1.0;
  for (double tau : candidates) {
    double tpr = above(members, tau) / static_cast<double>(members.size());
    double fpr = above(nonmembers, tau) / static_cast<double>(nonmembers.size());
    double balanced = 0.5 * (tpr + (1.0 - fpr));
    if (balanced > best.shadow_balanced_accuracy) {  // strict: ties keep the smaller tau
      best.shadow_balanced_accuracy = balanced;
      best.tau = tau;
    }
  }
  return best;
}

std::vector<MembershipPrediction> confidence_threshold_attack(
    const ConfidenceOracle& oracle, const std::vector<ExampleRecord>& points, double tau) {
  std::vector<MembershipPrediction> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    ConfidenceVector conf = oracle.query(points[i].x, static_cast<std::int64_t>(points[i].id));
    double top = *std::max_element(conf.scores.begin(), conf.scores.end());
    out[i] = MembershipPrediction{points[i].id, top > tau, top};
  }
  return out;
}

AttackClassifier train_shadow_attack(const std::vector<AttackTrainExample>& examples,
                                     AttackMode mode, std::size_t num_task_classes,
                                     RngStream& rng) {
  if (examples.empty()) throw CoverageError("no shadow examples to train on");
  bool any_member = false, any_nonmember = false;
  for (const auto& e : examples) {
    (e.member ? any_member : any_nonmember) = true;
  }
  if (!any_member || !any_nonmember) {
    throw CoverageError("shadow examples must include members and non-members");
  }

  AttackClassifier f;
  f.mode = mode;
  f.num_task_classes = num_task_classes;
  f.feature_dim = examples.front().features.size();
  f.per_class.resize(num_task_classes);

  if (mode == AttackMode::kCombined) {
    // Standardize distance features with shadow statistics.
    std::size_t dim = examples.front().features.size();
    f.feature_mean.assign(dim, 0.0);
    f.feature_scale.assign(dim, 0.0);
    for (const auto& e : examples) {
      for (std::size_t i = 0; i < dim; ++i) f.feature_mean[i] += e.features[i];
    }
    for (double& m : f.feature_mean) m /= static_cast<double>(examples.size());
    for (const auto& e : examples) {
      for (std::size_t i = 0; i < dim; ++i) {
        double d = e.features[i] - f.feature_mean[i];
        f.feature_scale[i] += d * d;
      }
    }
    for (double& s : f.feature_scale) {
      s = std::sqrt(s / static_cast<double>(examples.size()));
      if (s < 1e-12) s = 1.0;
    }
  }

  std::vector<AttackTrainExample> standardized;
  const std::vector<AttackTrainExample>* source = &examples;
  if (!f.feature_mean.empty()) {
    standardized = examples;
    for (auto& e : standardized) e.features = f.standardize(e.features);
    source = &standardized;
  }

  std::vector<std::vector<const AttackTrainExample*>> by_class(num_task_classes);
  std::vector<const AttackTrainExample*> all;
  for (const auto& e : *source) {
    if (e.task_class >= num_task_classes) throw InvalidInputError("task class out of range");
    by_class[e.task_class].push_back(&e);
    all.push_back(&e);
  }

  bool need_fallback = false;
  for (std::size_t c = 0; c < num_task_classes; ++c) {
    if (by_class[c].size() < kPerClassMinimum) {
      need_fallback = true;
      f.degraded_classes.push_back(c);
      continue;
    }
    RngStream cls_rng = rng.split(0xc1a550 + c);
    f.per_class[c] = train_attack_net(by_class[c], mode, cls_rng);
  }
  if (need_fallback) {
    RngStream fb_rng = rng.split(0xfa11);
    f.global_fallback = train_attack_net(all, mode, fb_rng);
  }
  return f;
}

PerturbationBits compute_perturbation_bits(const LabelOracle& oracle, const ExampleRecord& x,
                                           const FeatureSchema& schema,
                                           const AugmentationSpec& spec,
                                           std::int64_t point_id) {
  PerturbationBits bits;
  for (const Vec& q : augmentation_set(x, schema, spec)) {
    bits.bits.push_back(oracle.query(q, point_id) == x.y_true ? 1 : 0);
  }
  return bits;
}

std::vector<MembershipPrediction> augmentation_attack(const LabelOracle& oracle,
                                                      const std::vector<ExampleRecord>& points,
                                                      const FeatureSchema& schema,
                                                      const AugmentationSpec& spec,
                                                      const AttackClassifier& f) {
  if (f.mode != AttackMode::kAugmentationBits) {
    throw ConfigurationError("augmentation attack needs a bit-vector classifier");
  }
  spec.validate();
  if (f.feature_dim != spec.query_count()) {
    throw ConfigurationError("attack classifier was tuned on a different augmentation spec");
  }
  std::vector<MembershipPrediction> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    PerturbationBits bits = compute_perturbation_bits(oracle, points[i], schema, spec,
                                                      static_cast<std::int64_t>(points[i].id));
    double score = f.score(bits.as_features(), points[i].y_true);
    out[i] = MembershipPrediction{points[i].id, score > 0.5, score};
  });
  return out;
}

std::vector<MembershipPrediction> boundary_distance_attack(
    const LabelOracle& oracle, const std::vector<ExampleRecord>& points, const FeatureBox& box,
    const HsjaConfig& cfg, double tau, RngStream& rng) {
  std::vector<MembershipPrediction> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    RngStream sub = rng.split(points[i].id);
    DistanceEstimate est = hsja_distance(oracle, points[i].x, points[i].y_true, box, cfg, sub,
                                         static_cast<std::int64_t>(points[i].id));
    out[i] = MembershipPrediction{points[i].id, est.value > tau, est.value};
  });
  return out;
}

std::vector<MembershipPrediction> noise_attack(const LabelOracle& oracle,
                                               const std::vector<ExampleRecord>& points,
                                               const FeatureSchema& schema,
                                               const NoiseRobustnessConfig& cfg, double tau,
                                               RngStream& rng) {
  std::vector<MembershipPrediction> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    RngStream sub = rng.split(points[i].id);
    double score = noise_robustness(oracle, points[i].x, points[i].y_true, schema, cfg, sub,
                                    static_cast<std::int64_t>(points[i].id));
    out[i] = MembershipPrediction{points[i].id, score > tau, score};
  });
  return out;
}

Vec combined_feature_vector(const LabelOracle& oracle, const ExampleRecord& x,
                            const FeatureSchema& schema, const AugmentationSpec& aug,
                            const FeatureBox& box, const HsjaConfig& cfg, RngStream& rng,
                            std::int64_t point_id) {
  std::vector<DistanceEstimate> estimates =
      combined_distances(oracle, x, schema, aug, box, cfg, rng, point_id);
  Vec features(estimates.size());
  double cap = box.diameter();
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    features[i] = std::isfinite(estimates[i].value) ? estimates[i].value : cap;
  }
  return features;
}

std::vector<MembershipPrediction> combined_attack(const LabelOracle& oracle,
                                                  const std::vector<ExampleRecord>& points,
                                                  const FeatureSchema& schema,
                                                  const AugmentationSpec& aug,
                                                  const FeatureBox& box, const HsjaConfig& cfg,
                                                  const AttackClassifier& f, RngStream& rng) {
  if (f.mode != AttackMode::kCombined) {
    throw ConfigurationError("combined attack needs a combined-mode classifier");
  }
  if (f.feature_dim != aug.query_count()) {
    throw ConfigurationError("combined classifier was tuned on a different augmentation spec");
  }
  std::vector<MembershipPrediction> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    RngStream sub = rng.split(points[i].id);
    Vec features = combined_feature_vector(oracle, points[i], schema, aug, box, cfg, sub,
                                           static_cast<std::int64_t>(points[i].id));
    double score = f.score(features, points[i].y_true);
    out[i] = MembershipPrediction{points[i].id, score > 0.5, score};
  });
  return out;
}

}  // namespace miaudit

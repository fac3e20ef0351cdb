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

#include "miaudit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "miaudit/boundary.hpp"
#include "miaudit/errors.hpp"
#include "miaudit/oracle.hpp"
#include "miaudit/parallel.hpp"
#include "miaudit/synthetic.hpp"

namespace miaudit {

namespace {

using nlohmann::json;

[[noreturn]] void stage_fail(const std::string& stage, const std::string& what) {
  throw ConfigurationError("[stage:" + stage + "] " + what);
}

const json& require(const json& j, const std::string& key, const std::string& stage) {
  if (!j.contains(key)) stage_fail(stage, "missing required key '" + key + "'");
  return j.at(key);
}

// JSON-safe encoding for scores that may be infinite.
json encode_real(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? json("inf") : json("-inf");
}

double decode_real(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw FormatError("bad real encoding: " + s);
  }
  return j.get<double>();
}

struct StageTimer {
  std::map<std::string, double>& sink;
  std::string name;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  ~StageTimer() {
    sink[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// -- config parsing -----------------------------------------------------------

Dataset load_dataset(const json& cfg) {
  const std::string stage = "data";
  std::string kind = require(cfg, "kind", stage).get<std::string>();
  if (kind == "idx") {
    return load_idx_images(require(cfg, "images", stage).get<std::string>(),
                           require(cfg, "labels", stage).get<std::string>());
  }
  if (kind == "csv") {
    TabularSchema ts = load_tabular_schema(require(cfg, "schema", stage).get<std::string>());
    Dataset ds;
    ds.schema = ts.schema;
    ds.records = load_tabular(require(cfg, "path", stage).get<std::string>(), ts);
    return ds;
  }
  std::uint64_t seed = require(cfg, "seed", stage).get<std::uint64_t>();
  RngStream rng(seed, 0xda7a);
  json params = cfg.value("params", json::object());
  if (kind == "blobs") {
    BlobsParams p;
    p.num_classes = params.value("num_classes", p.num_classes);
    p.dim = params.value("dim", p.dim);
    p.count = params.value("count", p.count);
    p.center_scale = params.value("center_scale", p.center_scale);
    p.noise_sigma = params.value("noise_sigma", p.noise_sigma);
    return make_blobs(p, rng);
  }
  if (kind == "glyphs") {
    GlyphsParams p;
    p.num_classes = params.value("num_classes", p.num_classes);
    p.height = params.value("height", p.height);
    p.width = params.value("width", p.width);
    p.count = params.value("count", p.count);
    p.bumps_per_class = params.value("bumps_per_class", p.bumps_per_class);
    p.max_rotation_degrees = params.value("max_rotation_degrees", p.max_rotation_degrees);
    p.max_shift_pixels = params.value("max_shift_pixels", p.max_shift_pixels);
    p.distortion = params.value("distortion", p.distortion);
    p.pixel_noise = params.value("pixel_noise", p.pixel_noise);
    p.bump_width_scale = params.value("bump_width_scale", p.bump_width_scale);
    return make_glyphs(p, rng);
  }
  if (kind == "bitstrings") {
    BitstringsParams p;
    p.num_classes = params.value("num_classes", p.num_classes);
    p.dim = params.value("dim", p.dim);
    p.count = params.value("count", p.count);
    p.template_density = params.value("template_density", p.template_density);
    p.flip_prob = params.value("flip_prob", p.flip_prob);
    return make_bitstrings(p, rng);
  }
  if (kind == "mixed") {
    MixedParams p;
    p.dim_continuous = params.value("dim_continuous", p.dim_continuous);
    p.dim_binary = params.value("dim_binary", p.dim_binary);
    p.count = params.value("count", p.count);
    p.label_noise = params.value("label_noise", p.label_noise);
    return make_mixed(p, rng);
  }
  stage_fail(stage, "unknown dataset kind '" + kind + "'");
}

Architecture parse_architecture(const json& j, const FeatureSchema& schema) {
  const std::string stage = "config";
  std::string kind = require(j, "kind", stage).get<std::string>();
  if (kind == "logistic") {
    return Architecture::logistic(schema.num_features(), schema.num_classes);
  }
  if (kind == "mlp") {
    auto hidden = require(j, "hidden", stage).get<std::vector<std::size_t>>();
    std::string act = j.value("activation", "tanh");
    Activation a = act == "tanh"         ? Activation::kTanh
                   : act == "relu"       ? Activation::kRelu
                   : act == "leaky-relu" ? Activation::kLeakyRelu
                                         : throw ConfigurationError("bad activation " + act);
    return Architecture::mlp(schema.num_features(), hidden, a, schema.num_classes);
  }
  if (kind == "cnn") {
    if (!schema.is_image()) stage_fail(stage, "cnn architecture needs an image dataset");
    return Architecture::cnn(*schema.image_shape, schema.num_classes);
  }
  stage_fail(stage, "unknown architecture kind '" + kind + "'");
}

AugmentationSpec parse_augmentation(const json& j) {
  AugmentationSpec spec;
  std::string kind = require(j, "kind", "config").get<std::string>();
  if (kind == "rotation") {
    spec.kind = AugmentationKind::kRotation;
    spec.rotation_degrees = require(j, "r", "config").get<double>();
  } else if (kind == "translation") {
    spec.kind = AugmentationKind::kTranslation;
    spec.translation_pixels = require(j, "d", "config").get<int>();
  } else {
    stage_fail("config", "unknown augmentation kind '" + kind + "'");
  }
  spec.validate();
  return spec;
}

TrainConfig parse_train_config(const json& j) {
  TrainConfig cfg;
  cfg.epochs = require(j, "epochs", "config").get<std::size_t>();
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = require(j, "learning_rate", "config").get<double>();
  cfg.l1_lambda = j.value("l1_lambda", 0.0);
  cfg.l2_lambda = j.value("l2_lambda", 0.0);
  cfg.dropout_rho = j.value("dropout_rho", 0.0);
  cfg.seed = require(j, "seed", "config").get<std::uint64_t>();
  if (j.contains("augmentation")) cfg.augmentation = parse_augmentation(j.at("augmentation"));
  return cfg;
}

DefenseWrapperSpec parse_defense(const json& j) {
  DefenseWrapperSpec spec;
  std::string kind = j.value("kind", "none");
  if (kind == "none") {
    spec.kind = DefenseKind::kNone;
  } else if (kind == "memguard") {
    spec.kind = DefenseKind::kMemguard;
  } else if (kind == "top_k") {
    spec.kind = DefenseKind::kTopK;
    spec.k = require(j, "k", "config").get<std::size_t>();
  } else if (kind == "round") {
    spec.kind = DefenseKind::kRound;
    spec.digits = require(j, "digits", "config").get<int>();
  } else {
    stage_fail("config", "unknown defense kind '" + kind + "'");
  }
  return spec;
}

HsjaConfig parse_hsja(const json& j) {
  HsjaConfig cfg;
  cfg.query_budget = j.value("budget", cfg.query_budget);
  cfg.gradient_samples_initial = j.value("b0", cfg.gradient_samples_initial);
  cfg.binary_search_tolerance = j.value("theta", cfg.binary_search_tolerance);
  cfg.init_attempts = j.value("init_attempts", cfg.init_attempts);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.validate();
  return cfg;
}

// -- experiment state ----------------------------------------------------------

struct ShadowInstance {
  Classifier model;
  std::vector<ExampleRecord> members;
  std::vector<ExampleRecord> nonmembers;
};

struct ExperimentState {
  Dataset dataset;
  SplitBundle splits;
  std::vector<ExampleRecord> leftovers;  // records outside the four splits
  Classifier target;
  std::vector<ShadowInstance> shadows;
  FeatureBox box;  // adversary's feature box, from the shadow pool
  std::vector<ExampleRecord> eval_points;
  std::vector<bool> truth_member;
};

// Trains one model with whatever optimizer path the config selects; shadow
// models reuse this so they mimic the target's training exactly.
Classifier train_one_model(const json& target_cfg, const FeatureSchema& schema,
                           const std::vector<ExampleRecord>& train_set,
                           const std::vector<ExampleRecord>& defender_nonmembers,
                           const Classifier* transfer_base, std::uint64_t seed_override,
                           bool has_seed_override) {
  TrainConfig cfg = parse_train_config(require(target_cfg, "train", "config"));
  if (has_seed_override) cfg.seed = seed_override;
  RngStream rng(cfg.seed, 0x7a26e7);

  int paths = (target_cfg.contains("dp") ? 1 : 0) + (target_cfg.contains("adv_reg") ? 1 : 0) +
              (target_cfg.contains("transfer") ? 1 : 0);
  if (paths > 1) stage_fail("config", "exactly one optimizer path may be selected");

  Architecture arch = parse_architecture(require(target_cfg, "architecture", "config"), schema);

  if (target_cfg.contains("dp")) {
    const json& dj = target_cfg.at("dp");
    DpConfig dp;
    dp.clip_norm = require(dj, "clip_norm", "config").get<double>();
    dp.noise_multiplier = require(dj, "noise_multiplier", "config").get<double>();
    dp.steps = dj.value("steps", 0);
    return train_dpsgd(arch, schema, train_set, cfg, dp, rng);
  }
  if (target_cfg.contains("adv_reg")) {
    const json& aj = target_cfg.at("adv_reg");
    AdvRegConfig adv;
    adv.warmup_epochs = aj.value("warmup_epochs", adv.warmup_epochs);
    adv.k = aj.value("k", adv.k);
    adv.lambda = require(aj, "lambda", "config").get<double>();
    adv.defender_learning_rate = aj.value("defender_learning_rate", adv.defender_learning_rate);
    if (defender_nonmembers.empty()) {
      stage_fail("train", "adversarial regularization needs leftover records for the defender");
    }
    return train_adv_reg(arch, schema, train_set, train_set, defender_nonmembers, cfg, adv, rng)
        .model;
  }
  if (target_cfg.contains("transfer")) {
    if (!transfer_base) stage_fail("train", "transfer requested but no pretrained base exists");
    const json& tj = target_cfg.at("transfer");
    std::string mode = require(tj, "mode", "config").get<std::string>();
    cfg.fine_tune_mode = mode == "last-layer" ? FineTuneMode::kLastLayer
                         : mode == "full"     ? FineTuneMode::kFull
                                              : throw ConfigurationError("bad transfer mode");
    return fine_tune(*transfer_base, schema, train_set, cfg, rng);
  }
  return train_classifier(arch, schema, train_set, cfg, rng);
}

// -- attack drivers --------------------------------------------------------------

struct TunedAttack {
  std::string name;
  std::string kind;
  json config;
  json tuned;
  // Tuned artifacts (only those relevant to the kind are set).
  double tau = 0.0;
  AttackClassifier classifier;
  AugmentationSpec aug;
  HsjaConfig hsja;
  NoiseRobustnessConfig noise;
};

std::uint64_t hash_attack_classifier(const AttackClassifier& f) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_double = [&h](double d) {
    std::uint64_t v;
    static_assert(sizeof(v) == sizeof(d));
    std::memcpy(&v, &d, sizeof(v));
    h ^= v;
    h *= 1099511628211ULL;
  };
  auto mix_net = [&](const Classifier& net) {
    for (const auto& layer : net.layers()) {
      if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        for (double v : d->weights.entries) mix_double(v);
        for (double v : d->bias) mix_double(v);
      }
    }
  };
  for (const auto& net : f.per_class) {
    if (net) mix_net(*net);
  }
  if (f.global_fallback) mix_net(*f.global_fallback);
  for (double v : f.feature_mean) mix_double(v);
  for (double v : f.feature_scale) mix_double(v);
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Collects (features, class, membership) from every shadow model.
std::vector<AttackTrainExample> shadow_features(
    const ExperimentState& st,
    const std::function<Vec(const ShadowInstance&, const ExampleRecord&, std::size_t)>& extract) {
  std::vector<AttackTrainExample> out;
  for (const auto& shadow : st.shadows) {
    // Two passes: members then non-members, stable order for determinism.
    for (std::size_t i = 0; i < shadow.members.size(); ++i) {
      out.push_back({extract(shadow, shadow.members[i], i), shadow.members[i].y_true, 1});
    }
    for (std::size_t i = 0; i < shadow.nonmembers.size(); ++i) {
      out.push_back({extract(shadow, shadow.nonmembers[i], shadow.members.size() + i),
                     shadow.nonmembers[i].y_true, 0});
    }
  }
  return out;
}

// Distances for threshold tuning, with +inf capped so taus stay finite.
void shadow_distance_scores(const ExperimentState& st, const HsjaConfig& cfg, RngStream& rng,
                            Vec& member_scores, Vec& nonmember_scores) {
  double cap = 2.0 * st.box.diameter();
  for (std::size_t s = 0; s < st.shadows.size(); ++s) {
    const auto& shadow = st.shadows[s];
    ConfidenceOracle conf(shadow.model);
    LabelOracle oracle(conf);
    auto run = [&](const std::vector<ExampleRecord>& recs, Vec& sink, std::uint64_t salt) {
      std::size_t base = sink.size();
      sink.resize(base + recs.size());
      parallel_for(recs.size(), [&](std::size_t i) {
        RngStream sub = rng.split((salt << 32) ^ (s << 24) ^ recs[i].id);
        DistanceEstimate est =
            hsja_distance(oracle, recs[i].x, recs[i].y_true, st.box, cfg, sub);
        sink[base + i] = std::isfinite(est.value) ? est.value : cap;
      });
    };
    run(shadow.members, member_scores, 1);
    run(shadow.nonmembers, nonmember_scores, 2);
  }
}

TunedAttack tune_attack(const ExperimentState& st, const json& attack_cfg, std::size_t index,
                        RngStream& attacks_rng) {
  TunedAttack t;
  t.kind = require(attack_cfg, "kind", "config").get<std::string>();
  t.name = attack_cfg.value("name", t.kind);
  t.config = attack_cfg;
  RngStream rng = attacks_rng.split(0x700e + index);

  const FeatureSchema& schema = st.dataset.schema;
  if (t.kind == "gap") {
    return t;  // nothing to tune
  }
  if (t.kind == "confidence") {
    auto examples = shadow_features(
        st, [&](const ShadowInstance& sh, const ExampleRecord& rec, std::size_t) {
          return sh.model.confidences(rec.x).scores;
        });
    t.classifier =
        train_shadow_attack(examples, AttackMode::kConfidence, schema.num_classes, rng);
    t.tuned["classifier_hash"] = hex64(hash_attack_classifier(t.classifier));
    return t;
  }
  if (t.kind == "confidence_threshold") {
    Vec member_scores, nonmember_scores;
    for (const auto& shadow : st.shadows) {
      for (const auto& rec : shadow.members) {
        const Vec& s = shadow.model.confidences(rec.x).scores;
        member_scores.push_back(*std::max_element(s.begin(), s.end()));
      }
      for (const auto& rec : shadow.nonmembers) {
        const Vec& s = shadow.model.confidences(rec.x).scores;
        nonmember_scores.push_back(*std::max_element(s.begin(), s.end()));
      }
    }
    DecisionThreshold th = tune_threshold(member_scores, nonmember_scores);
    t.tau = th.tau;
    t.tuned["tau"] = th.tau;
    t.tuned["shadow_balanced_accuracy"] = th.shadow_balanced_accuracy;
    return t;
  }
  if (t.kind == "augmentation") {
    t.aug = parse_augmentation(require(attack_cfg, "aug", "config"));
    auto examples = shadow_features(
        st, [&](const ShadowInstance& sh, const ExampleRecord& rec, std::size_t) {
          ConfidenceOracle conf(sh.model);
          LabelOracle oracle(conf);
          return compute_perturbation_bits(oracle, rec, schema, t.aug).as_features();
        });
    t.classifier =
        train_shadow_attack(examples, AttackMode::kAugmentationBits, schema.num_classes, rng);
    t.tuned["classifier_hash"] = hex64(hash_attack_classifier(t.classifier));
    return t;
  }
  if (t.kind == "boundary") {
    t.hsja = parse_hsja(attack_cfg);
    Vec member_scores, nonmember_scores;
    RngStream tune_rng = rng.split(1);
    shadow_distance_scores(st, t.hsja, tune_rng, member_scores, nonmember_scores);
    DecisionThreshold th = tune_threshold(member_scores, nonmember_scores);
    t.tau = th.tau;
    t.tuned["tau"] = th.tau;
    t.tuned["shadow_balanced_accuracy"] = th.shadow_balanced_accuracy;
    return t;
  }
  if (t.kind == "noise") {
    std::string noise_kind = require(attack_cfg, "noise_kind", "config").get<std::string>();
    t.noise.kind = noise_kind == "gaussian"    ? NoiseRobustnessConfig::Kind::kGaussian
                   : noise_kind == "bernoulli" ? NoiseRobustnessConfig::Kind::kBernoulli
                                               : throw ConfigurationError("bad noise kind");
    t.noise.num_queries = require(attack_cfg, "num_queries", "config").get<std::size_t>();
    std::size_t tune_queries = attack_cfg.value("tune_queries", t.noise.num_queries);

    // Logarithmic default grids; configs normally pin their own.
    std::vector<double> grid;
    if (attack_cfg.contains("tune_grid")) {
      grid = attack_cfg.at("tune_grid").get<std::vector<double>>();
    } else if (t.noise.kind == NoiseRobustnessConfig::Kind::kGaussian) {
      grid = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    } else {
      grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3};
    }

    double best_balanced = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      NoiseRobustnessConfig probe = t.noise;
      probe.num_queries = tune_queries;
      if (probe.kind == NoiseRobustnessConfig::Kind::kGaussian) {
        probe.sigma = grid[g];
      } else {
        probe.flip_prob = grid[g];
      }
      Vec member_scores, nonmember_scores;
      for (std::size_t s = 0; s < st.shadows.size(); ++s) {
        const auto& shadow = st.shadows[s];
        ConfidenceOracle conf(shadow.model);
        LabelOracle oracle(conf);
        auto run = [&](const std::vector<ExampleRecord>& recs, Vec& sink, std::uint64_t salt) {
          std::size_t base = sink.size();
          sink.resize(base + recs.size());
          parallel_for(recs.size(), [&](std::size_t i) {
            RngStream sub = rng.split((g << 40) ^ (salt << 32) ^ (s << 24) ^ recs[i].id);
            sink[base + i] =
                noise_robustness(oracle, recs[i].x, recs[i].y_true, schema, probe, sub);
          });
        };
        run(shadow.members, member_scores, 1);
        run(shadow.nonmembers, nonmember_scores, 2);
      }
      DecisionThreshold th = tune_threshold(member_scores, nonmember_scores);
      if (th.shadow_balanced_accuracy > best_balanced) {
        best_balanced = th.shadow_balanced_accuracy;
        t.tau = th.tau;
        if (t.noise.kind == NoiseRobustnessConfig::Kind::kGaussian) {
          t.noise.sigma = grid[g];
        } else {
          t.noise.flip_prob = grid[g];
        }
      }
    }
    t.tuned["tau"] = t.tau;
    t.tuned["shadow_balanced_accuracy"] = best_balanced;
    t.tuned[t.noise.kind == NoiseRobustnessConfig::Kind::kGaussian ? "sigma" : "flip_prob"] =
        t.noise.kind == NoiseRobustnessConfig::Kind::kGaussian ? t.noise.sigma
                                                               : t.noise.flip_prob;
    return t;
  }
  if (t.kind == "combined") {
    t.aug = parse_augmentation(require(attack_cfg, "aug", "config"));
    t.hsja = parse_hsja(attack_cfg);
    RngStream tune_rng = rng.split(2);
    auto examples = shadow_features(
        st, [&](const ShadowInstance& sh, const ExampleRecord& rec, std::size_t ordinal) {
          ConfidenceOracle conf(sh.model);
          LabelOracle oracle(conf);
          RngStream sub = tune_rng.split((static_cast<std::uint64_t>(ordinal) << 20) ^ rec.id);
          return combined_feature_vector(oracle, rec, schema, t.aug, st.box, t.hsja, sub);
        });
    t.classifier = train_shadow_attack(examples, AttackMode::kCombined, schema.num_classes, rng);
    t.tuned["classifier_hash"] = hex64(hash_attack_classifier(t.classifier));
    return t;
  }
  stage_fail("config", "unknown attack kind '" + t.kind + "'");
}

std::vector<MembershipPrediction> evaluate_attack(const ExperimentState& st,
                                                  const TunedAttack& t,
                                                  const ConfidenceOracle& defended_conf,
                                                  const LabelOracle& defended_label,
                                                  RngStream& attacks_rng, std::size_t index) {
  RngStream rng = attacks_rng.split(0xeba1 + index);
  const FeatureSchema& schema = st.dataset.schema;
  if (t.kind == "gap") {
    return gap_attack(defended_label, st.eval_points);
  }
  if (t.kind == "confidence") {
    std::vector<MembershipPrediction> out(st.eval_points.size());
    for (std::size_t i = 0; i < st.eval_points.size(); ++i) {
      const auto& rec = st.eval_points[i];
      ConfidenceVector conf = defended_conf.query(rec.x, static_cast<std::int64_t>(rec.id));
      double score = t.classifier.score(conf.scores, rec.y_true);
      out[i] = MembershipPrediction{rec.id, score > 0.5, score};
    }
    return out;
  }
  if (t.kind == "confidence_threshold") {
    return confidence_threshold_attack(defended_conf, st.eval_points, t.tau);
  }
  if (t.kind == "augmentation") {
    return augmentation_attack(defended_label, st.eval_points, schema, t.aug, t.classifier);
  }
  if (t.kind == "boundary") {
    return boundary_distance_attack(defended_label, st.eval_points, st.box, t.hsja, t.tau, rng);
  }
  if (t.kind == "noise") {
    return noise_attack(defended_label, st.eval_points, schema, t.noise, t.tau, rng);
  }
  if (t.kind == "combined") {
    return combined_attack(defended_label, st.eval_points, schema, t.aug, st.box, t.hsja,
                           t.classifier, rng);
  }
  stage_fail("attack", "unknown attack kind '" + t.kind + "'");
}

}  // namespace

// -- public API -----------------------------------------------------------------

ScoreEntry score(const std::vector<MembershipPrediction>& predictions,
                 const std::vector<bool>& truth_member) {
  if (predictions.size() != truth_member.size() || predictions.empty()) {
    throw InvalidInputError("score needs aligned, nonempty predictions and truth");
  }
  ScoreEntry e;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bool predicted = predictions[i].member;
    bool actual = truth_member[i];
    if (predicted && actual) ++e.true_positives;
    if (predicted && !actual) ++e.false_positives;
    if (!predicted && !actual) ++e.true_negatives;
    if (!predicted && actual) ++e.false_negatives;
  }
  std::size_t members = e.true_positives + e.false_negatives;
  std::size_t nonmembers = e.true_negatives + e.false_positives;
  e.balanced = members == nonmembers;
  double total = static_cast<double>(predictions.size());
  e.accuracy = static_cast<double>(e.true_positives + e.true_negatives) / total;
  std::size_t predicted_members = e.true_positives + e.false_positives;
  e.precision = predicted_members == 0 ? 0.0
                                       : static_cast<double>(e.true_positives) /
                                             static_cast<double>(predicted_members);
  e.recall = members == 0 ? 0.0
                          : static_cast<double>(e.true_positives) / static_cast<double>(members);
  e.f1 = (e.precision + e.recall) == 0.0
             ? 0.0
             : 2.0 * e.precision * e.recall / (e.precision + e.recall);
  return e;
}

const AttackResult* EvaluationReport::find_attack(const std::string& name) const {
  for (const auto& a : attacks) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigurationError("config JSON: " + std::string(e.what()));
  }
  return from_json(std::move(j));
}

ExperimentConfig ExperimentConfig::from_json(json j) {
  ExperimentConfig cfg;
  cfg.raw = std::move(j);
  return cfg;
}

std::string config_hash_hex(const json& config) {
  std::string canon = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return hex64(h);
}

EvaluationReport run_experiment(const ExperimentConfig& cfg) {
  const json& j = cfg.raw;
  EvaluationReport report;
  report.config = j;
  report.config_hash = config_hash_hex(j);

  ExperimentState st;

  {
    StageTimer timer{report.timings, "data"};
    st.dataset = load_dataset(require(j, "dataset", "config"));
    st.dataset.schema.validate();
  }

  {
    StageTimer timer{report.timings, "split"};
    const json& sj = require(j, "split", "config");
    std::size_t n = require(sj, "per_split_size", "config").get<std::size_t>();
    std::uint64_t seed = require(sj, "seed", "config").get<std::uint64_t>();
    RngStream rng(seed, 0x5b11);
    st.splits = split_disjoint(st.dataset.records, n, rng);

    // Leftovers (records outside the four splits) back the defender pool and
    // transfer pretraining. Recover them by id.
    std::vector<bool> used(st.dataset.records.size() + 1, false);
    auto mark = [&](const std::vector<ExampleRecord>& recs) {
      for (const auto& r : recs) used[r.id] = true;
    };
    mark(st.splits.target_train);
    mark(st.splits.target_test);
    mark(st.splits.shadow_train);
    mark(st.splits.shadow_test);
    for (const auto& r : st.dataset.records) {
      if (!used[r.id]) st.leftovers.push_back(r);
    }
  }

  const json& target_cfg = require(j, "target", "config");
  {
    StageTimer timer{report.timings, "train"};

    // Transfer learning pretrains once on a leftover source split; target and
    // shadows fine-tune from the same base.
    Classifier transfer_base;
    bool have_base = false;
    if (target_cfg.contains("transfer")) {
      const json& tj = target_cfg.at("transfer");
      const json& pj = require(tj, "pretrain", "config");
      std::size_t size = require(pj, "size", "config").get<std::size_t>();
      if (st.leftovers.size() < size) stage_fail("train", "not enough leftovers to pretrain on");
      std::vector<ExampleRecord> source(st.leftovers.begin(), st.leftovers.begin() + size);
      TrainConfig pre;
      pre.epochs = require(pj, "epochs", "config").get<std::size_t>();
      pre.learning_rate = require(pj, "learning_rate", "config").get<double>();
      pre.batch_size = pj.value("batch_size", pre.batch_size);
      pre.seed = require(pj, "seed", "config").get<std::uint64_t>();
      RngStream rng(pre.seed, 0x6a5e);
      Architecture arch =
          parse_architecture(require(target_cfg, "architecture", "config"), st.dataset.schema);
      transfer_base = train_classifier(arch, st.dataset.schema, source, pre, rng);
      have_base = true;
    }

    // Defender non-member pools for adversarial regularization.
    std::vector<ExampleRecord> target_defender_pool, shadow_defender_pool;
    if (target_cfg.contains("adv_reg")) {
      std::size_t half = st.leftovers.size() / 2;
      if (half == 0) stage_fail("train", "adversarial regularization needs leftover records");
      target_defender_pool.assign(st.leftovers.begin(), st.leftovers.begin() + half);
      shadow_defender_pool.assign(st.leftovers.begin() + half, st.leftovers.end());
    }

    st.target = train_one_model(target_cfg, st.dataset.schema, st.splits.target_train,
                                target_defender_pool, have_base ? &transfer_base : nullptr, 0,
                                false);
    st.target.acc_train = accuracy(st.target, st.splits.target_train);
    st.target.acc_test = accuracy(st.target, st.splits.target_test);
    report.acc_train = st.target.acc_train;
    report.acc_test = st.target.acc_test;

    const json& shadow_cfg = require(j, "shadow", "config");
    std::size_t shadow_count = shadow_cfg.value("count", 1);
    std::uint64_t shadow_seed = require(shadow_cfg, "seed", "config").get<std::uint64_t>();
    if (shadow_count < 1) stage_fail("config", "need at least one shadow model");

    // The shadow pool is reshuffled per model for counts above one so each
    // shadow still trains on per_split_size records.
    std::vector<ExampleRecord> pool = st.splits.shadow_train;
    pool.insert(pool.end(), st.splits.shadow_test.begin(), st.splits.shadow_test.end());
    std::size_t n = st.splits.shadow_train.size();
    for (std::size_t s = 0; s < shadow_count; ++s) {
      ShadowInstance inst;
      if (s == 0) {
        inst.members = st.splits.shadow_train;
        inst.nonmembers = st.splits.shadow_test;
      } else {
        RngStream shuffle_rng(shadow_seed, 0x5ad0 + s);
        std::vector<ExampleRecord> shuffled = pool;
        shuffle_rng.shuffle(shuffled);
        inst.members.assign(shuffled.begin(), shuffled.begin() + n);
        inst.nonmembers.assign(shuffled.begin() + n, shuffled.end());
      }
      inst.model = train_one_model(target_cfg, st.dataset.schema, inst.members,
                                   shadow_defender_pool, have_base ? &transfer_base : nullptr,
                                   shadow_seed + 0x9e37 * (s + 1), true);
      inst.model.acc_train = accuracy(inst.model, inst.members);
      inst.model.acc_test = accuracy(inst.model, inst.nonmembers);
      st.shadows.push_back(std::move(inst));
    }
    report.shadow_acc_train = st.shadows[0].model.acc_train;
    report.shadow_acc_test = st.shadows[0].model.acc_test;
  }

  // Balanced evaluation set: every target-train record is a member, the
  // equally sized target-test set supplies the non-members.
  st.eval_points = st.splits.target_train;
  st.eval_points.insert(st.eval_points.end(), st.splits.target_test.begin(),
                        st.splits.target_test.end());
  st.truth_member.assign(st.splits.target_train.size(), true);
  st.truth_member.insert(st.truth_member.end(), st.splits.target_test.size(), false);

  {
    std::vector<ExampleRecord> shadow_pool = st.splits.shadow_train;
    shadow_pool.insert(shadow_pool.end(), st.splits.shadow_test.begin(),
                       st.splits.shadow_test.end());
    st.box = feature_box_for(st.dataset.schema, shadow_pool);
  }

  const json& attacks_cfg = require(j, "attacks", "config");
  if (!attacks_cfg.is_array()) stage_fail("config", "attacks must be an array");
  std::uint64_t attacks_seed = require(j, "attacks_seed", "config").get<std::uint64_t>();
  RngStream attacks_rng(attacks_seed, 0xa7ac);

  std::vector<TunedAttack> tuned;
  {
    StageTimer timer{report.timings, "tune"};
    for (std::size_t i = 0; i < attacks_cfg.size(); ++i) {
      tuned.push_back(tune_attack(st, attacks_cfg.at(i), i, attacks_rng));
    }
    // Disambiguate duplicate attack names.
    for (std::size_t i = 0; i < tuned.size(); ++i) {
      for (std::size_t k = 0; k < i; ++k) {
        if (tuned[k].name == tuned[i].name) {
          tuned[i].name += "#" + std::to_string(i);
          break;
        }
      }
    }
  }

  {
    StageTimer timer{report.timings, "evaluate"};
    ConfidenceOracle raw_oracle(st.target);
    ConfidenceOracle defended = raw_oracle.wrapped(parse_defense(j.value("defense", json::object())));
    LabelOracle defended_label(defended);

    for (std::size_t i = 0; i < tuned.size(); ++i) {
      std::uint64_t before = defended.counter().total();
      AttackResult result;
      result.name = tuned[i].name;
      result.kind = tuned[i].kind;
      result.tuned = tuned[i].tuned;
      result.predictions =
          evaluate_attack(st, tuned[i], defended, defended_label, attacks_rng, i);
      result.queries_total = defended.counter().total() - before;
      result.metrics = score(result.predictions, st.truth_member);
      report.attacks.push_back(std::move(result));
    }
  }

  report.models.emplace_back("target", st.target);
  for (std::size_t s = 0; s < st.shadows.size(); ++s) {
    report.models.emplace_back("shadow" + std::to_string(s), st.shadows[s].model);
  }

  if (j.contains("outlier")) {
    StageTimer timer{report.timings, "outlier"};
    const json& oj = j.at("outlier");
    double beta = require(oj, "beta", "config").get<double>();
    std::size_t gamma = require(oj, "gamma", "config").get<std::size_t>();

    // Embeddings come from the adversary's shadow model, keeping the
    // procedure black-box with respect to the target.
    std::vector<FeatureEmbedding> embeddings(st.eval_points.size());
    const Classifier& shadow_model = st.shadows[0].model;
    parallel_for(st.eval_points.size(), [&](std::size_t i) {
      embeddings[i] =
          FeatureEmbedding{st.eval_points[i].id, shadow_model.penultimate(st.eval_points[i].x)};
    });

    OutlierReport rep;
    rep.params = calibrate_delta(embeddings, beta, gamma);
    auto outliers = find_outliers(embeddings, rep.params);
    rep.outlier_ids.assign(outliers.begin(), outliers.end());
    std::sort(rep.outlier_ids.begin(), rep.outlier_ids.end());

    for (const auto& attack : report.attacks) {
      PrecisionResult pr = outlier_precision(attack.predictions, st.truth_member, outliers);
      rep.outlier_precision_by_attack[attack.name] = pr.value;
      rep.outlier_precision_defined[attack.name] = pr.defined;
      rep.full_precision_by_attack[attack.name] = attack.metrics.precision;
    }
    report.outliers = std::move(rep);
  }

  return report;
}

// -- serialization -----------------------------------------------------------------

json report_to_json(const EvaluationReport& report) {
  json j;
  j["format"] = "mi-audit-report";
  j["version"] = 1;
  j["config_hash"] = report.config_hash;
  j["config"] = report.config;
  j["metrics"]["acc_train"] = report.acc_train;
  j["metrics"]["acc_test"] = report.acc_test;
  j["metrics"]["shadow_acc_train"] = report.shadow_acc_train;
  j["metrics"]["shadow_acc_test"] = report.shadow_acc_test;

  json attacks = json::array();
  for (const auto& a : report.attacks) {
    json ja;
    ja["name"] = a.name;
    ja["kind"] = a.kind;
    ja["tuned"] = a.tuned;
    ja["queries_total"] = a.queries_total;
    ja["metrics"] = {{"accuracy", a.metrics.accuracy},   {"precision", a.metrics.precision},
                     {"recall", a.metrics.recall},       {"f1", a.metrics.f1},
                     {"tp", a.metrics.true_positives},   {"fp", a.metrics.false_positives},
                     {"tn", a.metrics.true_negatives},   {"fn", a.metrics.false_negatives},
                     {"balanced", a.metrics.balanced}};
    json preds = json::array();
    for (const auto& p : a.predictions) {
      preds.push_back(json::array({p.point_id, p.member ? 1 : 0, encode_real(p.score)}));
    }
    ja["predictions"] = std::move(preds);
    attacks.push_back(std::move(ja));
  }
  j["attacks"] = std::move(attacks);

  if (report.outliers) {
    const auto& o = *report.outliers;
    json jo;
    jo["delta"] = o.params.delta;
    jo["gamma"] = o.params.gamma;
    jo["beta"] = o.params.beta;
    jo["achieved_fraction"] = o.params.achieved_fraction;
    jo["calibration_ok"] = o.params.calibration_ok;
    jo["outlier_ids"] = o.outlier_ids;
    jo["outlier_precision"] = o.outlier_precision_by_attack;
    jo["outlier_precision_defined"] = o.outlier_precision_defined;
    jo["full_precision"] = o.full_precision_by_attack;
    j["outliers"] = std::move(jo);
  }
  return j;
}

EvaluationReport report_from_json(const json& j) {
  if (j.value("format", "") != "mi-audit-report") throw FormatError("not a report file");
  EvaluationReport report;
  report.config_hash = j.at("config_hash").get<std::string>();
  report.config = j.at("config");
  report.acc_train = j.at("metrics").at("acc_train").get<double>();
  report.acc_test = j.at("metrics").at("acc_test").get<double>();
  report.shadow_acc_train = j.at("metrics").value("shadow_acc_train", 0.0);
  report.shadow_acc_test = j.at("metrics").value("shadow_acc_test", 0.0);
  for (const auto& ja : j.at("attacks")) {
    AttackResult a;
    a.name = ja.at("name").get<std::string>();
    a.kind = ja.at("kind").get<std::string>();
    a.tuned = ja.value("tuned", json::object());
    a.queries_total = ja.at("queries_total").get<std::uint64_t>();
    const auto& m = ja.at("metrics");
    a.metrics.accuracy = m.at("accuracy").get<double>();
    a.metrics.precision = m.at("precision").get<double>();
    a.metrics.recall = m.at("recall").get<double>();
    a.metrics.f1 = m.at("f1").get<double>();
    a.metrics.true_positives = m.at("tp").get<std::size_t>();
    a.metrics.false_positives = m.at("fp").get<std::size_t>();
    a.metrics.true_negatives = m.at("tn").get<std::size_t>();
    a.metrics.false_negatives = m.at("fn").get<std::size_t>();
    a.metrics.balanced = m.at("balanced").get<bool>();
    for (const auto& jp : ja.at("predictions")) {
      MembershipPrediction p;
      p.point_id = jp.at(0).get<std::uint64_t>();
      p.member = jp.at(1).get<int>() == 1;
      p.score = decode_real(jp.at(2));
      a.predictions.push_back(p);
    }
    report.attacks.push_back(std::move(a));
  }
  if (j.contains("outliers")) {
    const auto& jo = j.at("outliers");
    OutlierReport o;
    o.params.delta = jo.at("delta").get<double>();
    o.params.gamma = jo.at("gamma").get<std::size_t>();
    o.params.beta = jo.at("beta").get<double>();
    o.params.achieved_fraction = jo.at("achieved_fraction").get<double>();
    o.params.calibration_ok = jo.at("calibration_ok").get<bool>();
    o.outlier_ids = jo.at("outlier_ids").get<std::vector<std::uint64_t>>();
    o.outlier_precision_by_attack =
        jo.at("outlier_precision").get<std::map<std::string, double>>();
    o.outlier_precision_defined =
        jo.at("outlier_precision_defined").get<std::map<std::string, bool>>();
    o.full_precision_by_attack = jo.at("full_precision").get<std::map<std::string, double>>();
    report.outliers = std::move(o);
  }
  return report;
}

std::string metrics_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "attack,metric,value\n";
  out.precision(17);
  for (const auto& a : report.attacks) {
    out << a.name << ",accuracy," << a.metrics.accuracy << "\n";
    out << a.name << ",precision," << a.metrics.precision << "\n";
    out << a.name << ",recall," << a.metrics.recall << "\n";
    out << a.name << ",f1," << a.metrics.f1 << "\n";
    out << a.name << ",queries_total," << a.queries_total << "\n";
  }
  return out.str();
}

void emit_report(const EvaluationReport& report, const std::string& out_dir,
                 const std::string& format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  auto write_file = [&](const std::string& name, const std::string& body) {
    std::string path = out_dir + "/" + name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
  };

  if (format == "json" || format == "both") {
    write_file("report.json", report_to_json(report).dump(2) + "\n");
  }
  if (format == "csv" || format == "both") {
    write_file("metrics.csv", metrics_csv(report));
  }
  if (!report.models.empty()) {
    std::filesystem::create_directories(out_dir + "/models", ec);
    if (ec) throw IoError("cannot create " + out_dir + "/models: " + ec.message());
    for (const auto& [name, model] : report.models) {
      save_classifier(model, out_dir + "/models/" + name + ".json");
    }
  }
  // Timings live outside report.json so reports stay byte-identical.
  json timings(report.timings);
  write_file("timings.json", timings.dump(2) + "\n");
}

// -- sweeps -------------------------------------------------------------------------

namespace {

void set_json_path(json& root, const std::string& dotted, const json& value) {
  json* cur = &root;
  std::size_t start = 0;
  std::vector<std::string> parts;
  while (start <= dotted.size()) {
    std::size_t dot = dotted.find('.', start);
    if (dot == std::string::npos) {
      parts.push_back(dotted.substr(start));
      break;
    }
    parts.push_back(dotted.substr(start, dot - start));
    start = dot + 1;
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& key = parts[i];
    bool last = i + 1 == parts.size();
    bool is_index = !key.empty() && std::all_of(key.begin(), key.end(), ::isdigit);
    if (is_index) {
      std::size_t idx = std::stoul(key);
      if (!cur->is_array() || idx >= cur->size()) {
        throw ConfigurationError("sweep axis path '" + dotted + "' indexes past the config");
      }
      if (last) {
        (*cur)[idx] = value;
        return;
      }
      cur = &(*cur)[idx];
    } else {
      if (last) {
        (*cur)[key] = value;
        return;
      }
      if (!cur->contains(key)) {
        throw ConfigurationError("sweep axis path '" + dotted + "' names a missing field");
      }
      cur = &(*cur)[key];
    }
  }
}

}  // namespace

SweepResult sweep(const ExperimentConfig& cfg_template, const std::string& axis,
                  const std::vector<json>& values) {
  SweepResult result;
  for (const json& value : values) {
    json one = cfg_template.raw;
    try {
      set_json_path(one, axis, value);
      EvaluationReport report = run_experiment(ExperimentConfig::from_json(one));
      result.runs.emplace_back(value, std::move(report));
    } catch (const std::exception& e) {
      result.failures.emplace_back(value, e.what());
    }
  }
  return result;
}

std::string sweep_csv(const SweepResult& result, const std::string& axis) {
  std::ostringstream out;
  out << "axis,axis_value,attack,metric,value,acc_test\n";
  out.precision(17);
  for (const auto& [value, report] : result.runs) {
    std::string v = value.dump();
    out << axis << "," << v << ",model,acc_train," << report.acc_train << ","
        << report.acc_test << "\n";
    out << axis << "," << v << ",model,acc_test," << report.acc_test << "," << report.acc_test
        << "\n";
    for (const auto& a : report.attacks) {
      out << axis << "," << v << "," << a.name << ",accuracy," << a.metrics.accuracy << ","
          << report.acc_test << "\n";
      out << axis << "," << v << "," << a.name << ",f1," << a.metrics.f1 << ","
          << report.acc_test << "\n";
      out << axis << "," << v << "," << a.name << ",queries_total," << a.queries_total << ","
          << report.acc_test << "\n";
    }
  }
  for (const auto& [value, error] : result.failures) {
    std::string msg = error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << axis << "," << value.dump() << ",error,message," << msg << ",\n";
  }
  return out.str();
}

}  // namespace miaudit

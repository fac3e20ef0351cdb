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

#ifndef MIAUDIT_MODEL_HPP
#define MIAUDIT_MODEL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "miaudit/data.hpp"
#include "miaudit/numerics.hpp"

namespace miaudit {

enum class ModelKind { kLogistic, kMlp, kCnn };
enum class Activation { kTanh, kRelu, kLeakyRelu };

/// Network shape. Logistic has no hidden layers. The CNN is fixed: two
/// 3x3x32 convolutions, a 2x2 max-pool, two 3x3x64 convolutions, then a
/// dense layer of 512, all ReLU.
struct Architecture {
  ModelKind kind = ModelKind::kLogistic;
  std::vector<std::size_t> hidden_sizes;  // MLP only
  Activation activation = Activation::kTanh;
  std::size_t input_dim = 0;
  std::optional<ImageShape> input_shape;  // CNN only
  std::size_t num_classes = 0;

  static Architecture logistic(std::size_t input_dim, std::size_t num_classes);
  static Architecture mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                          Activation act, std::size_t num_classes);
  static Architecture cnn(ImageShape shape, std::size_t num_classes);

  void validate() const;
};

enum class FineTuneMode { kNone, kLastLayer, kFull };

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double l1_lambda = 0.0;
  double l2_lambda = 0.0;
  double dropout_rho = 0.0;  // hidden dense activations, training only
  std::optional<AugmentationSpec> augmentation;
  FineTuneMode fine_tune_mode = FineTuneMode::kNone;
  std::uint64_t seed = 0;
};

/// DP-SGD parameters: per-example gradients are clipped to clip_norm, and
/// Gaussian noise with stddev noise_multiplier*clip_norm is added to each
/// batch's summed clipped gradient before averaging.
struct DpConfig {
  double clip_norm = 2.0;
  double noise_multiplier = 0.5;
  std::size_t steps = 0;  // 0: derive from epochs
};

/// Min-max defense schedule: after warmup_epochs of plain training, each
/// target batch is preceded by k defender steps; the target loss gains
/// lambda times the defender's member score on the batch.
struct AdvRegConfig {
  std::size_t warmup_epochs = 3;
  std::size_t k = 1;
  double lambda = 1.0;
  double defender_learning_rate = 0.5;
  // Defender sizes default to 1/4 of the reference 100/1024/512/64
  // confidence branch, 100/512/64 label branch and 256/64 head.
  std::vector<std::size_t> confidence_branch = {25, 256, 128, 16};
  std::vector<std::size_t> label_branch = {25, 128, 16};
  std::vector<std::size_t> head = {64, 16};
};

// -- Layers ------------------------------------------------------------------

struct DenseLayer {
  Matrix weights;  // out x in
  Vec bias;
};

struct ConvLayer {  // 3x3, stride 1, zero ("same") padding
  std::size_t in_channels = 0, out_channels = 0;
  std::size_t height = 0, width = 0;     // input spatial dims
  Matrix weights;                        // out_channels x (in_channels*9)
  Vec bias;
};

struct PoolLayer {  // 2x2 max, stride 2
  std::size_t channels = 0, height = 0, width = 0;  // input dims
};

struct ActivationLayer {
  Activation act = Activation::kRelu;
  bool dropout_eligible = false;  // hidden dense activations only
};

using Layer = std::variant<DenseLayer, ConvLayer, PoolLayer, ActivationLayer>;

// -- Classifier to hold ----------------------------------------------------------

/// A trained model. Forward passes are deterministic; dropout exists only
/// inside the training loops.
class Classifier {
 public:
  Classifier() = default;
  Classifier(Architecture arch, std::vector<Layer> layers);

  const Architecture& architecture() const { return arch_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Vec logits(const Vec& x) const;
  ConfidenceVector confidences(const Vec& x) const;
  std::size_t predicted_label(const Vec& x) const;

  /// Activations feeding the final dense layer. Logistic models have none.
  Vec penultimate(const Vec& x) const;

  /// Gradient of the margin logit_y - max_{j != y} logit_j with respect to x.
  Vec input_gradient(const Vec& x, std::size_t y) const;

  /// Gradient of the pairwise margin logit_y - logit_j with respect to x.
  Vec margin_gradient(const Vec& x, std::size_t y, std::size_t j) const;

  /// Binary linear view (w, b) with positive class 1: w = W[1]-W[0].
  /// Only valid for logistic models with two classes.
  std::pair<Vec, double> binary_linear_parameters() const;

  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  double acc_train = -1.0;
  double acc_test = -1.0;

 private:
  Architecture arch_;
  std::vector<Layer> layers_;
};

/// Free-function spellings used throughout the attack code.
ConfidenceVector predict_confidences(const Classifier& model, const Vec& x);
Vec penultimate_features(const Classifier& model, const Vec& x);
Vec input_gradient(const Classifier& model, const Vec& x, std::size_t y);

// -- Training ----------------------------------------------------------------

/// Mini-batch SGD with cross-entropy plus l2*||w||_2^2 + l1*||w||_1.
/// With cfg.augmentation set, every augmentation of every image is visited
/// per epoch. Records acc_train on the classifier. Deterministic given rng.
Classifier train_classifier(const Architecture& arch, const FeatureSchema& schema,
                            const std::vector<ExampleRecord>& train_set,
                            const TrainConfig& cfg, RngStream& rng);

/// Continues training from `base`. kLastLayer freezes everything except the
/// final dense layer; kFull updates all parameters.
Classifier fine_tune(const Classifier& base, const FeatureSchema& schema,
                     const std::vector<ExampleRecord>& train_set, const TrainConfig& cfg,
                     RngStream& rng);

/// DP-SGD. The optional observer sees every per-example clipped gradient
/// norm, so tests can assert the clipping invariant.
Classifier train_dpsgd(const Architecture& arch, const FeatureSchema& schema,
                       const std::vector<ExampleRecord>& train_set, const TrainConfig& cfg,
                       const DpConfig& dp, RngStream& rng,
                       const std::function<void(double)>& clipped_norm_observer = nullptr);

/// The defensive membership classifier trained in tandem with the target
/// model: confidence-vector branch, one-hot label branch, concatenated head,
/// ReLU throughout with a sigmoid output.
class DefenderNet {
 public:
  DefenderNet() = default;
  DefenderNet(std::size_t num_classes, const AdvRegConfig& cfg, RngStream& rng);

  /// Member score in (0,1).
  double score(const ConfidenceVector& conf, std::size_t label) const;

  /// One SGD step of binary cross-entropy on a batch; m = 1 for members.
  void train_step(const std::vector<ConfidenceVector>& confs,
                  const std::vector<std::size_t>& labels, const std::vector<int>& membership,
                  double learning_rate);

  /// d(score)/d(confidence input), for the target model's fooling term.
  Vec input_gradient(const ConfidenceVector& conf, std::size_t label) const;

 private:
  std::size_t num_classes_ = 0;
  std::vector<DenseLayer> conf_branch_;
  std::vector<DenseLayer> label_branch_;
  std::vector<DenseLayer> head_;

  Vec forward(const ConfidenceVector& conf, std::size_t label,
              std::vector<Vec>* cache_a, std::vector<Vec>* cache_b,
              std::vector<Vec>* cache_h) const;
  friend struct DefenderBackward;
};

struct AdvRegResult {
  Classifier model;
  DefenderNet defender;
};

/// Adversarially regularized training: warmup epochs of plain SGD, then k
/// defender steps per target batch; the target loss adds lambda times the
/// defender's mean member score on the batch.
AdvRegResult train_adv_reg(const Architecture& arch, const FeatureSchema& schema,
                           const std::vector<ExampleRecord>& train_set,
                           const std::vector<ExampleRecord>& defender_members,
                           const std::vector<ExampleRecord>& defender_nonmembers,
                           const TrainConfig& cfg, const AdvRegConfig& adv, RngStream& rng);

/// Fraction of records whose predicted label equals y_true.
double accuracy(const Classifier& model, const std::vector<ExampleRecord>& records);

// -- Checkpoints ---------------------------------------------------------------

/// Self-describing JSON checkpoint: architecture descriptor, weight arrays
/// and training metadata. Stable field ordering; doubles round-trip exactly.
void save_classifier(const Classifier& model, const std::string& path);
Classifier load_classifier(const std::string& path);

}  // namespace miaudit

#endif  // MIAUDIT_MODEL_HPP

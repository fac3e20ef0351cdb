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

#include "miaudit/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "miaudit/errors.hpp"

namespace miaudit {

namespace {

double apply_act(Activation a, double v) {
  switch (a) {
    case Activation::kTanh:
      return std::tanh(v);
    case Activation::kRelu:
      return v > 0.0 ? v : 0.0;
    case Activation::kLeakyRelu:
      return v > 0.0 ? v : 0.01 * v;
  }
  return v;
}

double act_derivative(Activation a, double input, double output) {
  switch (a) {
    case Activation::kTanh:
      return 1.0 - output * output;
    case Activation::kRelu:
      return input > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu:
      return input > 0.0 ? 1.0 : 0.01;
  }
  return 1.0;
}

void glorot_init(Matrix& w, std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.entries) v = rng.uniform(-limit, limit);
}

std::vector<Layer> make_layers(const Architecture& arch, RngStream& rng) {
  std::vector<Layer> layers;
  auto dense = [&](std::size_t out, std::size_t in) {
    DenseLayer d;
    d.weights = Matrix(out, in);
    d.bias.assign(out, 0.0);
    glorot_init(d.weights, in, out, rng);
    layers.push_back(std::move(d));
  };
  auto conv = [&](std::size_t out_c, std::size_t in_c, std::size_t h, std::size_t w) {
    ConvLayer c;
    c.in_channels = in_c;
    c.out_channels = out_c;
    c.height = h;
    c.width = w;
    c.weights = Matrix(out_c, in_c * 9);
    c.bias.assign(out_c, 0.0);
    glorot_init(c.weights, in_c * 9, out_c * 9, rng);
    layers.push_back(std::move(c));
  };
  auto act = [&](Activation a, bool dropout) {
    layers.push_back(ActivationLayer{a, dropout});
  };

  switch (arch.kind) {
    case ModelKind::kLogistic:
      dense(arch.num_classes, arch.input_dim);
      break;
    case ModelKind::kMlp: {
      std::size_t in = arch.input_dim;
      for (std::size_t h : arch.hidden_sizes) {
        dense(h, in);
        act(arch.activation, /*dropout=*/true);
        in = h;
      }
      dense(arch.num_classes, in);
      break;
    }
    case ModelKind::kCnn: {
      const ImageShape& s = *arch.input_shape;
      conv(32, s.channels, s.height, s.width);
      act(Activation::kRelu, false);
      conv(32, 32, s.height, s.width);
      act(Activation::kRelu, false);
      layers.push_back(PoolLayer{32, s.height, s.width});
      std::size_t ph = s.height / 2, pw = s.width / 2;
      conv(64, 32, ph, pw);
      act(Activation::kRelu, false);
      conv(64, 64, ph, pw);
      act(Activation::kRelu, false);
      dense(512, 64 * ph * pw);
      act(Activation::kRelu, /*dropout=*/true);
      dense(arch.num_classes, 512);
      break;
    }
  }
  return layers;
}

// -- per-layer forward/backward ------------------------------------------------

void dense_forward(const DenseLayer& d, const Vec& in, Vec& out) {
  out.resize(d.weights.rows);
  for (std::size_t o = 0; o < d.weights.rows; ++o) {
    const double* w = d.weights.row(o);
    double s = d.bias[o];
    for (std::size_t i = 0; i < d.weights.cols; ++i) s += w[i] * in[i];
    out[o] = s;
  }
}

void dense_backward(const DenseLayer& d, const Vec& in, const Vec& dout, Vec& din,
                    Matrix* dw, Vec* db) {
  din.assign(d.weights.cols, 0.0);
  for (std::size_t o = 0; o < d.weights.rows; ++o) {
    const double* w = d.weights.row(o);
    double g = dout[o];
    for (std::size_t i = 0; i < d.weights.cols; ++i) din[i] += g * w[i];
    if (dw) {
      double* dwr = dw->row(o);
      for (std::size_t i = 0; i < d.weights.cols; ++i) dwr[i] += g * in[i];
      (*db)[o] += g;
    }
  }
}

// Zero-padded copy of one channel plane into a (h+2)x(w+2) buffer.
void pad_plane(const double* src, std::size_t h, std::size_t w, double* dst) {
  std::fill(dst, dst + (h + 2) * (w + 2), 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy(src + y * w, src + (y + 1) * w, dst + (y + 1) * (w + 2) + 1);
  }
}

void conv_forward(const ConvLayer& c, const Vec& in, Vec& out, Vec& padded_scratch) {
  const std::size_t h = c.height, w = c.width;
  const std::size_t pw = w + 2;
  padded_scratch.resize(c.in_channels * (h + 2) * pw);
  for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
    pad_plane(in.data() + ci * h * w, h, w, padded_scratch.data() + ci * (h + 2) * pw);
  }
  out.assign(c.out_channels * h * w, 0.0);
  for (std::size_t co = 0; co < c.out_channels; ++co) {
    double* out_plane = out.data() + co * h * w;
    double b = c.bias[co];
    for (std::size_t i = 0; i < h * w; ++i) out_plane[i] = b;
    const double* wrow = c.weights.row(co);
    for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
      const double* pad = padded_scratch.data() + ci * (h + 2) * pw;
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          double wv = wrow[ci * 9 + ky * 3 + kx];
          if (wv == 0.0) continue;
          for (std::size_t y = 0; y < h; ++y) {
            const double* prow = pad + (y + ky) * pw + kx;
            double* orow = out_plane + y * w;
            for (std::size_t x = 0; x < w; ++x) orow[x] += wv * prow[x];
          }
        }
      }
    }
  }
}

void conv_backward(const ConvLayer& c, const Vec& in, const Vec& dout, Vec& din,
                   Matrix* dw, Vec* db, Vec& padded_scratch, Vec& dpad_scratch) {
  const std::size_t h = c.height, w = c.width;
  const std::size_t pw = w + 2;
  padded_scratch.resize(c.in_channels * (h + 2) * pw);
  for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
    pad_plane(in.data() + ci * h * w, h, w, padded_scratch.data() + ci * (h + 2) * pw);
  }
  dpad_scratch.assign(c.in_channels * (h + 2) * pw, 0.0);

  for (std::size_t co = 0; co < c.out_channels; ++co) {
    const double* dout_plane = dout.data() + co * h * w;
    const double* wrow = c.weights.row(co);
    double* dwrow = dw ? dw->row(co) : nullptr;
    if (db) {
      double s = 0.0;
      for (std::size_t i = 0; i < h * w; ++i) s += dout_plane[i];
      (*db)[co] += s;
    }
    for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
      const double* pad = padded_scratch.data() + ci * (h + 2) * pw;
      double* dpad = dpad_scratch.data() + ci * (h + 2) * pw;
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          double wv = wrow[ci * 9 + ky * 3 + kx];
          double acc = 0.0;
          for (std::size_t y = 0; y < h; ++y) {
            const double* prow = pad + (y + ky) * pw + kx;
            double* dprow = dpad + (y + ky) * pw + kx;
            const double* drow = dout_plane + y * w;
            for (std::size_t x = 0; x < w; ++x) {
              acc += drow[x] * prow[x];
              dprow[x] += wv * drow[x];
            }
          }
          if (dwrow) dwrow[ci * 9 + ky * 3 + kx] += acc;
        }
      }
    }
  }
  din.assign(c.in_channels * h * w, 0.0);
  for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
    const double* dpad = dpad_scratch.data() + ci * (h + 2) * pw;
    double* dplane = din.data() + ci * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      std::copy(dpad + (y + 1) * pw + 1, dpad + (y + 1) * pw + 1 + w, dplane + y * w);
    }
  }
}

void pool_forward(const PoolLayer& p, const Vec& in, Vec& out, std::vector<std::size_t>& argmax) {
  const std::size_t oh = p.height / 2, ow = p.width / 2;
  out.resize(p.channels * oh * ow);
  argmax.resize(out.size());
  for (std::size_t c = 0; c < p.channels; ++c) {
    const double* plane = in.data() + c * p.height * p.width;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t base = (2 * y) * p.width + 2 * x;
        std::size_t cand[4] = {base, base + 1, base + p.width, base + p.width + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k) {
          if (plane[cand[k]] > plane[best]) best = cand[k];
        }
        std::size_t oi = c * oh * ow + y * ow + x;
        out[oi] = plane[best];
        argmax[oi] = c * p.height * p.width + best;
      }
    }
  }
}

void pool_backward(const PoolLayer& p, const Vec& dout, const std::vector<std::size_t>& argmax,
                   Vec& din) {
  din.assign(p.channels * p.height * p.width, 0.0);
  for (std::size_t i = 0; i < dout.size(); ++i) din[argmax[i]] += dout[i];
}

// Per-example forward state; keeps every layer input for the backward pass.
struct ForwardCache {
  std::vector<Vec> inputs;                       // inputs[i] feeds layers[i]
  std::vector<std::vector<std::size_t>> argmax;  // pool layers only
  std::vector<Vec> dropout_mask;                 // activation layers only
  Vec output;
  Vec pad_scratch;
  Vec dpad_scratch;
};

void forward_pass(const std::vector<Layer>& layers, const Vec& x, ForwardCache& cache,
                  double dropout_rho = 0.0, RngStream* dropout_rng = nullptr) {
  cache.inputs.assign(layers.size(), Vec());
  cache.argmax.assign(layers.size(), {});
  cache.dropout_mask.assign(layers.size(), Vec());
  Vec cur = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    cache.inputs[i] = cur;
    Vec next;
    if (const auto* d = std::get_if<DenseLayer>(&layers[i])) {
      dense_forward(*d, cur, next);
    } else if (const auto* c = std::get_if<ConvLayer>(&layers[i])) {
      conv_forward(*c, cur, next, cache.pad_scratch);
    } else if (const auto* p = std::get_if<PoolLayer>(&layers[i])) {
      pool_forward(*p, cur, next, cache.argmax[i]);
    } else {
      const auto& a = std::get<ActivationLayer>(layers[i]);
      next.resize(cur.size());
      for (std::size_t j = 0; j < cur.size(); ++j) next[j] = apply_act(a.act, cur[j]);
      if (a.dropout_eligible && dropout_rho > 0.0 && dropout_rng) {
        Vec mask(cur.size());
        double keep = 1.0 - dropout_rho;
        for (std::size_t j = 0; j < cur.size(); ++j) {
          mask[j] = dropout_rng->bernoulli(dropout_rho) ? 0.0 : 1.0 / keep;
          next[j] *= mask[j];
        }
        cache.dropout_mask[i] = std::move(mask);
      }
    }
    cur = std::move(next);
  }
  cache.output = std::move(cur);
}

struct Grads {
  std::vector<Matrix> w;  // parallel to layers; empty for non-param layers
  std::vector<Vec> b;

  explicit Grads(const std::vector<Layer>& layers) {
    w.resize(layers.size());
    b.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (const auto* d = std::get_if<DenseLayer>(&layers[i])) {
        w[i] = Matrix(d->weights.rows, d->weights.cols);
        b[i].assign(d->bias.size(), 0.0);
      } else if (const auto* c = std::get_if<ConvLayer>(&layers[i])) {
        w[i] = Matrix(c->weights.rows, c->weights.cols);
        b[i].assign(c->bias.size(), 0.0);
      }
    }
  }

  void zero() {
    for (auto& m : w) std::fill(m.entries.begin(), m.entries.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& m : w) {
      for (double v : m.entries) s += v * v;
    }
    for (const auto& v : b) {
      for (double x : v) s += x * x;
    }
    return s;
  }

  void scale(double f) {
    for (auto& m : w) {
      for (double& v : m.entries) v *= f;
    }
    for (auto& v : b) {
      for (double& x : v) x *= f;
    }
  }

  void add(const Grads& other) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t j = 0; j < w[i].entries.size(); ++j) {
        w[i].entries[j] += other.w[i].entries[j];
      }
      for (std::size_t j = 0; j < b[i].size(); ++j) b[i][j] += other.b[i][j];
    }
  }
};

// Backward from d(loss)/d(logits); accumulates into grads unless null.
void backward_pass(const std::vector<Layer>& layers, const ForwardCache& cache,
                   const Vec& dlogits, Grads* grads, Vec* dinput = nullptr) {
  Vec dcur = dlogits;
  Vec pad_scratch, dpad_scratch;
  for (std::size_t idx = layers.size(); idx-- > 0;) {
    Vec dprev;
    const Vec& in = cache.inputs[idx];
    if (const auto* d = std::get_if<DenseLayer>(&layers[idx])) {
      dense_backward(*d, in, dcur, dprev, grads ? &grads->w[idx] : nullptr,
                     grads ? &grads->b[idx] : nullptr);
    } else if (const auto* c = std::get_if<ConvLayer>(&layers[idx])) {
      conv_backward(*c, in, dcur, dprev, grads ? &grads->w[idx] : nullptr,
                    grads ? &grads->b[idx] : nullptr, pad_scratch, dpad_scratch);
    } else if (const auto* p = std::get_if<PoolLayer>(&layers[idx])) {
      pool_backward(*p, dcur, cache.argmax[idx], dprev);
    } else {
      const auto& a = std::get<ActivationLayer>(layers[idx]);
      dprev.resize(in.size());
      const Vec& mask = cache.dropout_mask[idx];
      for (std::size_t j = 0; j < in.size(); ++j) {
        double out_j = apply_act(a.act, in[j]);
        double g = dcur[j];
        if (!mask.empty()) g *= mask[j];
        dprev[j] = g * act_derivative(a.act, in[j], out_j);
      }
    }
    dcur = std::move(dprev);
  }
  if (dinput) *dinput = std::move(dcur);
}

// Cross-entropy loss and its logit gradient for one example. Non-finite
// logits mean the optimization blew up, which callers report as divergence.
double ce_loss_and_seed(const Vec& logits, std::size_t y, Vec& dlogits) {
  for (double v : logits) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
  }
  ConfidenceVector conf = softmax(logits);
  dlogits = conf.scores;
  dlogits[y] -= 1.0;
  double p = std::max(conf.scores[y], 1e-300);
  return -std::log(p);
}

}  // namespace

// -- Architecture --------------------------------------------------------------

Architecture Architecture::logistic(std::size_t input_dim, std::size_t num_classes) {
  Architecture a;
  a.kind = ModelKind::kLogistic;
  a.input_dim = input_dim;
  a.num_classes = num_classes;
  a.validate();
  return a;
}

Architecture Architecture::mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                               Activation act, std::size_t num_classes) {
  Architecture a;
  a.kind = ModelKind::kMlp;
  a.input_dim = input_dim;
  a.hidden_sizes = std::move(hidden);
  a.activation = act;
  a.num_classes = num_classes;
  a.validate();
  return a;
}

Architecture Architecture::cnn(ImageShape shape, std::size_t num_classes) {
  Architecture a;
  a.kind = ModelKind::kCnn;
  a.input_shape = shape;
  a.input_dim = shape.pixel_count();
  a.activation = Activation::kRelu;
  a.num_classes = num_classes;
  a.validate();
  return a;
}

void Architecture::validate() const {
  if (num_classes < 2) throw InvalidInputError("architecture needs >= 2 classes");
  if (input_dim == 0) throw InvalidInputError("architecture needs a positive input dim");
  if (kind == ModelKind::kLogistic && !hidden_sizes.empty()) {
    throw InvalidInputError("logistic regression has no hidden layers");
  }
  if (kind == ModelKind::kMlp && hidden_sizes.empty()) {
    throw InvalidInputError("MLP needs at least one hidden layer");
  }
  if (kind == ModelKind::kCnn) {
    if (!input_shape) throw InvalidInputError("CNN needs an input image shape");
    if (input_shape->height < 4 || input_shape->width < 4) {
      throw InvalidInputError("CNN input too small for conv/pool stack");
    }
  }
}

// -- Classifier ----------------------------------------------------------------

Classifier::Classifier(Architecture arch, std::vector<Layer> layers)
    : arch_(std::move(arch)), layers_(std::move(layers)) {}

Vec Classifier::logits(const Vec& x) const {
  if (x.size() != arch_.input_dim) {
    throw InvalidInputError("input width " + std::to_string(x.size()) +
                            " does not match model input dim " + std::to_string(arch_.input_dim));
  }
  ForwardCache cache;
  forward_pass(layers_, x, cache);
  return cache.output;
}

ConfidenceVector Classifier::confidences(const Vec& x) const { return softmax(logits(x)); }

std::size_t Classifier::predicted_label(const Vec& x) const { return argmax_index(logits(x)); }

Vec Classifier::penultimate(const Vec& x) const {
  if (arch_.kind == ModelKind::kLogistic) {
    throw UnsupportedArchitectureError("logistic model has no penultimate layer");
  }
  if (x.size() != arch_.input_dim) throw InvalidInputError("input width mismatch");
  ForwardCache cache;
  forward_pass(layers_, x, cache);
  // Input of the last dense layer = activations feeding the final linear map.
  return cache.inputs.back();
}

Vec Classifier::input_gradient(const Vec& x, std::size_t y) const {
  if (y >= arch_.num_classes) throw InvalidInputError("label out of range");
  ForwardCache cache;
  forward_pass(layers_, x, cache);
  // Margin = logit_y - max_{j != y} logit_j; runner-up ties break low.
  std::size_t runner = y == 0 ? 1 : 0;
  for (std::size_t j = 0; j < cache.output.size(); ++j) {
    if (j != y && cache.output[j] > cache.output[runner]) runner = j;
  }
  Vec seed(cache.output.size(), 0.0);
  seed[y] = 1.0;
  seed[runner] -= 1.0;
  Vec dx;
  backward_pass(layers_, cache, seed, nullptr, &dx);
  return dx;
}

Vec Classifier::margin_gradient(const Vec& x, std::size_t y, std::size_t j) const {
  if (y >= arch_.num_classes || j >= arch_.num_classes || y == j) {
    throw InvalidInputError("margin_gradient needs two distinct valid classes");
  }
  ForwardCache cache;
  forward_pass(layers_, x, cache);
  Vec seed(cache.output.size(), 0.0);
  seed[y] = 1.0;
  seed[j] = -1.0;
  Vec dx;
  backward_pass(layers_, cache, seed, nullptr, &dx);
  return dx;
}

std::pair<Vec, double> Classifier::binary_linear_parameters() const {
  if (arch_.kind != ModelKind::kLogistic || arch_.num_classes != 2) {
    throw UnsupportedArchitectureError("binary linear view needs a 2-class logistic model");
  }
  const auto& d = std::get<DenseLayer>(layers_.front());
  Vec w(d.weights.cols);
  for (std::size_t i = 0; i < d.weights.cols; ++i) w[i] = d.weights.at(1, i) - d.weights.at(0, i);
  return {w, d.bias[1] - d.bias[0]};
}

ConfidenceVector predict_confidences(const Classifier& model, const Vec& x) {
  return model.confidences(x);
}

Vec penultimate_features(const Classifier& model, const Vec& x) { return model.penultimate(x); }

Vec input_gradient(const Classifier& model, const Vec& x, std::size_t y) {
  return model.input_gradient(x, y);
}

double accuracy(const Classifier& model, const std::vector<ExampleRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (model.predicted_label(r.x) == r.y_true) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

// -- Training ------------------------------------------------------------------

namespace {

struct TrainItem {
  Vec x;
  std::size_t y;
};

std::vector<TrainItem> expand_training_set(const FeatureSchema& schema,
                                           const std::vector<ExampleRecord>& train_set,
                                           const TrainConfig& cfg) {
  std::vector<TrainItem> items;
  if (cfg.augmentation) {
    if (!schema.is_image()) throw SchemaError("training augmentation requires an image schema");
    for (const auto& rec : train_set) {
      for (auto& q : augmentation_set(rec, schema, *cfg.augmentation)) {
        items.push_back(TrainItem{std::move(q), rec.y_true});
      }
    }
  } else {
    for (const auto& rec : train_set) items.push_back(TrainItem{rec.x, rec.y_true});
  }
  return items;
}

void check_inputs(const Architecture& arch, const std::vector<ExampleRecord>& train_set) {
  if (train_set.empty()) throw InvalidInputError("empty training set");
  for (const auto& r : train_set) {
    if (r.x.size() != arch.input_dim) throw InvalidInputError("record width != model input dim");
    if (r.y_true >= arch.num_classes) throw InvalidInputError("label out of range");
  }
}

void apply_regularizers(std::vector<Layer>& layers, Grads& grads, double l1, double l2) {
  if (l1 == 0.0 && l2 == 0.0) return;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix* w = nullptr;
    if (auto* d = std::get_if<DenseLayer>(&layers[i])) w = &d->weights;
    if (auto* c = std::get_if<ConvLayer>(&layers[i])) w = &c->weights;
    if (!w) continue;
    for (std::size_t j = 0; j < w->entries.size(); ++j) {
      double v = w->entries[j];
      grads.w[i].entries[j] += 2.0 * l2 * v + l1 * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
  }
}

void sgd_step(std::vector<Layer>& layers, const Grads& grads, double lr,
              bool last_layer_only = false) {
  std::size_t last_dense = layers.size();
  if (last_layer_only) {
    for (std::size_t i = layers.size(); i-- > 0;) {
      if (std::holds_alternative<DenseLayer>(layers[i])) {
        last_dense = i;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (last_layer_only && i != last_dense) continue;
    if (auto* d = std::get_if<DenseLayer>(&layers[i])) {
      for (std::size_t j = 0; j < d->weights.entries.size(); ++j) {
        d->weights.entries[j] -= lr * grads.w[i].entries[j];
      }
      for (std::size_t j = 0; j < d->bias.size(); ++j) d->bias[j] -= lr * grads.b[i][j];
    } else if (auto* c = std::get_if<ConvLayer>(&layers[i])) {
      for (std::size_t j = 0; j < c->weights.entries.size(); ++j) {
        c->weights.entries[j] -= lr * grads.w[i].entries[j];
      }
      for (std::size_t j = 0; j < c->bias.size(); ++j) c->bias[j] -= lr * grads.b[i][j];
    }
  }
}

std::uint64_t hash_train_config(const TrainConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(cfg.epochs);
  mix(cfg.batch_size);
  mix(std::bit_cast<std::uint64_t>(cfg.learning_rate));
  mix(std::bit_cast<std::uint64_t>(cfg.l1_lambda));
  mix(std::bit_cast<std::uint64_t>(cfg.l2_lambda));
  mix(std::bit_cast<std::uint64_t>(cfg.dropout_rho));
  mix(cfg.seed);
  if (cfg.augmentation) {
    mix(cfg.augmentation->kind == AugmentationKind::kRotation ? 1 : 2);
    mix(std::bit_cast<std::uint64_t>(cfg.augmentation->rotation_degrees));
    mix(static_cast<std::uint64_t>(cfg.augmentation->translation_pixels));
  }
  return h;
}

// Shared plain-SGD epoch runner. Throws TrainingError on divergence.
class SgdDriver {
 public:
  SgdDriver(std::vector<Layer>& layers, const std::vector<TrainItem>& items,
            const TrainConfig& cfg, RngStream& rng)
      : layers_(layers), items_(items), cfg_(cfg), rng_(rng), grads_(layers) {
    order_.resize(items.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  }

  // Runs one epoch; visit_batch is called before each batch update with the
  // batch index range (used by adversarial regularization for defender steps).
  template <typename PerExampleSeed>
  void run_epoch(std::size_t epoch, PerExampleSeed&& extra_seed,
                 const std::function<void(const std::vector<std::size_t>&)>& before_batch = nullptr) {
    rng_.shuffle(order_);
    std::size_t bs = std::max<std::size_t>(1, cfg_.batch_size);
    for (std::size_t start = 0; start < order_.size(); start += bs) {
      std::size_t end = std::min(order_.size(), start + bs);
      std::vector<std::size_t> batch(order_.begin() + start, order_.begin() + end);
      if (before_batch) before_batch(batch);
      grads_.zero();
      double loss = 0.0;
      for (std::size_t idx : batch) {
        const TrainItem& item = items_[idx];
        forward_pass(layers_, item.x, cache_, cfg_.dropout_rho,
                     cfg_.dropout_rho > 0.0 ? &rng_ : nullptr);
        Vec seed;
        loss += ce_loss_and_seed(cache_.output, item.y, seed);
        if (!std::isfinite(loss)) {
          throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(step_));
        }
        extra_seed(item, cache_.output, seed);
        backward_pass(layers_, cache_, seed, &grads_);
      }
      grads_.scale(1.0 / static_cast<double>(batch.size()));
      apply_regularizers(layers_, grads_, cfg_.l1_lambda, cfg_.l2_lambda);
      sgd_step(layers_, grads_, cfg_.learning_rate,
               cfg_.fine_tune_mode == FineTuneMode::kLastLayer);
      ++step_;
    }
  }

  std::size_t step_count() const { return step_; }

 private:
  std::vector<Layer>& layers_;
  const std::vector<TrainItem>& items_;
  const TrainConfig& cfg_;
  RngStream& rng_;
  Grads grads_;
  ForwardCache cache_;
  std::vector<std::size_t> order_;
  std::size_t step_ = 0;
};

}  // namespace

Classifier train_classifier(const Architecture& arch, const FeatureSchema& schema,
                            const std::vector<ExampleRecord>& train_set,
                            const TrainConfig& cfg, RngStream& rng) {
  arch.validate();
  check_inputs(arch, train_set);
  std::vector<Layer> layers = make_layers(arch, rng);
  std::vector<TrainItem> items = expand_training_set(schema, train_set, cfg);

  SgdDriver driver(layers, items, cfg, rng);
  auto no_extra = [](const TrainItem&, const Vec&, Vec&) {};
  for (std::size_t e = 0; e < cfg.epochs; ++e) driver.run_epoch(e, no_extra);

  Classifier model(arch, std::move(layers));
  model.seed = rng.seed();
  model.config_hash = hash_train_config(cfg);
  model.acc_train = accuracy(model, train_set);
  return model;
}

Classifier fine_tune(const Classifier& base, const FeatureSchema& schema,
                     const std::vector<ExampleRecord>& train_set, const TrainConfig& cfg,
                     RngStream& rng) {
  check_inputs(base.architecture(), train_set);
  std::vector<Layer> layers = base.layers();
  std::vector<TrainItem> items = expand_training_set(schema, train_set, cfg);

  SgdDriver driver(layers, items, cfg, rng);
  auto no_extra = [](const TrainItem&, const Vec&, Vec&) {};
  for (std::size_t e = 0; e < cfg.epochs; ++e) driver.run_epoch(e, no_extra);

  Classifier model(base.architecture(), std::move(layers));
  model.seed = rng.seed();
  model.config_hash = hash_train_config(cfg);
  model.acc_train = accuracy(model, train_set);
  return model;
}

Classifier train_dpsgd(const Architecture& arch, const FeatureSchema& schema,
                       const std::vector<ExampleRecord>& train_set, const TrainConfig& cfg,
                       const DpConfig& dp, RngStream& rng,
                       const std::function<void(double)>& clipped_norm_observer) {
  arch.validate();
  check_inputs(arch, train_set);
  if (!(dp.clip_norm > 0.0)) throw InvalidInputError("DP clip norm must be positive");
  if (dp.noise_multiplier < 0.0) throw InvalidInputError("DP noise multiplier must be >= 0");

  std::vector<Layer> layers = make_layers(arch, rng);
  std::vector<TrainItem> items = expand_training_set(schema, train_set, cfg);

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Grads batch_sum(layers);
  Grads example_grads(layers);
  ForwardCache cache;

  std::size_t bs = std::max<std::size_t>(1, cfg.batch_size);
  std::size_t steps_per_epoch = (items.size() + bs - 1) / bs;
  std::size_t total_steps = dp.steps > 0 ? dp.steps : cfg.epochs * steps_per_epoch;

  double noise_stddev = dp.noise_multiplier * dp.clip_norm;
  std::size_t step = 0;
  while (step < total_steps) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size() && step < total_steps; start += bs) {
      std::size_t end = std::min(order.size(), start + bs);
      batch_sum.zero();
      double loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const TrainItem& item = items[order[k]];
        forward_pass(layers, item.x, cache, cfg.dropout_rho,
                     cfg.dropout_rho > 0.0 ? &rng : nullptr);
        Vec seed;
        loss += ce_loss_and_seed(cache.output, item.y, seed);
        if (!std::isfinite(loss)) {
          throw TrainingError("DP-SGD diverged at step " + std::to_string(step));
        }
        example_grads.zero();
        backward_pass(layers, cache, seed, &example_grads);
        // Clip each per-example gradient to L2 norm <= clip_norm.
        double norm = std::sqrt(example_grads.squared_norm());
        if (norm > dp.clip_norm) example_grads.scale(dp.clip_norm / norm);
        if (clipped_norm_observer) {
          clipped_norm_observer(std::min(norm, dp.clip_norm));
        }
        batch_sum.add(example_grads);
      }
      if (noise_stddev > 0.0) {
        for (auto& m : batch_sum.w) {
          for (double& v : m.entries) v += rng.normal(0.0, noise_stddev);
        }
        for (auto& v : batch_sum.b) {
          for (double& x : v) x += rng.normal(0.0, noise_stddev);
        }
      }
      batch_sum.scale(1.0 / static_cast<double>(end - start));
      apply_regularizers(layers, batch_sum, cfg.l1_lambda, cfg.l2_lambda);
      sgd_step(layers, batch_sum, cfg.learning_rate);
      ++step;
    }
  }

  Classifier model(arch, std::move(layers));
  model.seed = rng.seed();
  model.config_hash = hash_train_config(cfg);
  model.acc_train = accuracy(model, train_set);
  return model;
}

// -- DefenderNet -----------------------------------------------------------------

namespace {

std::vector<DenseLayer> make_dense_stack(std::size_t in, const std::vector<std::size_t>& sizes,
                                         RngStream& rng) {
  std::vector<DenseLayer> stack;
  for (std::size_t out : sizes) {
    DenseLayer d;
    d.weights = Matrix(out, in);
    d.bias.assign(out, 0.0);
    glorot_init(d.weights, in, out, rng);
    stack.push_back(std::move(d));
    in = out;
  }
  return stack;
}

// Forward through a ReLU dense stack, caching layer inputs.
Vec stack_forward(const std::vector<DenseLayer>& stack, Vec cur, std::vector<Vec>* cache,
                  bool relu_last = true) {
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (cache) cache->push_back(cur);
    Vec next;
    dense_forward(stack[i], cur, next);
    bool apply_relu = relu_last || i + 1 < stack.size();
    if (apply_relu) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

DefenderNet::DefenderNet(std::size_t num_classes, const AdvRegConfig& cfg, RngStream& rng)
    : num_classes_(num_classes) {
  conf_branch_ = make_dense_stack(num_classes, cfg.confidence_branch, rng);
  label_branch_ = make_dense_stack(num_classes, cfg.label_branch, rng);
  std::size_t concat = cfg.confidence_branch.back() + cfg.label_branch.back();
  std::vector<std::size_t> head_sizes = cfg.head;
  head_sizes.push_back(1);  // sigmoid output unit
  head_ = make_dense_stack(concat, head_sizes, rng);
}

Vec DefenderNet::forward(const ConfidenceVector& conf, std::size_t label,
                         std::vector<Vec>* cache_a, std::vector<Vec>* cache_b,
                         std::vector<Vec>* cache_h) const {
  Vec one_hot(num_classes_, 0.0);
  one_hot[label] = 1.0;
  Vec a = stack_forward(conf_branch_, conf.scores, cache_a);
  Vec b = stack_forward(label_branch_, one_hot, cache_b);
  Vec concat;
  concat.reserve(a.size() + b.size());
  concat.insert(concat.end(), a.begin(), a.end());
  concat.insert(concat.end(), b.begin(), b.end());
  // Head: ReLU on hidden layers, raw pre-sigmoid output on the last.
  return stack_forward(head_, std::move(concat), cache_h, /*relu_last=*/false);
}

double DefenderNet::score(const ConfidenceVector& conf, std::size_t label) const {
  Vec z = forward(conf, label, nullptr, nullptr, nullptr);
  return sigmoid(z[0]);
}

// Backward helpers shared by train_step and input_gradient.
struct DefenderBackward {
  // Backprop dout through a ReLU dense stack; fills per-layer grads when given.
  static Vec stack_backward(const std::vector<DenseLayer>& stack, const std::vector<Vec>& cache,
                            Vec dout, bool relu_last, std::vector<Matrix>* dw,
                            std::vector<Vec>* db) {
    for (std::size_t i = stack.size(); i-- > 0;) {
      const Vec& in = cache[i];
      // Recompute this layer's pre-activation to gate the ReLU derivative.
      Vec pre;
      dense_forward(stack[i], in, pre);
      bool applied_relu = relu_last || i + 1 < stack.size();
      if (applied_relu) {
        for (std::size_t j = 0; j < dout.size(); ++j) {
          if (pre[j] <= 0.0) dout[j] = 0.0;
        }
      }
      Vec din;
      dense_backward(stack[i], in, dout, din, dw ? &(*dw)[i] : nullptr, db ? &(*db)[i] : nullptr);
      dout = std::move(din);
    }
    return dout;
  }
};

void DefenderNet::train_step(const std::vector<ConfidenceVector>& confs,
                             const std::vector<std::size_t>& labels,
                             const std::vector<int>& membership, double learning_rate) {
  auto zero_grads = [](const std::vector<DenseLayer>& stack, std::vector<Matrix>& dw,
                       std::vector<Vec>& db) {
    dw.clear();
    db.clear();
    for (const auto& d : stack) {
      dw.emplace_back(d.weights.rows, d.weights.cols);
      db.emplace_back(d.bias.size(), 0.0);
    }
  };
  std::vector<Matrix> dw_a, dw_b, dw_h;
  std::vector<Vec> db_a, db_b, db_h;
  zero_grads(conf_branch_, dw_a, db_a);
  zero_grads(label_branch_, dw_b, db_b);
  zero_grads(head_, dw_h, db_h);

  for (std::size_t n = 0; n < confs.size(); ++n) {
    std::vector<Vec> cache_a, cache_b, cache_h;
    Vec z = forward(confs[n], labels[n], &cache_a, &cache_b, &cache_h);
    double s = sigmoid(z[0]);
    // BCE gradient at the pre-sigmoid output.
    Vec dout = {s - static_cast<double>(membership[n])};
    Vec dconcat =
        DefenderBackward::stack_backward(head_, cache_h, std::move(dout), false, &dw_h, &db_h);
    std::size_t a_len = cache_a.empty() ? 0 : conf_branch_.back().weights.rows;
    Vec da(dconcat.begin(), dconcat.begin() + a_len);
    Vec db_in(dconcat.begin() + a_len, dconcat.end());
    DefenderBackward::stack_backward(conf_branch_, cache_a, std::move(da), true, &dw_a, &db_a);
    DefenderBackward::stack_backward(label_branch_, cache_b, std::move(db_in), true, &dw_b,
                                     &db_b);
  }

  double inv = 1.0 / static_cast<double>(confs.size());
  auto apply = [&](std::vector<DenseLayer>& stack, std::vector<Matrix>& dw,
                   std::vector<Vec>& db) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      for (std::size_t j = 0; j < stack[i].weights.entries.size(); ++j) {
        stack[i].weights.entries[j] -= learning_rate * inv * dw[i].entries[j];
      }
      for (std::size_t j = 0; j < stack[i].bias.size(); ++j) {
        stack[i].bias[j] -= learning_rate * inv * db[i][j];
      }
    }
  };
  apply(conf_branch_, dw_a, db_a);
  apply(label_branch_, dw_b, db_b);
  apply(head_, dw_h, db_h);
}

Vec DefenderNet::input_gradient(const ConfidenceVector& conf, std::size_t label) const {
  std::vector<Vec> cache_a, cache_b, cache_h;
  Vec z = forward(conf, label, &cache_a, &cache_b, &cache_h);
  double s = sigmoid(z[0]);
  // d(score)/dz = s(1-s); propagate the score itself, not a loss.
  Vec dout = {s * (1.0 - s)};
  Vec dconcat =
      DefenderBackward::stack_backward(head_, cache_h, std::move(dout), false, nullptr, nullptr);
  std::size_t a_len = conf_branch_.back().weights.rows;
  Vec da(dconcat.begin(), dconcat.begin() + a_len);
  return DefenderBackward::stack_backward(conf_branch_, cache_a, std::move(da), true, nullptr,
                                          nullptr);
}

AdvRegResult train_adv_reg(const Architecture& arch, const FeatureSchema& schema,
                           const std::vector<ExampleRecord>& train_set,
                           const std::vector<ExampleRecord>& defender_members,
                           const std::vector<ExampleRecord>& defender_nonmembers,
                           const TrainConfig& cfg, const AdvRegConfig& adv, RngStream& rng) {
  arch.validate();
  check_inputs(arch, train_set);
  if (adv.k < 1) throw InvalidInputError("adversarial regularization needs k >= 1");
  if (defender_members.empty() || defender_nonmembers.empty()) {
    throw InvalidInputError("defender needs nonempty member and non-member sets");
  }

  std::vector<Layer> layers = make_layers(arch, rng);
  std::vector<TrainItem> items = expand_training_set(schema, train_set, cfg);

  // The defender lives on its own stream so that lambda = 0 reproduces the
  // plain SGD trajectory draw-for-draw.
  RngStream defender_rng = rng.split(0x4adf);
  DefenderNet defender(arch.num_classes, adv, defender_rng);

  SgdDriver driver(layers, items, cfg, rng);
  auto no_extra = [](const TrainItem&, const Vec&, Vec&) {};

  std::size_t warmup = std::min(adv.warmup_epochs, cfg.epochs);
  for (std::size_t e = 0; e < warmup; ++e) driver.run_epoch(e, no_extra);

  auto defender_steps = [&](const std::vector<std::size_t>&) {
    std::size_t half = std::max<std::size_t>(1, cfg.batch_size / 2);
    for (std::size_t s = 0; s < adv.k; ++s) {
      std::vector<ConfidenceVector> confs;
      std::vector<std::size_t> labels;
      std::vector<int> member_bits;
      for (std::size_t i = 0; i < half; ++i) {
        const auto& m = defender_members[defender_rng.uniform_int(defender_members.size())];
        ForwardCache c;
        forward_pass(layers, m.x, c);
        confs.push_back(softmax(c.output));
        labels.push_back(m.y_true);
        member_bits.push_back(1);
      }
      for (std::size_t i = 0; i < half; ++i) {
        const auto& nm =
            defender_nonmembers[defender_rng.uniform_int(defender_nonmembers.size())];
        ForwardCache c;
        forward_pass(layers, nm.x, c);
        confs.push_back(softmax(c.output));
        labels.push_back(nm.y_true);
        member_bits.push_back(0);
      }
      defender.train_step(confs, labels, member_bits, adv.defender_learning_rate);
    }
  };

  auto fooling_seed = [&](const TrainItem& item, const Vec& logits, Vec& seed) {
    if (adv.lambda == 0.0) return;
    ConfidenceVector conf = softmax(logits);
    Vec g = defender.input_gradient(conf, item.y);
    // Chain through softmax: d/dlogit_j = conf_j * (g_j - sum_k g_k conf_k).
    double dot_gc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) dot_gc += g[k] * conf.scores[k];
    for (std::size_t j = 0; j < seed.size(); ++j) {
      seed[j] += adv.lambda * conf.scores[j] * (g[j] - dot_gc);
    }
  };

  for (std::size_t e = warmup; e < cfg.epochs; ++e) {
    driver.run_epoch(e, fooling_seed, defender_steps);
  }

  AdvRegResult result;
  result.model = Classifier(arch, std::move(layers));
  result.model.seed = rng.seed();
  result.model.config_hash = hash_train_config(cfg);
  result.model.acc_train = accuracy(result.model, train_set);
  result.defender = std::move(defender);
  return result;
}

// -- Checkpoints -----------------------------------------------------------------

namespace {

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kMlp:
      return "mlp";
    case ModelKind::kCnn:
      return "cnn";
  }
  return "?";
}

const char* act_name(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kLeakyRelu:
      return "leaky-relu";
  }
  return "?";
}

ModelKind kind_from(const std::string& s) {
  if (s == "logistic") return ModelKind::kLogistic;
  if (s == "mlp") return ModelKind::kMlp;
  if (s == "cnn") return ModelKind::kCnn;
  throw FormatError("unknown model kind: " + s);
}

Activation act_from(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  if (s == "leaky-relu") return Activation::kLeakyRelu;
  throw FormatError("unknown activation: " + s);
}

}  // namespace

void save_classifier(const Classifier& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "mi-audit-model";
  j["version"] = 1;
  const Architecture& a = model.architecture();
  nlohmann::json ja;
  ja["kind"] = kind_name(a.kind);
  ja["hidden_sizes"] = a.hidden_sizes;
  ja["activation"] = act_name(a.activation);
  ja["input_dim"] = a.input_dim;
  ja["num_classes"] = a.num_classes;
  if (a.input_shape) {
    ja["input_shape"] = {{"height", a.input_shape->height},
                         {"width", a.input_shape->width},
                         {"channels", a.input_shape->channels}};
  }
  j["architecture"] = ja;

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers()) {
    nlohmann::json jl;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      jl["type"] = "dense";
      jl["rows"] = d->weights.rows;
      jl["cols"] = d->weights.cols;
      jl["weights"] = d->weights.entries;
      jl["bias"] = d->bias;
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      jl["type"] = "conv";
      jl["in_channels"] = c->in_channels;
      jl["out_channels"] = c->out_channels;
      jl["height"] = c->height;
      jl["width"] = c->width;
      jl["weights"] = c->weights.entries;
      jl["bias"] = c->bias;
    } else if (const auto* p = std::get_if<PoolLayer>(&layer)) {
      jl["type"] = "pool";
      jl["channels"] = p->channels;
      jl["height"] = p->height;
      jl["width"] = p->width;
    } else {
      const auto& act = std::get<ActivationLayer>(layer);
      jl["type"] = "activation";
      jl["act"] = act_name(act.act);
      jl["dropout_eligible"] = act.dropout_eligible;
    }
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  j["metadata"] = {{"config_hash", model.config_hash},
                   {"seed", model.seed},
                   {"acc_train", model.acc_train},
                   {"acc_test", model.acc_test}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("checkpoint write failed: " + path);
}

Classifier load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "mi-audit-model") throw FormatError("not a model checkpoint");

  const auto& ja = j.at("architecture");
  Architecture a;
  a.kind = kind_from(ja.at("kind").get<std::string>());
  a.hidden_sizes = ja.at("hidden_sizes").get<std::vector<std::size_t>>();
  a.activation = act_from(ja.at("activation").get<std::string>());
  a.input_dim = ja.at("input_dim").get<std::size_t>();
  a.num_classes = ja.at("num_classes").get<std::size_t>();
  if (ja.contains("input_shape")) {
    ImageShape s;
    s.height = ja["input_shape"].at("height").get<std::size_t>();
    s.width = ja["input_shape"].at("width").get<std::size_t>();
    s.channels = ja["input_shape"].at("channels").get<std::size_t>();
    a.input_shape = s;
  }

  std::vector<Layer> layers;
  for (const auto& jl : j.at("layers")) {
    std::string type = jl.at("type").get<std::string>();
    if (type == "dense") {
      DenseLayer d;
      d.weights = Matrix(jl.at("rows").get<std::size_t>(), jl.at("cols").get<std::size_t>());
      d.weights.entries = jl.at("weights").get<Vec>();
      d.bias = jl.at("bias").get<Vec>();
      d.weights.validate();
      layers.push_back(std::move(d));
    } else if (type == "conv") {
      ConvLayer c;
      c.in_channels = jl.at("in_channels").get<std::size_t>();
      c.out_channels = jl.at("out_channels").get<std::size_t>();
      c.height = jl.at("height").get<std::size_t>();
      c.width = jl.at("width").get<std::size_t>();
      c.weights = Matrix(c.out_channels, c.in_channels * 9);
      c.weights.entries = jl.at("weights").get<Vec>();
      c.bias = jl.at("bias").get<Vec>();
      c.weights.validate();
      layers.push_back(std::move(c));
    } else if (type == "pool") {
      layers.push_back(PoolLayer{jl.at("channels").get<std::size_t>(),
                                 jl.at("height").get<std::size_t>(),
                                 jl.at("width").get<std::size_t>()});
    } else if (type == "activation") {
      layers.push_back(ActivationLayer{act_from(jl.at("act").get<std::string>()),
                                       jl.at("dropout_eligible").get<bool>()});
    } else {
      throw FormatError("unknown layer type: " + type);
    }
  }

  Classifier model(a, std::move(layers));
  const auto& meta = j.at("metadata");
  model.config_hash = meta.at("config_hash").get<std::uint64_t>();
  model.seed = meta.at("seed").get<std::uint64_t>();
  model.acc_train = meta.at("acc_train").get<double>();
  model.acc_test = meta.at("acc_test").get<double>();
  return model;
}

}  // namespace miaudit

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

#include "miaudit/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "miaudit/errors.hpp"

namespace miaudit {

void Matrix::validate() const {
  if (entries.size() != rows * cols) {
    throw InvalidInputError("Matrix storage size does not match rows*cols");
  }
  for (double v : entries) {
    if (!std::isfinite(v)) throw InvalidInputError("Matrix entry is not finite");
  }
}

void ConfidenceVector::validate() const {
  if (scores.empty()) throw InvalidInputError("ConfidenceVector is empty");
  double sum = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw InvalidInputError("ConfidenceVector score outside [0,1]");
    }
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InvalidInputError("ConfidenceVector scores do not sum to 1");
  }
}

ConfidenceVector softmax(const Vec& logits) {
  if (logits.empty()) throw InvalidInputError("softmax: empty logits");
  for (double v : logits) {
    if (!std::isfinite(v)) throw InvalidInputError("softmax: non-finite logit");
  }
  double max_logit = *std::max_element(logits.begin(), logits.end());
  ConfidenceVector out;
  out.scores.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.scores[i] = std::exp(logits[i] - max_logit);
    sum += out.scores[i];
  }
  for (double& s : out.scores) s /= sum;
  return out;
}

std::size_t argmax_index(const Vec& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;  // strict: ties keep the lowest index
  }
  return best;
}

std::size_t argmax_label(const ConfidenceVector& c) {
  c.validate();
  return argmax_index(c.scores);
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logistic_inverse(double c) {
  if (!(c > 0.0 && c < 1.0)) {
    throw InvalidInputError("logistic_inverse: argument outside (0,1)");
  }
  return std::log(c / (1.0 - c));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  engine_.seed(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id)));
}

RngStream RngStream::split(std::uint64_t child_id) const {
  return RngStream(seed_, splitmix64(stream_id_ * 0x9e3779b97f4a7c15ULL + child_id + 1));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw InvalidInputError("uniform_int: n must be positive");
  // Rejection sampling over the largest multiple of n, so every value is
  // equally likely and the sequence is platform-independent.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on two fresh uniforms; u is kept away from zero.
  double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  double v = uniform();
  double r = std::sqrt(-2.0 * std::log(u));
  double theta = 2.0 * 3.14159265358979323846 * v;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Vec RngStream::unit_vector(std::size_t dim) {
  Vec v(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = normal();
      norm_sq += v[i] * v[i];
    }
  } while (norm_sq == 0.0);
  double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Vec& v) { return std::sqrt(dot(v, v)); }

double l2_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace miaudit

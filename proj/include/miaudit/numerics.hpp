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

#ifndef MIAUDIT_NUMERICS_HPP
#define MIAUDIT_NUMERICS_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace miaudit {

using Vec = std::vector<double>;

/// Dense row-major matrix of 64-bit reals.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec entries;  // rows * cols, row-major, all finite

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  double* row(std::size_t r) { return entries.data() + r * cols; }
  const double* row(std::size_t r) const { return entries.data() + r * cols; }

  /// Throws InvalidInputError if dimensions and storage disagree or an entry is non-finite.
  void validate() const;
};

/// Softmax output: one score per class, each in [0,1], summing to 1 within 1e-6.
struct ConfidenceVector {
  Vec scores;

  std::size_t num_classes() const { return scores.size(); }
  void validate() const;
};

/// Numerically stable softmax (subtracts the max logit before exponentiation).
ConfidenceVector softmax(const Vec& logits);

/// Index of the largest score; ties go to the lowest class index.
std::size_t argmax_label(const ConfidenceVector& c);

/// Argmax over raw values with the same lowest-index tie-break.
std::size_t argmax_index(const Vec& values);

double sigmoid(double t);

/// log(c / (1 - c)) for c in the open unit interval.
double logistic_inverse(double c);

/// Seeded, splittable random stream.
///
/// Two streams constructed with equal (seed, stream_id) produce byte-identical
/// draw sequences on every platform: the engine is the standardized mt19937_64
/// and all distribution transforms are implemented here rather than taken from
/// <random>, whose distributions are implementation-defined.
///
/// Streams are single-owner. To hand randomness to a sub-computation, split()
/// a child keyed by that component's id instead of sharing the stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream; deterministic in (seed, stream_id, child_id).
  RngStream split(std::uint64_t child_id) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller (one spare cached).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniformly random direction on the unit sphere in `dim` dimensions.
  Vec unit_vector(std::size_t dim);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive engine seeds and child stream ids.
std::uint64_t splitmix64(std::uint64_t x);

double dot(const Vec& a, const Vec& b);
double l2_norm(const Vec& v);
double l2_distance(const Vec& a, const Vec& b);

}  // namespace miaudit

#endif  // MIAUDIT_NUMERICS_HPP

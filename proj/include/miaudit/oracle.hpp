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

#ifndef MIAUDIT_ORACLE_HPP
#define MIAUDIT_ORACLE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "miaudit/model.hpp"
#include "miaudit/numerics.hpp"

namespace miaudit {

inline constexpr std::int64_t kUntaggedPoint = -1;

/// Monotone query accounting, safe under concurrent increments. Point ids
/// are caller-provided and tracked on first use.
class QueryCounter {
 public:
  void increment(std::int64_t point_id);

  std::uint64_t total() const { return total_.load(); }
  std::uint64_t untagged() const { return untagged_.load(); }
  std::uint64_t for_point(std::uint64_t id) const;

  /// untagged + sum of per-point counts; equals total() by construction.
  std::uint64_t sum_of_parts() const;

 private:
  std::atomic<std::uint64_t> total_{0};
  std::atomic<std::uint64_t> untagged_{0};
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::uint64_t> per_point_;
};

enum class DefenseKind { kNone, kMemguard, kTopK, kRound };

struct DefenseWrapperSpec {
  DefenseKind kind = DefenseKind::kNone;
  std::size_t k = 1;   // top-k
  int digits = 2;      // round
};

/// Black-box confidence interface. Every query increments the shared
/// counter by exactly one, whatever defenses are stacked on top.
class ConfidenceOracle {
 public:
  explicit ConfidenceOracle(const Classifier& model);

  ConfidenceVector query(const Vec& x, std::int64_t point_id = kUntaggedPoint) const;

  std::size_t num_classes() const { return model_->architecture().num_classes; }
  const Classifier& model() const { return *model_; }
  QueryCounter& counter() const { return *counter_; }

  /// Defended view sharing the model and counter. Defenses apply in the
  /// order they were wrapped.
  ConfidenceOracle wrapped(const DefenseWrapperSpec& spec) const;

 private:
  const Classifier* model_;
  std::shared_ptr<QueryCounter> counter_;
  std::vector<DefenseWrapperSpec> defenses_;
};

/// The strongest admissible confidence-masking defense: the output is a
/// canonical label-dependent vector (predicted class at 1/K + 0.01, the
/// rest uniform), so every confidence-based signal collapses to the label.
ConfidenceOracle wrap_memguard(const ConfidenceOracle& o);

/// Keeps the k largest scores and zeroes the rest; no renormalization.
ConfidenceOracle wrap_topk(const ConfidenceOracle& o, std::size_t k);

/// Rounds each score to the given decimal places, then restores the predicted
/// class as the strict argmax when rounding created a tie or flip.
ConfidenceOracle wrap_round(const ConfidenceOracle& o, int digits);

/// Hard-label interface over a ConfidenceOracle; shares its counter.
class LabelOracle {
 public:
  explicit LabelOracle(ConfidenceOracle oracle) : oracle_(std::move(oracle)) {}

  std::size_t query(const Vec& x, std::int64_t point_id = kUntaggedPoint) const;
  std::vector<std::size_t> query_batch(const std::vector<Vec>& xs,
                                       std::int64_t point_id = kUntaggedPoint) const;

  std::size_t num_classes() const { return oracle_.num_classes(); }
  QueryCounter& counter() const { return oracle_.counter(); }
  const ConfidenceOracle& confidence_oracle() const { return oracle_; }

 private:
  ConfidenceOracle oracle_;
};

/// Applies one defense transform to a raw confidence vector (exposed for
/// tests; the oracle path uses the same code).
ConfidenceVector apply_defense(const ConfidenceVector& raw, const DefenseWrapperSpec& spec);

}  // namespace miaudit

#endif  // MIAUDIT_ORACLE_HPP

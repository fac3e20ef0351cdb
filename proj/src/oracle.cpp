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

#include "miaudit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "miaudit/errors.hpp"

namespace miaudit {

void QueryCounter::increment(std::int64_t point_id) {
  total_.fetch_add(1, std::memory_order_relaxed);
  if (point_id < 0) {
    untagged_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  ++per_point_[static_cast<std::uint64_t>(point_id)];
}

std::uint64_t QueryCounter::for_point(std::uint64_t id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = per_point_.find(id);
  return it == per_point_.end() ? 0 : it->second;
}

std::uint64_t QueryCounter::sum_of_parts() const {
  std::uint64_t s = untagged_.load();
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& [id, count] : per_point_) s += count;
  return s;
}

ConfidenceVector apply_defense(const ConfidenceVector& raw, const DefenseWrapperSpec& spec) {
  std::size_t k_classes = raw.scores.size();
  std::size_t predicted = argmax_index(raw.scores);
  ConfidenceVector out = raw;
  switch (spec.kind) {
    case DefenseKind::kNone:
      break;
    case DefenseKind::kMemguard: {
      double top = 1.0 / static_cast<double>(k_classes) + 0.01;
      double rest = (1.0 - top) / static_cast<double>(k_classes - 1);
      for (double& s : out.scores) s = rest;
      out.scores[predicted] = top;
      break;
    }
    case DefenseKind::kTopK: {
      std::size_t k = std::min(std::max<std::size_t>(spec.k, 1), k_classes);
      std::vector<std::size_t> idx(k_classes);
      std::iota(idx.begin(), idx.end(), 0);
      std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](std::size_t a, std::size_t b) {
        if (raw.scores[a] != raw.scores[b]) return raw.scores[a] > raw.scores[b];
        return a < b;
      });
      std::vector<bool> keep(k_classes, false);
      for (std::size_t i = 0; i < k; ++i) keep[idx[i]] = true;
      for (std::size_t i = 0; i < k_classes; ++i) {
        if (!keep[i]) out.scores[i] = 0.0;
      }
      break;
    }
    case DefenseKind::kRound: {
      double scale = std::pow(10.0, spec.digits);
      for (double& s : out.scores) s = std::round(s * scale) / scale;
      // Rounding can tie or flip the top score; restore the predicted class
      // as the strict argmax at the same precision.
      double max_other = -1.0;
      for (std::size_t i = 0; i < k_classes; ++i) {
        if (i != predicted) max_other = std::max(max_other, out.scores[i]);
      }
      if (out.scores[predicted] <= max_other) {
        out.scores[predicted] = max_other + 1.0 / scale;
      }
      break;
    }
  }
  return out;
}

ConfidenceOracle::ConfidenceOracle(const Classifier& model)
    : model_(&model), counter_(std::make_shared<QueryCounter>()) {}

ConfidenceVector ConfidenceOracle::query(const Vec& x, std::int64_t point_id) const {
  counter_->increment(point_id);
  ConfidenceVector conf = model_->confidences(x);
  for (const auto& d : defenses_) conf = apply_defense(conf, d);
  return conf;
}

ConfidenceOracle ConfidenceOracle::wrapped(const DefenseWrapperSpec& spec) const {
  ConfidenceOracle out = *this;
  if (spec.kind != DefenseKind::kNone) out.defenses_.push_back(spec);
  return out;
}

ConfidenceOracle wrap_memguard(const ConfidenceOracle& o) {
  if (o.num_classes() < 2) throw InvalidInputError("MemGuard needs K >= 2 classes");
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kMemguard;
  return o.wrapped(spec);
}

ConfidenceOracle wrap_topk(const ConfidenceOracle& o, std::size_t k) {
  if (k < 1 || k > o.num_classes()) throw InvalidInputError("top-k requires 1 <= k <= K");
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kTopK;
  spec.k = k;
  return o.wrapped(spec);
}

ConfidenceOracle wrap_round(const ConfidenceOracle& o, int digits) {
  if (digits < 0) throw InvalidInputError("round requires digits >= 0");
  DefenseWrapperSpec spec;
  spec.kind = DefenseKind::kRound;
  spec.digits = digits;
  return o.wrapped(spec);
}

std::size_t LabelOracle::query(const Vec& x, std::int64_t point_id) const {
  return argmax_index(oracle_.query(x, point_id).scores);
}

std::vector<std::size_t> LabelOracle::query_batch(const std::vector<Vec>& xs,
                                                  std::int64_t point_id) const {
  std::vector<std::size_t> labels(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) labels[i] = query(xs[i], point_id);
  return labels;
}

}  // namespace miaudit

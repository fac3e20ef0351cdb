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

#include "miaudit/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "miaudit/errors.hpp"

namespace miaudit {

void HsjaConfig::validate() const {
  if (!(binary_search_tolerance > 0.0)) throw InvalidInputError("theta must be positive");
  if (query_budget < init_attempts + iterations) {
    throw InvalidInputError("query budget must cover init attempts plus iterations");
  }
  if (gradient_samples_initial == 0) throw InvalidInputError("B0 must be positive");
}

DistanceEstimate analytic_linear_distance(const Vec& w, double b, const Vec& x) {
  double norm = l2_norm(w);
  if (norm == 0.0) throw DegenerateModelError("analytic distance needs nonzero weights");
  DistanceEstimate est;
  est.method = DistanceMethod::kAnalytic;
  est.value = std::abs(dot(w, x) + b) / norm;
  return est;
}

namespace {

// Walk state shared by the helpers below. All candidate points are clipped
// to the feature box before being queried.
struct WalkContext {
  const LabelOracle& oracle;
  const Vec& target;
  std::size_t y_true;
  const FeatureBox& box;
  std::uint64_t budget;
  std::int64_t point_id;
  std::uint64_t queries = 0;

  bool exhausted() const { return queries >= budget; }

  // True when the (clipped) point is on the adversarial side.
  bool is_adversarial(Vec& candidate) {
    box.clip(candidate);
    ++queries;
    return oracle.query(candidate, point_id) != y_true;
  }
};

// Bisects [inside, outside] until the bracket is narrower than theta or the
// budget runs out. Returns the adversarial-side endpoint.
Vec binary_search_boundary(WalkContext& ctx, Vec inside, Vec outside, double theta) {
  while (!ctx.exhausted() && l2_distance(inside, outside) > theta) {
    Vec mid(inside.size());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (inside[i] + outside[i]);
    if (ctx.is_adversarial(mid)) {
      outside = std::move(mid);
    } else {
      inside = std::move(mid);
    }
  }
  return outside;
}

}  // namespace

DistanceEstimate hsja_distance(const LabelOracle& oracle, const Vec& x, std::size_t y_true,
                               const FeatureBox& box, const HsjaConfig& cfg, RngStream& rng,
                               std::int64_t point_id) {
  cfg.validate();
  if (x.size() != box.dim()) throw InvalidInputError("point does not match feature box");

  DistanceEstimate est;
  est.method = DistanceMethod::kWalk;
  WalkContext ctx{oracle, x, y_true, box, cfg.query_budget, point_id};

  {
    Vec start = x;
    if (ctx.is_adversarial(start)) {
      // Misclassified points are on the boundary by definition.
      est.value = 0.0;
      est.queries_used = ctx.queries;
      est.trajectory.emplace_back(ctx.queries, 0.0);
      return est;
    }
  }

  // Random misclassified starting point inside the feature box.
  Vec adversarial;
  bool found = false;
  for (std::size_t attempt = 0; attempt < cfg.init_attempts && !ctx.exhausted(); ++attempt) {
    Vec candidate(x.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      candidate[i] = rng.uniform(box.lo[i], box.hi[i]);
    }
    if (ctx.is_adversarial(candidate)) {
      adversarial = std::move(candidate);
      found = true;
      break;
    }
  }
  if (!found) {
    est.value = std::numeric_limits<double>::infinity();
    est.converged = false;
    est.queries_used = ctx.queries;
    return est;
  }

  const double theta = cfg.binary_search_tolerance;
  Vec boundary = binary_search_boundary(ctx, x, adversarial, theta);
  double best = l2_distance(boundary, x);
  est.trajectory.emplace_back(ctx.queries, best);

  const std::size_t dim = x.size();
  const double b0 = static_cast<double>(cfg.gradient_samples_initial);
  std::size_t t = 0;
  while (!ctx.exhausted() && (cfg.iterations == 0 || t < cfg.iterations)) {
    // Monte-Carlo estimate of the boundary normal at `boundary`.
    std::size_t probes = static_cast<std::size_t>(
        std::lround(b0 * std::sqrt(static_cast<double>(t + 1))));
    probes = std::min<std::uint64_t>(probes, ctx.budget - ctx.queries);
    if (probes < 3) break;

    double delta = std::max(best / std::sqrt(static_cast<double>(dim)), 1e-8);
    std::vector<Vec> directions;
    std::vector<double> phi;
    directions.reserve(probes);
    phi.reserve(probes);
    for (std::size_t p = 0; p < probes; ++p) {
      Vec u = rng.unit_vector(dim);
      Vec probe(dim);
      for (std::size_t i = 0; i < dim; ++i) probe[i] = boundary[i] + delta * u[i];
      phi.push_back(ctx.is_adversarial(probe) ? 1.0 : -1.0);
      directions.push_back(std::move(u));
    }
    double mean_phi = 0.0;
    for (double v : phi) mean_phi += v;
    mean_phi /= static_cast<double>(phi.size());
    Vec direction(dim, 0.0);
    for (std::size_t p = 0; p < phi.size(); ++p) {
      double wgt = phi[p] - mean_phi;
      for (std::size_t i = 0; i < dim; ++i) direction[i] += wgt * directions[p][i];
    }
    double dn = l2_norm(direction);
    if (dn == 0.0) direction = directions.front();
    else {
      for (double& v : direction) v /= dn;
    }

    // Step into the adversarial side with geometric decay, then re-project.
    double step = best / std::sqrt(static_cast<double>(t + 1));
    bool stepped = false;
    Vec candidate;
    while (!ctx.exhausted() && step > 1e-10) {
      candidate.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) candidate[i] = boundary[i] + step * direction[i];
      if (ctx.is_adversarial(candidate)) {
        stepped = true;
        break;
      }
      step *= 0.5;
    }
    if (stepped) {
      Vec projected = binary_search_boundary(ctx, x, candidate, theta);
      double dist = l2_distance(projected, x);
      if (dist < best) {
        best = dist;
        boundary = std::move(projected);
      }
    }
    est.trajectory.emplace_back(ctx.queries, best);
    ++t;
  }

  est.value = best;
  est.queries_used = ctx.queries;
  return est;
}

DistanceEstimate whitebox_distance(const Classifier& model, const Vec& x, std::size_t y_true,
                                   std::size_t steps) {
  DistanceEstimate est;
  est.method = DistanceMethod::kWhiteBox;
  const std::size_t num_classes = model.architecture().num_classes;

  auto margin = [&](const Vec& p) {
    Vec logits = model.logits(p);
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (j != y_true) best_other = std::max(best_other, logits[j]);
    }
    return logits[y_true] - best_other;
  };

  if (margin(x) <= 0.0) {
    est.value = 0.0;
    return est;
  }

  // Bisect the segment [x, outside] to within 1e-5 of the boundary; the
  // returned point is on the adversarial side.
  auto project = [&](const Vec& outside_in) {
    Vec inside = x, outside = outside_in;
    while (l2_distance(inside, outside) > 1e-5) {
      Vec mid(inside.size());
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (inside[i] + outside[i]);
      if (margin(mid) <= 0.0) {
        outside = std::move(mid);
      } else {
        inside = std::move(mid);
      }
    }
    return outside;
  };

  // Phase 1: DeepFool-style descent. Each step targets the class with the
  // smallest normalized pairwise margin.
  Vec cur = x;
  bool crossed = false;
  for (std::size_t s = 0; s < steps; ++s) {
    Vec logits = model.logits(cur);
    if (argmax_index(logits) != y_true) {
      crossed = true;
      break;
    }
    double best_ratio = std::numeric_limits<double>::infinity();
    Vec best_grad;
    double best_margin = 0.0;
    for (std::size_t j = 0; j < num_classes; ++j) {
      if (j == y_true) continue;
      Vec g = model.margin_gradient(cur, y_true, j);
      double gn = l2_norm(g);
      if (gn == 0.0) continue;
      double m = logits[y_true] - logits[j];
      double ratio = m / gn;
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_grad = std::move(g);
        best_margin = m;
      }
    }
    if (best_grad.empty()) break;
    double gn2 = dot(best_grad, best_grad);
    double scale = 1.02 * best_margin / gn2;
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] -= scale * best_grad[i];
  }
  if (!crossed && margin(cur) <= 0.0) crossed = true;

  if (!crossed) {
    est.value = l2_distance(cur, x);
    est.converged = false;
    return est;
  }

  // Phase 2: slide along the boundary toward x. Move tangentially (the
  // component of x - bd orthogonal to the local normal) with a small
  // adversarial push, re-project, and keep strict improvements.
  Vec bd = project(cur);
  double best = l2_distance(bd, x);
  double eta = 0.5;
  for (std::size_t round = 0; round < 4 * steps && eta > 1e-4; ++round) {
    Vec g = model.input_gradient(bd, y_true);
    double gn = l2_norm(g);
    if (gn == 0.0) break;
    Vec toward(bd.size());
    for (std::size_t i = 0; i < bd.size(); ++i) toward[i] = x[i] - bd[i];
    double along = dot(toward, g) / gn;
    Vec tangent(bd.size());
    for (std::size_t i = 0; i < bd.size(); ++i) tangent[i] = toward[i] - along * g[i] / gn;
    double tn = l2_norm(tangent);
    if (tn < 1e-9 * std::max(1.0, best)) break;

    Vec candidate(bd.size());
    double push = 0.1 * eta * tn;  // keep the trial point adversarial
    for (std::size_t i = 0; i < bd.size(); ++i) {
      candidate[i] = bd[i] + eta * tangent[i] - push * g[i] / gn;
    }
    if (margin(candidate) <= 0.0) {
      Vec projected = project(candidate);
      double dist = l2_distance(projected, x);
      if (dist < best - 1e-12) {
        best = dist;
        bd = std::move(projected);
        continue;
      }
    }
    eta *= 0.5;
  }

  est.value = best;
  return est;
}

double noise_robustness(const LabelOracle& oracle, const Vec& x, std::size_t y_true,
                        const FeatureSchema& schema, const NoiseRobustnessConfig& cfg,
                        RngStream& rng, std::int64_t point_id) {
  if (cfg.num_queries < 1) throw InvalidInputError("noise robustness needs N >= 1");
  if (oracle.query(x, point_id) != y_true) return 0.0;  // one query, misclassified

  std::vector<Vec> perturbed =
      cfg.kind == NoiseRobustnessConfig::Kind::kGaussian
          ? gaussian_perturb(x, schema, cfg.sigma, cfg.num_queries, rng)
          : bernoulli_perturb(x, schema, cfg.flip_prob, cfg.num_queries, rng);
  std::size_t kept = 0;
  for (const Vec& q : perturbed) {
    if (oracle.query(q, point_id) == y_true) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(cfg.num_queries);
}

std::vector<DistanceEstimate> combined_distances(const LabelOracle& oracle,
                                                 const ExampleRecord& x,
                                                 const FeatureSchema& schema,
                                                 const AugmentationSpec& aug,
                                                 const FeatureBox& box, const HsjaConfig& cfg,
                                                 RngStream& rng, std::int64_t point_id) {
  if (!schema.is_image()) throw SchemaError("combined distances require an image schema");
  std::vector<Vec> queries = augmentation_set(x, schema, aug);
  std::vector<DistanceEstimate> estimates;
  estimates.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    RngStream sub = rng.split(i);
    estimates.push_back(
        hsja_distance(oracle, queries[i], x.y_true, box, cfg, sub, point_id));
  }
  return estimates;
}

}  // namespace miaudit

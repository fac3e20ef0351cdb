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

#include "miaudit/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "miaudit/errors.hpp"

namespace miaudit {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Bump {
  double cy, cx, sigma, amplitude;
};

double render_bumps(const std::vector<Bump>& bumps, double y, double x) {
  double v = 0.0;
  for (const Bump& b : bumps) {
    double dy = y - b.cy, dx = x - b.cx;
    v += b.amplitude * std::exp(-(dy * dy + dx * dx) / (2.0 * b.sigma * b.sigma));
  }
  return v;
}

}  // namespace

Dataset make_blobs(const BlobsParams& p, RngStream& rng) {
  if (p.num_classes < 2 || p.dim == 0 || p.count == 0) {
    throw InvalidInputError("make_blobs: bad parameters");
  }
  Dataset ds;
  ds.schema.num_classes = p.num_classes;
  ds.schema.feature_kinds.assign(p.dim, FeatureKind::kContinuous);

  std::vector<Vec> centers(p.num_classes, Vec(p.dim));
  for (auto& c : centers) {
    for (double& v : c) v = rng.normal(0.0, p.center_scale);
  }
  ds.records.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    ExampleRecord rec;
    rec.id = i;
    rec.y_true = i % p.num_classes;  // balanced classes
    rec.x.resize(p.dim);
    for (std::size_t d = 0; d < p.dim; ++d) {
      rec.x[d] = centers[rec.y_true][d] + rng.normal(0.0, p.noise_sigma);
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset make_glyphs(const GlyphsParams& p, RngStream& rng) {
  if (p.num_classes < 2 || p.count == 0) throw InvalidInputError("make_glyphs: bad parameters");
  const std::size_t h = p.height, w = p.width;
  Dataset ds;
  ds.schema.num_classes = p.num_classes;
  ds.schema.image_shape = ImageShape{h, w, 1};
  ds.schema.feature_kinds.assign(h * w, FeatureKind::kImagePixel);

  // Class templates, each from its own child stream.
  std::vector<std::vector<Bump>> templates(p.num_classes);
  double min_dim = static_cast<double>(std::min(h, w));
  for (std::size_t c = 0; c < p.num_classes; ++c) {
    RngStream cls = rng.split(0x70000 + c);
    for (std::size_t b = 0; b < p.bumps_per_class; ++b) {
      Bump bump;
      bump.cy = cls.uniform(0.2, 0.8) * static_cast<double>(h - 1);
      bump.cx = cls.uniform(0.2, 0.8) * static_cast<double>(w - 1);
      bump.sigma = cls.uniform(0.08, 0.16) * min_dim * p.bump_width_scale;
      bump.amplitude = cls.uniform(0.55, 1.0);
      templates[c].push_back(bump);
    }
  }

  double cy0 = (static_cast<double>(h) - 1.0) / 2.0;
  double cx0 = (static_cast<double>(w) - 1.0) / 2.0;
  ds.records.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    RngStream sample = rng.split(0x90000 + i);
    ExampleRecord rec;
    rec.id = i;
    rec.y_true = i % p.num_classes;

    double theta = sample.uniform(-p.max_rotation_degrees, p.max_rotation_degrees) * kPi / 180.0;
    double shift_y = sample.uniform(-p.max_shift_pixels, p.max_shift_pixels);
    double shift_x = sample.uniform(-p.max_shift_pixels, p.max_shift_pixels);
    Bump distortion;
    distortion.cy = sample.uniform(0.15, 0.85) * static_cast<double>(h - 1);
    distortion.cx = sample.uniform(0.15, 0.85) * static_cast<double>(w - 1);
    distortion.sigma = sample.uniform(0.05, 0.1) * min_dim * p.bump_width_scale;
    distortion.amplitude = sample.uniform(0.5, 1.0) * p.distortion;

    double cos_t = std::cos(theta), sin_t = std::sin(theta);
    rec.x.resize(h * w);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        // Sample the template at the inverse-warped position.
        double dy = static_cast<double>(y) - cy0 - shift_y;
        double dx = static_cast<double>(x) - cx0 - shift_x;
        double sy = cy0 + (sin_t * dx + cos_t * dy);
        double sx = cx0 + (cos_t * dx - sin_t * dy);
        double v = render_bumps(templates[rec.y_true], sy, sx);
        v += render_bumps({distortion}, static_cast<double>(y), static_cast<double>(x));
        v += sample.normal(0.0, p.pixel_noise);
        rec.x[y * w + x] = std::min(std::max(v, 0.0), 1.0);
      }
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset make_bitstrings(const BitstringsParams& p, RngStream& rng) {
  if (p.num_classes < 2 || p.dim == 0 || p.count == 0) {
    throw InvalidInputError("make_bitstrings: bad parameters");
  }
  Dataset ds;
  ds.schema.num_classes = p.num_classes;
  ds.schema.feature_kinds.assign(p.dim, FeatureKind::kBinary);

  std::vector<Vec> templates(p.num_classes, Vec(p.dim));
  for (std::size_t c = 0; c < p.num_classes; ++c) {
    RngStream cls = rng.split(0xb0000 + c);
    for (double& v : templates[c]) v = cls.bernoulli(p.template_density) ? 1.0 : 0.0;
  }
  ds.records.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    RngStream sample = rng.split(0xd0000 + i);
    ExampleRecord rec;
    rec.id = i;
    rec.y_true = i % p.num_classes;
    rec.x = templates[rec.y_true];
    for (double& v : rec.x) {
      if (sample.bernoulli(p.flip_prob)) v = 1.0 - v;
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset make_mixed(const MixedParams& p, RngStream& rng) {
  if (p.count == 0 || (p.dim_continuous == 0 && p.dim_binary == 0)) {
    throw InvalidInputError("make_mixed: bad parameters");
  }
  Dataset ds;
  ds.schema.num_classes = 2;
  ds.schema.feature_kinds.assign(p.dim_continuous, FeatureKind::kContinuous);
  ds.schema.feature_kinds.insert(ds.schema.feature_kinds.end(), p.dim_binary,
                                 FeatureKind::kBinary);
  std::size_t dim = p.dim_continuous + p.dim_binary;

  // Fixed random teacher: linear part plus a couple of pairwise interactions.
  RngStream teacher = rng.split(0x7eac);
  Vec w(dim);
  for (double& v : w) v = teacher.normal();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int k = 0; k < 6; ++k) {
    pairs.emplace_back(teacher.uniform_int(dim), teacher.uniform_int(dim));
  }
  Vec pair_w(pairs.size());
  for (double& v : pair_w) v = 2.0 * teacher.normal();

  ds.records.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    RngStream sample = rng.split(0xf0000 + i);
    ExampleRecord rec;
    rec.id = i;
    rec.x.resize(dim);
    for (std::size_t d = 0; d < p.dim_continuous; ++d) rec.x[d] = sample.normal();
    for (std::size_t d = p.dim_continuous; d < dim; ++d) {
      rec.x[d] = sample.bernoulli(0.5) ? 1.0 : 0.0;
    }
    double score = dot(w, rec.x);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      score += pair_w[k] * rec.x[pairs[k].first] * rec.x[pairs[k].second];
    }
    rec.y_true = score > 0.0 ? 1 : 0;
    if (sample.bernoulli(p.label_noise)) rec.y_true = 1 - rec.y_true;
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace miaudit

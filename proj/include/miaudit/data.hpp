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

#ifndef MIAUDIT_DATA_HPP
#define MIAUDIT_DATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "miaudit/numerics.hpp"

namespace miaudit {

enum class FeatureKind { kContinuous, kBinary, kImagePixel };

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;

  std::size_t pixel_count() const { return height * width * channels; }
};

/// Per-feature typing plus the label space. Image features are stored
/// channel-major: index = c*H*W + y*W + x, pixel values in [0,1].
struct FeatureSchema {
  std::vector<FeatureKind> feature_kinds;
  std::optional<ImageShape> image_shape;
  std::size_t num_classes = 0;

  std::size_t num_features() const { return feature_kinds.size(); }
  bool is_image() const { return image_shape.has_value(); }
  bool has_kind(FeatureKind k) const;

  /// Throws SchemaError when the image shape and feature count disagree.
  void validate() const;
};

struct ExampleRecord {
  std::uint64_t id = 0;  // record identity within one loaded dataset
  Vec x;
  std::size_t y_true = 0;
};

/// Throws SchemaError if the record violates the schema invariants
/// (label range, finiteness, {0,1} for binary, [0,1] for pixels).
void validate_record(const ExampleRecord& rec, const FeatureSchema& schema);

struct Dataset {
  FeatureSchema schema;
  std::vector<ExampleRecord> records;
};

/// Four pairwise-disjoint, equally sized subsets drawn from one pool.
struct SplitBundle {
  std::vector<ExampleRecord> target_train;
  std::vector<ExampleRecord> target_test;
  std::vector<ExampleRecord> shadow_train;
  std::vector<ExampleRecord> shadow_test;
  std::uint64_t seed = 0;
};

enum class AugmentationKind { kRotation, kTranslation };

/// Query-construction recipe for the augmentation attacks.
/// Rotation produces N=3 queries (source, +r, -r); translation produces
/// N=4d+1 queries (source plus every |i|+|j| = d offset).
struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::kTranslation;
  double rotation_degrees = 0.0;  // r in [1, 15]
  int translation_pixels = 0;     // d >= 1

  std::size_t query_count() const;
  void validate() const;
};

/// Per-coordinate bounds used for random initialization and clipping in the
/// boundary walk: [0,1] for pixels and binary features, empirical min/max
/// for continuous features.
struct FeatureBox {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return lo.size(); }
  double diameter() const;
  void clip(Vec& x) const;
};

FeatureBox feature_box_for(const FeatureSchema& schema,
                           const std::vector<ExampleRecord>& records);

// -- Ingestion ---------------------------------------------------------------

/// Sidecar description of a CSV dataset: column kinds plus the label column.
struct TabularSchema {
  FeatureSchema schema;
  std::vector<std::string> feature_columns;  // order defines feature indices
  std::string label_column;
};

/// Parses the JSON sidecar: {"num_classes": K, "label": "col",
/// "features": [{"name": ..., "kind": "continuous"|"binary"}, ...]}.
TabularSchema load_tabular_schema(const std::string& path);

/// Loads a header-row CSV against the sidecar schema. Row order is
/// preserved; every record is validated. Labels must be integers in [0, K).
std::vector<ExampleRecord> load_tabular(const std::string& path, const TabularSchema& schema);

/// Loads an IDX image/label file pair (big-endian, magic 0x00000803 /
/// 0x00000801, as distributed for MNIST). Pixels are scaled to [0,1].
Dataset load_idx_images(const std::string& images_path, const std::string& labels_path);

// -- Splitting ---------------------------------------------------------------

/// Uniform random assignment of 4*per_split_size records into the four
/// disjoint subsets. Deterministic given the stream.
SplitBundle split_disjoint(const std::vector<ExampleRecord>& records,
                           std::size_t per_split_size, RngStream& rng);

// -- Perturbations -----------------------------------------------------------

/// Rotation about the image center using bilinear interpolation; samples
/// falling outside the source are filled with 0 and output is clipped to [0,1].
Vec rotate(const ExampleRecord& image, const FeatureSchema& schema, double degrees);

/// Integer pixel shift with zero padding; dx shifts right, dy shifts down.
Vec translate(const ExampleRecord& image, const FeatureSchema& schema, int dx, int dy);

/// The ordered offsets |i|+|j| = d, clockwise starting at (+d, 0). This
/// order is part of the bit-vector file format contract: attack classifiers
/// consume bits positionally and must see the same order on every model.
std::vector<std::pair<int, int>> translation_offsets(int d);

/// The ordered query list for one target point, source image first.
std::vector<Vec> augmentation_set(const ExampleRecord& x, const FeatureSchema& schema,
                                  const AugmentationSpec& spec);

/// n independent draws of x + N(0, sigma^2 I) over the continuous/pixel
/// coordinates. Requires at least one such coordinate.
std::vector<Vec> gaussian_perturb(const Vec& x, const FeatureSchema& schema, double sigma,
                                  std::size_t n, RngStream& rng);

/// n independent draws flipping each binary coordinate with probability p.
/// Requires at least one binary coordinate.
std::vector<Vec> bernoulli_perturb(const Vec& x, const FeatureSchema& schema, double p,
                                   std::size_t n, RngStream& rng);

}  // namespace miaudit

#endif  // MIAUDIT_DATA_HPP

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

#include "miaudit/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "miaudit/errors.hpp"

namespace miaudit {

namespace {

constexpr double kPi = 3.14159265358979323846;

FeatureKind parse_kind(const std::string& s) {
  if (s == "continuous") return FeatureKind::kContinuous;
  if (s == "binary") return FeatureKind::kBinary;
  if (s == "image-pixel") return FeatureKind::kImagePixel;
  throw SchemaError("unknown feature kind: " + s);
}

std::uint32_t read_be_u32(std::istream& in, const char* what) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw FormatError(std::string("IDX file truncated reading ") + what);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

bool FeatureSchema::has_kind(FeatureKind k) const {
  return std::find(feature_kinds.begin(), feature_kinds.end(), k) != feature_kinds.end();
}

void FeatureSchema::validate() const {
  if (num_classes < 2) throw SchemaError("schema needs at least 2 classes");
  bool any_pixel = has_kind(FeatureKind::kImagePixel);
  if (any_pixel) {
    if (!image_shape) throw SchemaError("image-pixel features require an image shape");
    if (image_shape->pixel_count() != feature_kinds.size()) {
      throw SchemaError("image shape does not match feature count");
    }
  }
}

void validate_record(const ExampleRecord& rec, const FeatureSchema& schema) {
  if (rec.x.size() != schema.num_features()) {
    throw SchemaError("record width does not match schema");
  }
  if (rec.y_true >= schema.num_classes) throw SchemaError("label out of range");
  for (std::size_t i = 0; i < rec.x.size(); ++i) {
    double v = rec.x[i];
    if (!std::isfinite(v)) throw SchemaError("non-finite feature value");
    switch (schema.feature_kinds[i]) {
      case FeatureKind::kBinary:
        if (v != 0.0 && v != 1.0) throw SchemaError("binary feature outside {0,1}");
        break;
      case FeatureKind::kImagePixel:
        if (v < 0.0 || v > 1.0) throw SchemaError("pixel outside [0,1]");
        break;
      case FeatureKind::kContinuous:
        break;
    }
  }
}

std::size_t AugmentationSpec::query_count() const {
  return kind == AugmentationKind::kRotation ? 3
                                             : static_cast<std::size_t>(4 * translation_pixels + 1);
}

void AugmentationSpec::validate() const {
  if (kind == AugmentationKind::kRotation) {
    if (rotation_degrees < 1.0 || rotation_degrees > 15.0) {
      throw InvalidInputError("rotation magnitude r must be in [1, 15] degrees");
    }
  } else {
    if (translation_pixels < 1) throw InvalidInputError("translation bound d must be >= 1");
  }
}

double FeatureBox::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    double d = hi[i] - lo[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void FeatureBox::clip(Vec& x) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
  }
}

FeatureBox feature_box_for(const FeatureSchema& schema,
                           const std::vector<ExampleRecord>& records) {
  std::size_t d = schema.num_features();
  FeatureBox box;
  box.lo.assign(d, 0.0);
  box.hi.assign(d, 1.0);
  for (std::size_t i = 0; i < d; ++i) {
    if (schema.feature_kinds[i] != FeatureKind::kContinuous) continue;
    if (records.empty()) throw InvalidInputError("continuous features need records to bound");
    double lo = records.front().x[i], hi = lo;
    for (const auto& r : records) {
      lo = std::min(lo, r.x[i]);
      hi = std::max(hi, r.x[i]);
    }
    box.lo[i] = lo;
    box.hi[i] = hi;
  }
  return box;
}

// -- Ingestion ---------------------------------------------------------------

TabularSchema load_tabular_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("schema JSON: " + std::string(e.what()));
  }
  TabularSchema ts;
  if (!j.contains("num_classes") || !j.contains("label") || !j.contains("features")) {
    throw SchemaError("schema JSON needs num_classes, label and features");
  }
  ts.schema.num_classes = j["num_classes"].get<std::size_t>();
  ts.label_column = j["label"].get<std::string>();
  for (const auto& f : j["features"]) {
    ts.feature_columns.push_back(f["name"].get<std::string>());
    ts.schema.feature_kinds.push_back(parse_kind(f["kind"].get<std::string>()));
  }
  ts.schema.validate();
  return ts;
}

std::vector<ExampleRecord> load_tabular(const std::string& path, const TabularSchema& ts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV file has no header row", 1);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("CSV is missing column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> feature_cols;
  for (const auto& name : ts.feature_columns) feature_cols.push_back(column_of(name));
  std::size_t label_col = column_of(ts.label_column);

  std::vector<ExampleRecord> records;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header.size()),
                       line_no);
    }
    ExampleRecord rec;
    rec.id = records.size();
    rec.x.resize(feature_cols.size());
    for (std::size_t i = 0; i < feature_cols.size(); ++i) {
      double v;
      try {
        v = std::stod(cells[feature_cols[i]]);
      } catch (const std::exception&) {
        throw ParseError("non-numeric value '" + cells[feature_cols[i]] + "'", line_no);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", line_no);
      if (ts.schema.feature_kinds[i] == FeatureKind::kBinary && v != 0.0 && v != 1.0) {
        throw ParseError("binary feature value must be 0 or 1, got " + cells[feature_cols[i]],
                         line_no);
      }
      rec.x[i] = v;
    }
    double label;
    try {
      label = std::stod(cells[label_col]);
    } catch (const std::exception&) {
      throw ParseError("non-numeric label '" + cells[label_col] + "'", line_no);
    }
    if (label < 0 || label != std::floor(label) ||
        label >= static_cast<double>(ts.schema.num_classes)) {
      throw ParseError("label outside [0, num_classes)", line_no);
    }
    rec.y_true = static_cast<std::size_t>(label);
    records.push_back(std::move(rec));
  }
  return records;
}

Dataset load_idx_images(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open IDX image file: " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot open IDX label file: " + labels_path);

  if (read_be_u32(img, "image magic") != 0x00000803u) {
    throw FormatError("bad IDX image magic (expected 0x00000803)");
  }
  std::uint32_t count = read_be_u32(img, "image count");
  std::uint32_t rows = read_be_u32(img, "rows");
  std::uint32_t cols = read_be_u32(img, "cols");

  if (read_be_u32(lab, "label magic") != 0x00000801u) {
    throw FormatError("bad IDX label magic (expected 0x00000801)");
  }
  std::uint32_t label_count = read_be_u32(lab, "label count");
  if (label_count != count) throw FormatError("IDX image/label counts disagree");

  Dataset ds;
  ds.schema.image_shape = ImageShape{rows, cols, 1};
  ds.schema.feature_kinds.assign(static_cast<std::size_t>(rows) * cols,
                                 FeatureKind::kImagePixel);

  std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  std::size_t max_label = 0;
  ds.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
    if (!img) throw FormatError("IDX image file truncated at record " + std::to_string(i));
    char label_byte;
    lab.read(&label_byte, 1);
    if (!lab) throw FormatError("IDX label file truncated at record " + std::to_string(i));

    ExampleRecord rec;
    rec.id = i;
    rec.x.resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p) rec.x[p] = buf[p] / 255.0;
    rec.y_true = static_cast<unsigned char>(label_byte);
    max_label = std::max(max_label, rec.y_true);
    ds.records.push_back(std::move(rec));
  }
  ds.schema.num_classes = std::max<std::size_t>(max_label + 1, 2);
  ds.schema.validate();
  return ds;
}

// -- Splitting ---------------------------------------------------------------

SplitBundle split_disjoint(const std::vector<ExampleRecord>& records,
                           std::size_t per_split_size, RngStream& rng) {
  if (records.size() < 4 * per_split_size) {
    throw SizeError("split_disjoint needs >= 4n records, have " +
                    std::to_string(records.size()) + " for n=" + std::to_string(per_split_size));
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  SplitBundle bundle;
  bundle.seed = rng.seed();
  auto take = [&](std::size_t from) {
    std::vector<ExampleRecord> out;
    out.reserve(per_split_size);
    for (std::size_t i = 0; i < per_split_size; ++i) out.push_back(records[order[from + i]]);
    return out;
  };
  bundle.target_train = take(0);
  bundle.target_test = take(per_split_size);
  bundle.shadow_train = take(2 * per_split_size);
  bundle.shadow_test = take(3 * per_split_size);
  return bundle;
}

// -- Perturbations -----------------------------------------------------------

Vec rotate(const ExampleRecord& image, const FeatureSchema& schema, double degrees) {
  if (!schema.is_image()) throw SchemaError("rotate requires an image schema");
  const ImageShape& shape = *schema.image_shape;
  const std::size_t h = shape.height, w = shape.width, c = shape.channels;

  // Inverse mapping: each output pixel samples the source at the position
  // obtained by rotating back about the image center. Positive degrees
  // rotate the content counterclockwise (x right, y down).
  double theta = degrees * kPi / 180.0;
  double cos_t = std::cos(theta), sin_t = std::sin(theta);
  double cy = (static_cast<double>(h) - 1.0) / 2.0;
  double cx = (static_cast<double>(w) - 1.0) / 2.0;

  Vec out(image.x.size(), 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = image.x.data() + ch * h * w;
    double* dst = out.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double dy = static_cast<double>(y) - cy;
        double dx = static_cast<double>(x) - cx;
        double sy = cy + (sin_t * dx + cos_t * dy);
        double sx = cx + (cos_t * dx - sin_t * dy);
        double y0f = std::floor(sy), x0f = std::floor(sx);
        long y0 = static_cast<long>(y0f), x0 = static_cast<long>(x0f);
        double fy = sy - y0f, fx = sx - x0f;
        auto sample = [&](long yy, long xx) -> double {
          if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) {
            return 0.0;
          }
          return src[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)];
        };
        double v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                   fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
        dst[y * w + x] = std::min(std::max(v, 0.0), 1.0);
      }
    }
  }
  return out;
}

Vec translate(const ExampleRecord& image, const FeatureSchema& schema, int dx, int dy) {
  if (!schema.is_image()) throw SchemaError("translate requires an image schema");
  const ImageShape& shape = *schema.image_shape;
  const long h = static_cast<long>(shape.height), w = static_cast<long>(shape.width);
  if (std::abs(dx) >= w || std::abs(dy) >= h) {
    throw InvalidInputError("translation exceeds image size");
  }
  Vec out(image.x.size(), 0.0);
  for (std::size_t ch = 0; ch < shape.channels; ++ch) {
    const double* src = image.x.data() + ch * h * w;
    double* dst = out.data() + ch * h * w;
    for (long y = 0; y < h; ++y) {
      long sy = y - dy;
      if (sy < 0 || sy >= h) continue;
      for (long x = 0; x < w; ++x) {
        long sx = x - dx;
        if (sx < 0 || sx >= w) continue;
        dst[y * w + x] = src[sy * w + sx];
      }
    }
  }
  return out;
}

std::vector<std::pair<int, int>> translation_offsets(int d) {
  // Clockwise on screen (x right, y down) starting at (+d, 0):
  // right -> bottom -> left -> top.
  std::vector<std::pair<int, int>> offsets;
  offsets.reserve(static_cast<std::size_t>(4 * d));
  for (int k = 0; k < d; ++k) offsets.emplace_back(d - k, k);
  for (int k = 0; k < d; ++k) offsets.emplace_back(-k, d - k);
  for (int k = 0; k < d; ++k) offsets.emplace_back(-(d - k), -k);
  for (int k = 0; k < d; ++k) offsets.emplace_back(k, -(d - k));
  return offsets;
}

std::vector<Vec> augmentation_set(const ExampleRecord& x, const FeatureSchema& schema,
                                  const AugmentationSpec& spec) {
  spec.validate();
  std::vector<Vec> queries;
  queries.push_back(x.x);  // source image first, in both modes
  if (spec.kind == AugmentationKind::kRotation) {
    queries.push_back(rotate(x, schema, +spec.rotation_degrees));
    queries.push_back(rotate(x, schema, -spec.rotation_degrees));
  } else {
    for (auto [i, j] : translation_offsets(spec.translation_pixels)) {
      queries.push_back(translate(x, schema, i, j));
    }
  }
  return queries;
}

std::vector<Vec> gaussian_perturb(const Vec& x, const FeatureSchema& schema, double sigma,
                                  std::size_t n, RngStream& rng) {
  if (!(sigma > 0.0)) throw InvalidInputError("gaussian_perturb: sigma must be positive");
  bool any = false;
  for (auto k : schema.feature_kinds) any |= (k != FeatureKind::kBinary);
  if (!any) throw SchemaError("gaussian_perturb needs continuous or pixel features");
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec q = x;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (schema.feature_kinds[j] != FeatureKind::kBinary) q[j] += rng.normal(0.0, sigma);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Vec> bernoulli_perturb(const Vec& x, const FeatureSchema& schema, double p,
                                   std::size_t n, RngStream& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInputError("bernoulli_perturb: p must be in (0,1]");
  if (!schema.has_kind(FeatureKind::kBinary)) {
    throw SchemaError("bernoulli_perturb needs binary features");
  }
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec q = x;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (schema.feature_kinds[j] == FeatureKind::kBinary && rng.bernoulli(p)) {
        q[j] = 1.0 - q[j];
      }
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace miaudit

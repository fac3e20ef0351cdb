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

#ifndef MIAUDIT_SYNTHETIC_HPP
#define MIAUDIT_SYNTHETIC_HPP

#include "miaudit/data.hpp"

namespace miaudit {

// Deterministic surrogate dataset generators. These stand in for public
// datasets when running offline: each family is tuned so small models
// reproduce a recorded train-test gap, which the experiment configs under
// configs/ document per run.

/// Gaussian class clusters over continuous features.
struct BlobsParams {
  std::size_t num_classes = 2;
  std::size_t dim = 2;
  std::size_t count = 400;
  double center_scale = 4.0;  // cluster centers drawn from N(0, center_scale^2)
  double noise_sigma = 1.0;   // within-cluster spread
};
Dataset make_blobs(const BlobsParams& params, RngStream& rng);

/// Procedural grayscale glyphs: each class is a smooth template of Gaussian
/// bumps; samples jitter it with a small affine warp, a private distortion
/// bump and pixel noise. The distortion gives per-sample detail a model can
/// memorize, which is what the membership attacks feed on.
struct GlyphsParams {
  std::size_t num_classes = 10;
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t count = 4000;
  std::size_t bumps_per_class = 6;
  double max_rotation_degrees = 18.0;
  double max_shift_pixels = 2.0;
  double distortion = 0.55;     // amplitude of the per-sample bump
  double pixel_noise = 0.18;    // additive Gaussian sigma before clipping
  double bump_width_scale = 1.0;  // multiplies the base bump radii
};
Dataset make_glyphs(const GlyphsParams& params, RngStream& rng);

/// Binary purchase-record style data: random class template bit vectors,
/// samples flip each bit independently.
struct BitstringsParams {
  std::size_t num_classes = 100;
  std::size_t dim = 600;
  std::size_t count = 40000;
  double template_density = 0.5;
  double flip_prob = 0.15;
};
Dataset make_bitstrings(const BitstringsParams& params, RngStream& rng);

/// Two-class mixed continuous/binary data with an irreducible label-noise
/// floor, census-style: a fixed random nonlinear teacher labels each point,
/// then labels are flipped with probability label_noise.
struct MixedParams {
  std::size_t dim_continuous = 6;
  std::size_t dim_binary = 24;
  std::size_t count = 20000;
  double label_noise = 0.15;
};
Dataset make_mixed(const MixedParams& params, RngStream& rng);

}  // namespace miaudit

#endif  // MIAUDIT_SYNTHETIC_HPP

/*
 * drcascade: jointly trained deep regression cascade for landmark localisation
 *
 * Copyright 2026 The drcascade Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "drc/sample.hpp"
#include "drc/shape.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace drc {

/**
 * Random faces made of Gaussian blobs, one per landmark, over a noisy
 * background. Each sample draws a similarity transform of the base polygon
 * plus per-landmark jitter; landmarks are kept at least `margin` pixels from
 * the border by rejection.
 */
struct SyntheticConfig {
    std::size_t num_landmarks = 5;
    int image_size = 72;
    std::size_t sample_count = 100;
    /// Landmark offsets from the image centre. Empty selects a built-in
    /// polygon: a five-point face (eyes, nose, mouth corners) for P = 5,
    /// otherwise points on an ellipse.
    std::vector<Eigen::Vector2d> base_polygon;
    /// Multiplies the built-in five-point face (eye spacing 20 px at 1).
    double face_scale = 1.0;
    double scale_min = 0.9;
    double scale_max = 1.1;
    double rotation_deg = 15.0;
    double translation = 3.0;
    double jitter_sigma = 1.5;
    double blob_sigma = 2.0;
    double blob_contrast = 0.6;
    double contrast_jitter = 0.2;
    double background = 0.25;
    double noise_sigma = 0.03;
    int margin = 16;
    std::uint64_t seed = 1;

    void validate() const;
};

std::vector<Eigen::Vector2d> synthetic_base_polygon(const SyntheticConfig& cfg);

/// Flip permutation and eye subsets matching the synthetic polygon.
LandmarkLayout synthetic_layout(const SyntheticConfig& cfg);

/// Pure function of the config, seed included.
std::vector<FaceSample> generate_synthetic(const SyntheticConfig& cfg);

} // namespace drc

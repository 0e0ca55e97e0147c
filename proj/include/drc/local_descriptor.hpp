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

#include "drc/response_maps.hpp"
#include "drc/shape.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace drc {

inline constexpr int kSpatialBins = 4;
inline constexpr Eigen::Index kDescriptorDim = kSpatialBins * kSpatialBins * kOrientationBins; // 128

using LandmarkDescriptor = Eigen::Matrix<double, kDescriptorDim, 1>;

/// SIFT-like descriptor read from ResponseMaps: a patch_size window split into
/// 4 x 4 cells, 8 orientation sums each.
struct LocalDescriptorConfig {
    int patch_size = 32;
    double epsilon = 2.0;    ///< central-difference step for the shape Jacobian, pixels
    double blur_sigma = 0.0; ///< response-map blur; 0 selects patch_size / 8

    double effective_sigma() const { return blur_sigma > 0.0 ? blur_sigma : patch_size / 8.0; }
    void validate() const;

    bool operator==(const LocalDescriptorConfig&) const = default;
};

/// Derivative of the concatenated descriptor w.r.t. the shape. Only the
/// diagonal blocks are stored: block p is 128 x 2 (d/dx_p, d/dy_p).
struct FeatureJacobian {
    std::vector<Eigen::Matrix<double, kDescriptorDim, 2>> blocks;

    /// Assembles the full 128P x 2P block-diagonal matrix.
    Eigen::MatrixXd dense() const;
};

/// Descriptor of one landmark. The window is anchored at the nearest integer
/// pixel to (x, y); the 128 values are L2-normalised with a 1e-6 norm floor.
LandmarkDescriptor extract_landmark(const ResponseMaps& maps, double x, double y, const LocalDescriptorConfig& cfg);

/// Concatenation of extract_landmark over all landmarks (128P values).
Eigen::VectorXd extract_local(const ResponseMaps& maps, const Shape& s, const LocalDescriptorConfig& cfg);

/// Central differences of each landmark's descriptor with step cfg.epsilon.
FeatureJacobian local_jacobian(const ResponseMaps& maps, const Shape& s, const LocalDescriptorConfig& cfg);

} // namespace drc

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

#include "drc/image.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace drc {

/// Global HOG descriptor parameters. The defaults give a 1764-d descriptor
/// (7 x 7 blocks of 2 x 2 cells with 9 bins) on a 64 x 64 resampled face.
struct HogConfig {
    int resize_to = 64;
    int block_size = 16;
    int block_stride = 8;
    int cell_size = 8;
    int num_bins = 9;

    void validate() const;
    std::size_t dimension() const;

    bool operator==(const HogConfig&) const = default;
};

/// Resamples to resize_to x resize_to, bins unsigned gradient orientation per
/// cell, and L2-Hys normalises each block. Constant images give all zeros.
Eigen::VectorXd extract_global(const GrayImage& img, const HogConfig& cfg);

} // namespace drc

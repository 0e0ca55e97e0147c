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

#include <array>
#include <cstddef>
#include <vector>

namespace drc {

inline constexpr int kOrientationBins = 8;

/// Per-orientation gradient responses, one width x height plane per bin.
struct OrientationPlanes {
    int width = 0;
    int height = 0;
    std::array<std::vector<double>, kOrientationBins> planes;

    double at(int bin, int x, int y) const
    {
        return planes[static_cast<std::size_t>(bin)][static_cast<std::size_t>(y) * width + x];
    }
};

/**
 * Signed gradient magnitudes split between the two nearest of 8 orientation
 * bins (centres at multiples of 45 degrees), Gaussian blurred with zero
 * padding outside the image.
 *
 * Blurred values are rounded down to a dyadic grid fine enough that every
 * partial sum over the image is exactly representable, so integral-map
 * queries reproduce direct summation bit for bit.
 */
OrientationPlanes blurred_responses(const GrayImage& img, double sigma);

/// Summed-area tables over the blurred orientation responses. Immutable
/// after construction.
class ResponseMaps {
public:
    ResponseMaps() = default;
    ResponseMaps(const OrientationPlanes& blurred, double sigma);

    int width() const { return width_; }
    int height() const { return height_; }
    double blur_sigma() const { return sigma_; }

    /// Entry (row, col) of the integral map of one bin, 0 <= row <= height,
    /// 0 <= col <= width. Row 0 and column 0 are zero.
    double integral(int bin, int row, int col) const
    {
        return maps_[static_cast<std::size_t>(bin)][static_cast<std::size_t>(row) * (width_ + 1) + col];
    }

    /// Sum of bin responses over columns [x0, x1) and rows [y0, y1). The
    /// rectangle is clipped to the image; area outside contributes zero.
    double rect_sum(int bin, int x0, int y0, int x1, int y1) const;

private:
    int width_ = 0;
    int height_ = 0;
    double sigma_ = 0.0;
    std::array<std::vector<double>, kOrientationBins> maps_;
};

ResponseMaps build_response_maps(const GrayImage& img, double sigma);

} // namespace drc

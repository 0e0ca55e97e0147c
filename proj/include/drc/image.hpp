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

#include <cstddef>
#include <vector>

namespace drc {

/// Row-major single channel image with intensities in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    bool empty() const { return width <= 0 || height <= 0; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    /// Reads with coordinates clamped to the image border.
    double clamped(int x, int y) const;

    bool operator==(const GrayImage&) const = default;
};

/// Bilinear resampling with pixel-centre alignment. Resizing to the same
/// size returns an identical image.
GrayImage resize_bilinear(const GrayImage& img, int out_width, int out_height);

/// Column-wise mirror image.
GrayImage mirror_horizontal(const GrayImage& img);

} // namespace drc

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
#include "drc/hog.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace drc {

namespace {

constexpr double kBlockNormEps = 1e-6;
constexpr double kClip = 0.2;

void l2_normalize(Eigen::Ref<Eigen::VectorXd> v)
{
    v /= std::sqrt(v.squaredNorm() + kBlockNormEps * kBlockNormEps);
}

} // namespace

void HogConfig::validate() const
{
    if (resize_to <= 0 || block_size <= 0 || block_stride <= 0 || cell_size <= 0 || num_bins <= 0) {
        throw std::invalid_argument("HogConfig: all sizes must be positive");
    }
    if (block_size % cell_size != 0) {
        throw std::invalid_argument("HogConfig: block_size must be divisible by cell_size");
    }
    if (block_stride % cell_size != 0) {
        throw std::invalid_argument("HogConfig: block_stride must be a multiple of cell_size");
    }
    if (block_size > resize_to) {
        throw std::invalid_argument("HogConfig: block larger than the resampled image");
    }
}

std::size_t HogConfig::dimension() const
{
    const auto blocks_per_side = static_cast<std::size_t>((resize_to - block_size) / block_stride + 1);
    const auto cells_per_side = static_cast<std::size_t>(block_size / cell_size);
    return blocks_per_side * blocks_per_side * cells_per_side * cells_per_side * static_cast<std::size_t>(num_bins);
}

Eigen::VectorXd extract_global(const GrayImage& img, const HogConfig& cfg)
{
    if (img.empty()) {
        throw std::invalid_argument("extract_global: empty image");
    }
    cfg.validate();
    const GrayImage im = resize_bilinear(img, cfg.resize_to, cfg.resize_to);
    const int n = cfg.resize_to;
    const int cells = n / cfg.cell_size;
    const int bins = cfg.num_bins;
    const double bin_width = std::numbers::pi / bins;

    // Cell histograms, cell-major, each with num_bins entries.
    std::vector<double> hist(static_cast<std::size_t>(cells * cells * bins), 0.0);
    for (int y = 0; y < cells * cfg.cell_size; ++y) {
        for (int x = 0; x < cells * cfg.cell_size; ++x) {
            const double gx = im.clamped(x + 1, y) - im.clamped(x - 1, y);
            const double gy = im.clamped(x, y + 1) - im.clamped(x, y - 1);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += std::numbers::pi;
            if (theta >= std::numbers::pi) theta -= std::numbers::pi;
            const double a = theta / bin_width - 0.5;
            const double lo = std::floor(a);
            const double frac = a - lo;
            const int b0 = (static_cast<int>(lo) + bins) % bins;
            const int b1 = (b0 + 1) % bins;
            const int cell = (y / cfg.cell_size) * cells + x / cfg.cell_size;
            hist[static_cast<std::size_t>(cell * bins + b0)] += mag * (1.0 - frac);
            hist[static_cast<std::size_t>(cell * bins + b1)] += mag * frac;
        }
    }

    const int blocks = (n - cfg.block_size) / cfg.block_stride + 1;
    const int cpb = cfg.block_size / cfg.cell_size;
    const int step = cfg.block_stride / cfg.cell_size;
    const auto block_dim = static_cast<Eigen::Index>(cpb * cpb * bins);
    Eigen::VectorXd out(static_cast<Eigen::Index>(cfg.dimension()));
    Eigen::Index offset = 0;
    for (int by = 0; by < blocks; ++by) {
        for (int bx = 0; bx < blocks; ++bx) {
            auto block = out.segment(offset, block_dim);
            Eigen::Index k = 0;
            for (int cy = 0; cy < cpb; ++cy) {
                for (int cx = 0; cx < cpb; ++cx) {
                    const int cell = (by * step + cy) * cells + (bx * step + cx);
                    for (int b = 0; b < bins; ++b) {
                        block[k++] = hist[static_cast<std::size_t>(cell * bins + b)];
                    }
                }
            }
            l2_normalize(block);
            block = block.cwiseMin(kClip);
            l2_normalize(block);
            offset += block_dim;
        }
    }
    return out;
}

} // namespace drc

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
#include "drc/synthetic.hpp"

#include "drc/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace drc {

namespace {

bool is_face_preset(const SyntheticConfig& cfg)
{
    return cfg.base_polygon.empty() && cfg.num_landmarks == 5;
}

// Angles measured from the top of the ellipse, clockwise in image coordinates.
double ellipse_angle(std::size_t k, std::size_t n)
{
    return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
}

} // namespace

void SyntheticConfig::validate() const
{
    if (num_landmarks < 2) {
        throw std::invalid_argument("SyntheticConfig: need at least two landmarks");
    }
    if (!base_polygon.empty() && base_polygon.size() != num_landmarks) {
        throw std::invalid_argument("SyntheticConfig: base polygon size does not match num_landmarks");
    }
    if (image_size <= 2 * margin || margin < 0) {
        throw std::invalid_argument("SyntheticConfig: image too small for the border margin");
    }
    if (!(face_scale > 0.0) || !(scale_min > 0.0 && scale_max >= scale_min) || rotation_deg < 0.0 || translation < 0.0 ||
        jitter_sigma < 0.0 || !(blob_sigma > 0.0) || noise_sigma < 0.0 || contrast_jitter < 0.0) {
        throw std::invalid_argument("SyntheticConfig: invalid geometry or texture ranges");
    }
}

std::vector<Eigen::Vector2d> synthetic_base_polygon(const SyntheticConfig& cfg)
{
    if (!cfg.base_polygon.empty()) return cfg.base_polygon;
    if (is_face_preset(cfg)) {
        const double k = cfg.face_scale;
        return {{-10.0 * k, -7.0 * k}, {10.0 * k, -7.0 * k}, {0.0, 3.0 * k}, {-7.0 * k, 11.0 * k}, {7.0 * k, 11.0 * k}};
    }
    const double rx = 0.22 * cfg.image_size;
    const double ry = 0.26 * cfg.image_size;
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t k = 0; k < cfg.num_landmarks; ++k) {
        const double a = ellipse_angle(k, cfg.num_landmarks);
        pts.emplace_back(rx * std::sin(a), -ry * std::cos(a));
    }
    return pts;
}

LandmarkLayout synthetic_layout(const SyntheticConfig& cfg)
{
    LandmarkLayout layout;
    const auto n = cfg.num_landmarks;
    layout.num_landmarks = n;
    if (is_face_preset(cfg)) {
        layout.flip_permutation = {1, 0, 2, 4, 3};
        layout.left_eye = {0};
        layout.right_eye = {1};
        return layout;
    }
    const auto poly = synthetic_base_polygon(cfg);
    // Mirror partner = nearest point to the reflection about x = 0.
    layout.flip_permutation.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        const Eigen::Vector2d mirrored(-poly[p].x(), poly[p].y());
        std::size_t best = 0;
        for (std::size_t q = 1; q < n; ++q) {
            if ((poly[q] - mirrored).norm() < (poly[best] - mirrored).norm()) best = q;
        }
        layout.flip_permutation[p] = best;
    }
    std::size_t leftmost = 0;
    for (std::size_t p = 1; p < n; ++p) {
        if (poly[p].x() < poly[leftmost].x()) leftmost = p;
    }
    layout.left_eye = {leftmost};
    layout.right_eye = {layout.flip_permutation[leftmost]};
    layout.validate();
    return layout;
}

std::vector<FaceSample> generate_synthetic(const SyntheticConfig& cfg)
{
    cfg.validate();
    const auto layout = synthetic_layout(cfg);
    const auto poly = synthetic_base_polygon(cfg);
    const int n = cfg.image_size;
    const double centre = (n - 1) / 2.0;
    const double lo = cfg.margin;
    const double hi = n - 1 - cfg.margin;

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

    std::vector<FaceSample> out;
    out.reserve(cfg.sample_count);
    for (std::size_t i = 0; i < cfg.sample_count; ++i) {
        Shape truth = Shape::zeros(cfg.num_landmarks);
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const double scale = uniform(cfg.scale_min, cfg.scale_max);
            const double angle = uniform(-cfg.rotation_deg, cfg.rotation_deg) * std::numbers::pi / 180.0;
            const double tx = uniform(-cfg.translation, cfg.translation);
            const double ty = uniform(-cfg.translation, cfg.translation);
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            placed = true;
            for (std::size_t p = 0; p < cfg.num_landmarks; ++p) {
                const auto& q = poly[p];
                const double x = centre + tx + scale * (c * q.x() - s * q.y()) + cfg.jitter_sigma * gauss(rng);
                const double y = centre + ty + scale * (s * q.x() + c * q.y()) + cfg.jitter_sigma * gauss(rng);
                truth.x(p) = x;
                truth.y(p) = y;
                placed = placed && x >= lo && x <= hi && y >= lo && y <= hi;
            }
        }
        if (!placed) {
            throw std::invalid_argument("generate_synthetic: cannot keep landmarks inside the margin; "
                                        "shrink the polygon or transform ranges");
        }

        GrayImage img(n, n);
        for (auto& px : img.pixels) {
            px = cfg.background + cfg.noise_sigma * gauss(rng);
        }
        const double inv2s2 = 1.0 / (2.0 * cfg.blob_sigma * cfg.blob_sigma);
        const int reach = static_cast<int>(std::ceil(4.0 * cfg.blob_sigma));
        for (std::size_t p = 0; p < cfg.num_landmarks; ++p) {
            const double contrast = cfg.blob_contrast * (1.0 + cfg.contrast_jitter * uniform(-1.0, 1.0));
            const int cx = static_cast<int>(std::lround(truth.x(p)));
            const int cy = static_cast<int>(std::lround(truth.y(p)));
            for (int y = std::max(0, cy - reach); y <= std::min(n - 1, cy + reach); ++y) {
                for (int x = std::max(0, cx - reach); x <= std::min(n - 1, cx + reach); ++x) {
                    const double dx = x - truth.x(p);
                    const double dy = y - truth.y(p);
                    img.at(x, y) += contrast * std::exp(-(dx * dx + dy * dy) * inv2s2);
                }
            }
        }
        for (auto& px : img.pixels) px = std::clamp(px, 0.0, 1.0);

        char id[32];
        std::snprintf(id, sizeof id, "%06zu", i);
        FaceSample sample;
        sample.image = std::move(img);
        sample.d_pupils = interpupil_distance(truth, layout);
        sample.truth = std::move(truth);
        sample.source_id = id;
        out.push_back(std::move(sample));
    }
    return out;
}

} // namespace drc

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
#include "drc/local_descriptor.hpp"

#include <cmath>
#include <stdexcept>

namespace drc {

namespace {

constexpr double kNormFloor = 1e-6;

} // namespace

void LocalDescriptorConfig::validate() const
{
    if (patch_size <= 0 || patch_size % kSpatialBins != 0) {
        throw std::invalid_argument("LocalDescriptorConfig: patch_size must be a positive multiple of 4");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("LocalDescriptorConfig: epsilon must be positive");
    }
    if (blur_sigma < 0.0 || !std::isfinite(blur_sigma)) {
        throw std::invalid_argument("LocalDescriptorConfig: blur_sigma must be non-negative");
    }
}

Eigen::MatrixXd FeatureJacobian::dense() const
{
    const auto P = static_cast<Eigen::Index>(blocks.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kDescriptorDim * P, 2 * P);
    for (Eigen::Index p = 0; p < P; ++p) {
        out.block(p * kDescriptorDim, 2 * p, kDescriptorDim, 2) = blocks[static_cast<std::size_t>(p)];
    }
    return out;
}

LandmarkDescriptor extract_landmark(const ResponseMaps& maps, double x, double y, const LocalDescriptorConfig& cfg)
{
    LandmarkDescriptor d = LandmarkDescriptor::Zero();
    if (!std::isfinite(x) || !std::isfinite(y)) {
        return d;
    }
    // Far outside the image everything is zero; also keeps the int casts safe.
    const double reach = cfg.patch_size + 1.0;
    if (x < -reach || y < -reach || x > maps.width() + reach || y > maps.height() + reach) {
        return d;
    }
    const int cell = cfg.patch_size / kSpatialBins;
    const int left = static_cast<int>(std::floor(x + 0.5)) - cfg.patch_size / 2;
    const int top = static_cast<int>(std::floor(y + 0.5)) - cfg.patch_size / 2;
    Eigen::Index k = 0;
    for (int cy = 0; cy < kSpatialBins; ++cy) {
        const int y0 = top + cy * cell;
        for (int cx = 0; cx < kSpatialBins; ++cx) {
            const int x0 = left + cx * cell;
            for (int b = 0; b < kOrientationBins; ++b) {
                d[k++] = maps.rect_sum(b, x0, y0, x0 + cell, y0 + cell);
            }
        }
    }
    d /= std::max(d.norm(), kNormFloor);
    return d;
}

Eigen::VectorXd extract_local(const ResponseMaps& maps, const Shape& s, const LocalDescriptorConfig& cfg)
{
    const auto P = s.num_landmarks();
    Eigen::VectorXd out(static_cast<Eigen::Index>(P) * kDescriptorDim);
    for (std::size_t p = 0; p < P; ++p) {
        out.segment<kDescriptorDim>(static_cast<Eigen::Index>(p) * kDescriptorDim) =
            extract_landmark(maps, s.x(p), s.y(p), cfg);
    }
    return out;
}

FeatureJacobian local_jacobian(const ResponseMaps& maps, const Shape& s, const LocalDescriptorConfig& cfg)
{
    const double eps = cfg.epsilon;
    FeatureJacobian jac;
    jac.blocks.resize(s.num_landmarks());
    for (std::size_t p = 0; p < s.num_landmarks(); ++p) {
        const double x = s.x(p);
        const double y = s.y(p);
        auto& block = jac.blocks[p];
        block.col(0) = (extract_landmark(maps, x + eps, y, cfg) - extract_landmark(maps, x - eps, y, cfg)) / (2.0 * eps);
        block.col(1) = (extract_landmark(maps, x, y + eps, cfg) - extract_landmark(maps, x, y - eps, cfg)) / (2.0 * eps);
    }
    return jac;
}

} // namespace drc

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
#include "drc/shape.hpp"

#include "drc/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drc {

Shape Shape::zeros(std::size_t num_landmarks)
{
    return Shape(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * num_landmarks)));
}

void LandmarkLayout::validate() const
{
    const auto n = num_landmarks;
    if (n == 0) {
        throw std::invalid_argument("landmark layout: zero landmarks");
    }
    if (flip_permutation.size() != n) {
        throw std::invalid_argument("landmark layout: flip permutation has " +
                                    std::to_string(flip_permutation.size()) + " entries, expected " +
                                    std::to_string(n));
    }
    for (std::size_t p = 0; p < n; ++p) {
        const auto q = flip_permutation[p];
        if (q >= n || flip_permutation[q] != p) {
            throw std::invalid_argument("landmark layout: flip permutation is not an involution at index " +
                                        std::to_string(p));
        }
    }
    if (left_eye.empty() || right_eye.empty()) {
        throw std::invalid_argument("landmark layout: eye index subsets must be non-empty");
    }
    std::vector<int> seen(n, 0);
    for (auto i : left_eye) {
        if (i >= n) throw std::invalid_argument("landmark layout: left eye index out of range");
        seen[i] |= 1;
    }
    for (auto i : right_eye) {
        if (i >= n) throw std::invalid_argument("landmark layout: right eye index out of range");
        if (seen[i] & 1) throw std::invalid_argument("landmark layout: eye index subsets overlap");
        seen[i] |= 2;
    }
}

bool is_valid_shape(const Shape& s)
{
    return s.coords.size() % 2 == 0 && s.coords.allFinite();
}

double normalized_error(const Shape& pred, const Shape& truth, double d_pupils)
{
    if (pred.coords.size() != truth.coords.size() || pred.coords.size() == 0 || pred.coords.size() % 2 != 0) {
        throw std::invalid_argument("normalized_error: shape lengths " + std::to_string(pred.coords.size()) +
                                    " and " + std::to_string(truth.coords.size()) + " are incompatible");
    }
    if (!(d_pupils > 0.0)) {
        throw std::invalid_argument("normalized_error: d_pupils must be positive");
    }
    const auto P = pred.num_landmarks();
    double sum = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        sum += std::hypot(pred.x(p) - truth.x(p), pred.y(p) - truth.y(p));
    }
    return sum / static_cast<double>(P) / d_pupils;
}

namespace {

Eigen::Vector2d centroid(const Shape& s, const std::vector<std::size_t>& idx)
{
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (auto i : idx) {
        c += Eigen::Vector2d(s.x(i), s.y(i));
    }
    return c / static_cast<double>(idx.size());
}

} // namespace

double interpupil_distance(const Shape& truth, const LandmarkLayout& layout)
{
    if (truth.num_landmarks() != layout.num_landmarks) {
        throw std::invalid_argument("interpupil_distance: shape has " + std::to_string(truth.num_landmarks()) +
                                    " landmarks, layout expects " + std::to_string(layout.num_landmarks));
    }
    layout.validate();
    const double d = (centroid(truth, layout.left_eye) - centroid(truth, layout.right_eye)).norm();
    if (!(d > 0.0)) {
        throw DegenerateGeometry("interpupil_distance: eye centres coincide");
    }
    return d;
}

Shape mean_shape(std::span<const Shape> shapes)
{
    if (shapes.empty()) {
        throw std::invalid_argument("mean_shape: empty shape list");
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(shapes.front().coords.size());
    for (const auto& s : shapes) {
        if (s.coords.size() != acc.size()) {
            throw std::invalid_argument("mean_shape: shapes have different lengths");
        }
        acc += s.coords;
    }
    return Shape(acc / static_cast<double>(shapes.size()));
}

Shape flip_shape(const Shape& s, int image_width, const LandmarkLayout& layout)
{
    if (s.num_landmarks() != layout.num_landmarks || s.coords.size() % 2 != 0) {
        throw std::invalid_argument("flip_shape: shape does not match landmark layout");
    }
    if (image_width <= 0) {
        throw std::invalid_argument("flip_shape: image width must be positive");
    }
    Shape out = Shape::zeros(s.num_landmarks());
    const double axis = static_cast<double>(image_width - 1);
    for (std::size_t p = 0; p < s.num_landmarks(); ++p) {
        const auto q = layout.flip_permutation[p];
        out.x(p) = axis - s.x(q);
        out.y(p) = s.y(q);
    }
    return out;
}

} // namespace drc

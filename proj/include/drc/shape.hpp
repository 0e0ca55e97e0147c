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

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace drc {

/**
 * Landmark coordinates of one face, interleaved as [x1, y1, ..., xP, yP].
 *
 * Pixel units, origin at the centre of the top-left pixel, x to the right
 * and y downwards.
 */
struct Shape {
    Eigen::VectorXd coords;

    Shape() = default;
    explicit Shape(Eigen::VectorXd c) : coords(std::move(c)) {}
    static Shape zeros(std::size_t num_landmarks);

    std::size_t num_landmarks() const { return static_cast<std::size_t>(coords.size()) / 2; }
    double x(std::size_t p) const { return coords[static_cast<Eigen::Index>(2 * p)]; }
    double y(std::size_t p) const { return coords[static_cast<Eigen::Index>(2 * p + 1)]; }
    double& x(std::size_t p) { return coords[static_cast<Eigen::Index>(2 * p)]; }
    double& y(std::size_t p) { return coords[static_cast<Eigen::Index>(2 * p + 1)]; }

    bool operator==(const Shape& other) const
    {
        return coords.size() == other.coords.size() && coords == other.coords;
    }
};

/// Per-dataset description of the landmark set.
struct LandmarkLayout {
    std::size_t num_landmarks = 0;
    std::vector<std::size_t> flip_permutation; ///< landmark -> its horizontal mirror
    std::vector<std::size_t> left_eye;
    std::vector<std::size_t> right_eye;

    /// Throws std::invalid_argument if the permutation is not an involution or
    /// the eye subsets are empty, out of range or overlapping.
    void validate() const;

    bool operator==(const LandmarkLayout&) const = default;
};

/// Mean point-to-point distance over landmarks, divided by d_pupils.
double normalized_error(const Shape& pred, const Shape& truth, double d_pupils);

/// Distance between the centroids of the two eye subsets. Throws
/// DegenerateGeometry when the centroids coincide.
double interpupil_distance(const Shape& truth, const LandmarkLayout& layout);

Shape mean_shape(std::span<const Shape> shapes);

/// Mirrors a shape about the vertical image axis, relabelling landmarks
/// through the layout's flip permutation.
Shape flip_shape(const Shape& s, int image_width, const LandmarkLayout& layout);

/// True when every coordinate is finite and the length is even.
bool is_valid_shape(const Shape& s);

} // namespace drc

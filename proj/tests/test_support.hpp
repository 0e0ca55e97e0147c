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

#include "drc/cascade.hpp"
#include "drc/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <random>

namespace drc::testing {

/// Smooth shape-indexed features with an exact Jacobian:
/// phi_{p,k}(s) = amp * sin(a_k x_p + b_k y_p + c_{p,k} + 0.3 t).
class AnalyticField final : public LocalFeatureField {
public:
    explicit AnalyticField(std::uint64_t seed, double amp = 0.5) : amp_(amp)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> freq(-0.15, 0.15);
        std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
        for (auto& v : a_) v = freq(rng);
        for (auto& v : b_) v = freq(rng);
        for (auto& v : c_) v = phase(rng);
    }

    Eigen::VectorXd features(std::size_t stage, const Shape& s) const override
    {
        Eigen::VectorXd out(static_cast<Eigen::Index>(s.num_landmarks()) * kDescriptorDim);
        for (std::size_t p = 0; p < s.num_landmarks(); ++p) {
            for (Eigen::Index k = 0; k < kDescriptorDim; ++k) {
                out[static_cast<Eigen::Index>(p) * kDescriptorDim + k] = amp_ * std::sin(arg(stage, p, k, s));
            }
        }
        return out;
    }

    FeatureJacobian jacobian(std::size_t stage, const Shape& s) const override
    {
        FeatureJacobian j;
        j.blocks.resize(s.num_landmarks());
        for (std::size_t p = 0; p < s.num_landmarks(); ++p) {
            for (Eigen::Index k = 0; k < kDescriptorDim; ++k) {
                const double c = amp_ * std::cos(arg(stage, p, k, s));
                j.blocks[p](k, 0) = c * a_[static_cast<std::size_t>(k)];
                j.blocks[p](k, 1) = c * b_[static_cast<std::size_t>(k)];
            }
        }
        return j;
    }

private:
    double arg(std::size_t stage, std::size_t p, Eigen::Index k, const Shape& s) const
    {
        const auto kk = static_cast<std::size_t>(k);
        return a_[kk] * s.x(p) + b_[kk] * s.y(p) + c_[(p * 131 + kk) % c_.size()] + 0.3 * static_cast<double>(stage);
    }

    double amp_;
    std::array<double, kDescriptorDim> a_{};
    std::array<double, kDescriptorDim> b_{};
    std::array<double, 512> c_{};
};

/// HOG geometry with a 20-d descriptor, for tests that feed phi^0 directly.
inline HogConfig tiny_hog()
{
    return HogConfig{16, 16, 8, 8, 5};
}

inline LandmarkLayout ring_layout(std::size_t P)
{
    LandmarkLayout l;
    l.num_landmarks = P;
    for (std::size_t p = 0; p < P; ++p) l.flip_permutation.push_back(p);
    l.left_eye = {0};
    l.right_eye = {P - 1};
    return l;
}

/// Random parameters with the given scales.
inline CascadeModel random_model(std::size_t P, std::size_t T, const HogConfig& hog, std::uint64_t seed,
                                 double w_scale = 0.05, double b_scale = 1.0, double keep = 0.5)
{
    std::vector<LocalDescriptorConfig> cfgs(T, LocalDescriptorConfig{16, 2.0, 0.0});
    CascadeModel m = CascadeModel::zeros(ring_layout(P), hog, cfgs, keep, true);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    auto fill = [&](auto& mat, double scale) {
        for (Eigen::Index i = 0; i < mat.size(); ++i) mat.data()[i] = scale * n(rng);
    };
    fill(m.W0, w_scale);
    fill(m.b0, b_scale);
    for (auto& st : m.stages) {
        fill(st.W, w_scale);
        fill(st.b, b_scale);
    }
    return m;
}

inline double relative_error(double a, double b, double floor)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Five-dimensional HOG geometry so phi^0 can be supplied directly.
inline HogConfig five_dim_hog()
{
    return HogConfig{8, 8, 8, 8, 5};
}

struct LinearProblem {
    std::vector<TrainingSample> samples;
    Eigen::MatrixXd X; // N x (d + 1), last column ones
    Eigen::MatrixXd Y; // N x 2P
};

inline LinearProblem linear_problem(std::size_t N, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Index d = 5;
    const Eigen::Index out = 4;
    Eigen::MatrixXd A(out, d);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = 3.0 * n(rng);
    Eigen::VectorXd c(out);
    c << 20, 30, 40, 30;
    auto field = std::make_shared<AnalyticField>(1);

    LinearProblem lp;
    lp.X.resize(static_cast<Eigen::Index>(N), d + 1);
    lp.Y.resize(static_cast<Eigen::Index>(N), out);
    for (std::size_t i = 0; i < N; ++i) {
        Eigen::VectorXd phi(d);
        for (Eigen::Index k = 0; k < d; ++k) phi[k] = n(rng);
        Eigen::VectorXd y = A * phi + c;
        for (Eigen::Index k = 0; k < out; ++k) y[k] += 0.5 * n(rng);
        lp.X.row(static_cast<Eigen::Index>(i)) << phi.transpose(), 1.0;
        lp.Y.row(static_cast<Eigen::Index>(i)) = y.transpose();
        lp.samples.push_back({phi, field, Shape(y), 1.0});
    }
    return lp;
}

} // namespace drc::testing

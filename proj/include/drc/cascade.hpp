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

#include "drc/hog.hpp"
#include "drc/image.hpp"
#include "drc/local_descriptor.hpp"
#include "drc/shape.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace drc {

using Rng = std::mt19937_64;

/// One shape-indexed refinement layer: s_t = s_{t-1} + W phi_t + b.
struct LocalStage {
    Eigen::MatrixXd W; ///< 2P x 128P
    Eigen::VectorXd b; ///< 2P

    bool operator==(const LocalStage& o) const;
};

/**
 * Global linear regressor followed by T local regressors.
 *
 * `dropout_rate` follows the usual cascade-regression convention: it is the
 * probability p that a feature dimension is *kept* during training, and the
 * weights are scaled by p at inference.
 *
 * A model without a global layer (W0 empty) starts every cascade from
 * `mean_shape`.
 */
struct CascadeModel {
    Eigen::MatrixXd W0; ///< 2P x d0, or empty for the mean-shape variant
    Eigen::VectorXd b0; ///< 2P, or empty
    std::vector<LocalStage> stages;
    HogConfig hog;
    std::vector<LocalDescriptorConfig> local_cfgs; ///< one per stage
    double dropout_rate = 0.5;
    LandmarkLayout layout;
    std::optional<Shape> mean_shape;

    /// All-zero parameters for the given configuration. When `with_global` is
    /// false the mean shape must be supplied.
    static CascadeModel zeros(const LandmarkLayout& layout, const HogConfig& hog,
                              std::vector<LocalDescriptorConfig> local_cfgs, double dropout_rate,
                              bool with_global, std::optional<Shape> mean = std::nullopt);

    std::size_t num_landmarks() const { return layout.num_landmarks; }
    std::size_t num_stages() const { return stages.size(); }
    bool has_global() const { return W0.size() > 0; }

    /// Throws std::invalid_argument naming the first violated shape invariant.
    void validate() const;

    bool operator==(const CascadeModel& o) const;
};

enum class Mode { Training, Inference };

/// Bernoulli(p) keep/drop indicator per feature dimension, stored as 0.0/1.0.
struct DropoutMask {
    Eigen::VectorXd bits;

    static DropoutMask sample(Eigen::Index dim, double keep_prob, Rng& rng);
    static DropoutMask ones(Eigen::Index dim);
};

/// Shape-indexed feature extractor h_t(s) and its shape Jacobian, for every
/// local stage. `stage` is zero-based (stage index t - 1).
class LocalFeatureField {
public:
    virtual ~LocalFeatureField() = default;
    virtual Eigen::VectorXd features(std::size_t stage, const Shape& s) const = 0;
    virtual FeatureJacobian jacobian(std::size_t stage, const Shape& s) const = 0;
};

/// Response-map descriptors of one image, one set of maps per distinct blur.
class ImageFeatureField final : public LocalFeatureField {
public:
    ImageFeatureField(const GrayImage& img, std::span<const LocalDescriptorConfig> cfgs);

    Eigen::VectorXd features(std::size_t stage, const Shape& s) const override;
    FeatureJacobian jacobian(std::size_t stage, const Shape& s) const override;

    const ResponseMaps& maps(std::size_t stage) const { return *maps_.at(stage); }

private:
    std::vector<LocalDescriptorConfig> cfgs_;
    std::vector<std::shared_ptr<const ResponseMaps>> maps_;
};

/// Forward pass cache consumed by backward().
struct StageTrace {
    Mode mode = Mode::Inference;
    std::vector<Shape> shapes;              ///< s^0 .. s^T
    std::vector<Eigen::VectorXd> features;  ///< phi^0 .. phi^T (phi^0 empty without a global layer)
    std::vector<DropoutMask> masks;         ///< training mode only; same indexing as features
};

/// Parameter gradients, congruent with a CascadeModel.
struct Gradients {
    Eigen::MatrixXd W0;
    Eigen::VectorXd b0;
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;

    static Gradients zeros_like(const CascadeModel& model);
    bool congruent_with(const CascadeModel& model) const;
    bool all_finite() const;
    Gradients& operator+=(const Gradients& o);
};

/// s0 = W0 (z . phi0) + b0 with a mask, p W0 phi0 + b0 without.
Shape global_forward(const CascadeModel& model, const Eigen::VectorXd& phi0, const DropoutMask* mask);

/// s_t = s_{t-1} + W (z . phi) + b with a mask, s_{t-1} + p W phi + b without.
Shape local_forward(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Shape& s_prev,
                    const Eigen::VectorXd& phi, const DropoutMask* mask, double keep_prob);

/// Runs the whole cascade. Training mode samples a fresh mask per stage from
/// `rng`; inference mode never touches it.
StageTrace forward(const CascadeModel& model, const Eigen::VectorXd& phi0, const LocalFeatureField& field,
                   Mode mode, Rng& rng);

/// Convenience overload computing HOG and response maps from the image.
StageTrace forward(const CascadeModel& model, const GrayImage& img, Mode mode, Rng& rng);

/// Deterministic prediction (inference mode), final stage only.
Shape predict(const CascadeModel& model, const GrayImage& img);

/// E = 1/2 ||s^T - truth||^2.
double half_squared_error(const StageTrace& trace, const Shape& truth);

/**
 * Back-propagates E = 1/2 ||s^T - truth||^2 through a training-mode trace.
 *
 * The shape Jacobians are evaluated lazily at s^{t-1} via `field`; dropped
 * feature dimensions are zeroed both in dE/dW^t and in the recurrence
 *   dE/ds^{t-1} = dE/ds^t (I + W^t D_z Psi^t).
 */
Gradients backward(const CascadeModel& model, const StageTrace& trace, const Shape& truth,
                   const LocalFeatureField& field);

} // namespace drc

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
#include "drc/cascade.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace drc {

namespace {

Eigen::Index rows_for(const CascadeModel& m)
{
    return static_cast<Eigen::Index>(2 * m.num_landmarks());
}

template <typename A, typename B>
bool same_bits(const A& a, const B& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

} // namespace

bool LocalStage::operator==(const LocalStage& o) const
{
    return same_bits(W, o.W) && same_bits(b, o.b);
}

CascadeModel CascadeModel::zeros(const LandmarkLayout& layout, const HogConfig& hog,
                                 std::vector<LocalDescriptorConfig> local_cfgs, double dropout_rate,
                                 bool with_global, std::optional<Shape> mean)
{
    CascadeModel m;
    m.layout = layout;
    m.hog = hog;
    m.local_cfgs = std::move(local_cfgs);
    m.dropout_rate = dropout_rate;
    m.mean_shape = std::move(mean);
    const auto rows = rows_for(m);
    if (with_global) {
        m.W0 = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(hog.dimension()));
        m.b0 = Eigen::VectorXd::Zero(rows);
    }
    const auto cols = static_cast<Eigen::Index>(layout.num_landmarks) * kDescriptorDim;
    m.stages.resize(m.local_cfgs.size());
    for (auto& st : m.stages) {
        st.W = Eigen::MatrixXd::Zero(rows, cols);
        st.b = Eigen::VectorXd::Zero(rows);
    }
    m.validate();
    return m;
}

void CascadeModel::validate() const
{
    layout.validate();
    hog.validate();
    if (!(dropout_rate > 0.0 && dropout_rate <= 1.0)) {
        throw std::invalid_argument("CascadeModel: dropout rate must lie in (0, 1]");
    }
    const auto rows = rows_for(*this);
    if (has_global()) {
        if (W0.rows() != rows || W0.cols() != static_cast<Eigen::Index>(hog.dimension())) {
            throw std::invalid_argument("CascadeModel: W0 is " + std::to_string(W0.rows()) + "x" +
                                        std::to_string(W0.cols()) + ", expected " + std::to_string(rows) + "x" +
                                        std::to_string(hog.dimension()));
        }
        if (b0.size() != rows) {
            throw std::invalid_argument("CascadeModel: b0 has wrong length");
        }
    } else {
        if (b0.size() != 0) {
            throw std::invalid_argument("CascadeModel: b0 present without W0");
        }
        if (!mean_shape || mean_shape->coords.size() != rows) {
            throw std::invalid_argument("CascadeModel: model without a global layer needs a mean shape of length " +
                                        std::to_string(rows));
        }
    }
    if (mean_shape && mean_shape->coords.size() != rows) {
        throw std::invalid_argument("CascadeModel: mean shape has wrong length");
    }
    if (local_cfgs.size() != stages.size()) {
        throw std::invalid_argument("CascadeModel: " + std::to_string(local_cfgs.size()) +
                                    " descriptor configs for " + std::to_string(stages.size()) + " stages");
    }
    const auto cols = static_cast<Eigen::Index>(num_landmarks()) * kDescriptorDim;
    for (std::size_t t = 0; t < stages.size(); ++t) {
        local_cfgs[t].validate();
        if (stages[t].W.rows() != rows || stages[t].W.cols() != cols || stages[t].b.size() != rows) {
            throw std::invalid_argument("CascadeModel: stage " + std::to_string(t + 1) + " has incongruent shape");
        }
    }
}

bool CascadeModel::operator==(const CascadeModel& o) const
{
    return same_bits(W0, o.W0) && same_bits(b0, o.b0) && stages == o.stages && hog == o.hog &&
           local_cfgs == o.local_cfgs && dropout_rate == o.dropout_rate && layout == o.layout &&
           mean_shape.has_value() == o.mean_shape.has_value() &&
           (!mean_shape || same_bits(mean_shape->coords, o.mean_shape->coords));
}

DropoutMask DropoutMask::sample(Eigen::Index dim, double keep_prob, Rng& rng)
{
    std::bernoulli_distribution keep(keep_prob);
    DropoutMask m;
    m.bits.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        m.bits[i] = keep(rng) ? 1.0 : 0.0;
    }
    return m;
}

DropoutMask DropoutMask::ones(Eigen::Index dim)
{
    return DropoutMask{Eigen::VectorXd::Ones(dim)};
}

ImageFeatureField::ImageFeatureField(const GrayImage& img, std::span<const LocalDescriptorConfig> cfgs)
    : cfgs_(cfgs.begin(), cfgs.end())
{
    std::map<double, std::shared_ptr<const ResponseMaps>> by_sigma;
    for (const auto& c : cfgs_) {
        const double sigma = c.effective_sigma();
        auto& slot = by_sigma[sigma];
        if (!slot) {
            slot = std::make_shared<const ResponseMaps>(build_response_maps(img, sigma));
        }
        maps_.push_back(slot);
    }
}

Eigen::VectorXd ImageFeatureField::features(std::size_t stage, const Shape& s) const
{
    return extract_local(*maps_.at(stage), s, cfgs_.at(stage));
}

FeatureJacobian ImageFeatureField::jacobian(std::size_t stage, const Shape& s) const
{
    return local_jacobian(*maps_.at(stage), s, cfgs_.at(stage));
}

Gradients Gradients::zeros_like(const CascadeModel& model)
{
    Gradients g;
    g.W0 = Eigen::MatrixXd::Zero(model.W0.rows(), model.W0.cols());
    g.b0 = Eigen::VectorXd::Zero(model.b0.size());
    for (const auto& st : model.stages) {
        g.W.push_back(Eigen::MatrixXd::Zero(st.W.rows(), st.W.cols()));
        g.b.push_back(Eigen::VectorXd::Zero(st.b.size()));
    }
    return g;
}

bool Gradients::congruent_with(const CascadeModel& model) const
{
    if (W0.rows() != model.W0.rows() || W0.cols() != model.W0.cols() || b0.size() != model.b0.size()) {
        return false;
    }
    if (W.size() != model.stages.size() || b.size() != model.stages.size()) {
        return false;
    }
    for (std::size_t t = 0; t < W.size(); ++t) {
        if (W[t].rows() != model.stages[t].W.rows() || W[t].cols() != model.stages[t].W.cols() ||
            b[t].size() != model.stages[t].b.size()) {
            return false;
        }
    }
    return true;
}

bool Gradients::all_finite() const
{
    if (!W0.allFinite() || !b0.allFinite()) return false;
    for (std::size_t t = 0; t < W.size(); ++t) {
        if (!W[t].allFinite() || !b[t].allFinite()) return false;
    }
    return true;
}

Gradients& Gradients::operator+=(const Gradients& o)
{
    W0 += o.W0;
    b0 += o.b0;
    for (std::size_t t = 0; t < W.size(); ++t) {
        W[t] += o.W[t];
        b[t] += o.b[t];
    }
    return *this;
}

Shape global_forward(const CascadeModel& model, const Eigen::VectorXd& phi0, const DropoutMask* mask)
{
    if (!model.has_global()) {
        throw std::invalid_argument("global_forward: model has no global layer");
    }
    if (phi0.size() != model.W0.cols()) {
        throw std::invalid_argument("global_forward: feature has " + std::to_string(phi0.size()) +
                                    " dimensions, W0 expects " + std::to_string(model.W0.cols()));
    }
    if (mask) {
        if (mask->bits.size() != phi0.size()) {
            throw std::invalid_argument("global_forward: mask length does not match feature");
        }
        return Shape(model.W0 * phi0.cwiseProduct(mask->bits) + model.b0);
    }
    return Shape(model.dropout_rate * (model.W0 * phi0) + model.b0);
}

Shape local_forward(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Shape& s_prev,
                    const Eigen::VectorXd& phi, const DropoutMask* mask, double keep_prob)
{
    if (phi.size() != W.cols() || b.size() != W.rows() || s_prev.coords.size() != W.rows()) {
        throw std::invalid_argument("local_forward: incongruent dimensions");
    }
    if (mask) {
        if (mask->bits.size() != phi.size()) {
            throw std::invalid_argument("local_forward: mask length does not match feature");
        }
        return Shape(s_prev.coords + W * phi.cwiseProduct(mask->bits) + b);
    }
    return Shape(s_prev.coords + keep_prob * (W * phi) + b);
}

StageTrace forward(const CascadeModel& model, const Eigen::VectorXd& phi0, const LocalFeatureField& field,
                   Mode mode, Rng& rng)
{
    const bool training = mode == Mode::Training;
    const double p = model.dropout_rate;
    StageTrace trace;
    trace.mode = mode;
    trace.shapes.reserve(model.num_stages() + 1);
    trace.features.reserve(model.num_stages() + 1);

    if (model.has_global()) {
        trace.features.push_back(phi0);
        if (training) {
            trace.masks.push_back(DropoutMask::sample(phi0.size(), p, rng));
            trace.shapes.push_back(global_forward(model, phi0, &trace.masks.back()));
        } else {
            trace.shapes.push_back(global_forward(model, phi0, nullptr));
        }
    } else {
        if (!model.mean_shape) {
            throw std::invalid_argument("forward: model has neither a global layer nor a mean shape");
        }
        trace.features.emplace_back();
        if (training) trace.masks.emplace_back();
        trace.shapes.push_back(*model.mean_shape);
    }

    for (std::size_t t = 0; t < model.num_stages(); ++t) {
        const auto& st = model.stages[t];
        trace.features.push_back(field.features(t, trace.shapes.back()));
        const auto& phi = trace.features.back();
        if (training) {
            trace.masks.push_back(DropoutMask::sample(phi.size(), p, rng));
            trace.shapes.push_back(local_forward(st.W, st.b, trace.shapes.back(), phi, &trace.masks.back(), p));
        } else {
            trace.shapes.push_back(local_forward(st.W, st.b, trace.shapes.back(), phi, nullptr, p));
        }
    }
    return trace;
}

StageTrace forward(const CascadeModel& model, const GrayImage& img, Mode mode, Rng& rng)
{
    const ImageFeatureField field(img, model.local_cfgs);
    const Eigen::VectorXd phi0 = model.has_global() ? extract_global(img, model.hog) : Eigen::VectorXd();
    return forward(model, phi0, field, mode, rng);
}

Shape predict(const CascadeModel& model, const GrayImage& img)
{
    Rng unused(0);
    return forward(model, img, Mode::Inference, unused).shapes.back();
}

double half_squared_error(const StageTrace& trace, const Shape& truth)
{
    return 0.5 * (trace.shapes.back().coords - truth.coords).squaredNorm();
}

Gradients backward(const CascadeModel& model, const StageTrace& trace, const Shape& truth,
                   const LocalFeatureField& field)
{
    const auto T = model.num_stages();
    if (trace.mode != Mode::Training || trace.masks.size() != T + 1 || trace.shapes.size() != T + 1 ||
        trace.features.size() != T + 1) {
        throw std::invalid_argument("backward: trace is not a training-mode trace of this model");
    }
    if (truth.coords.size() != trace.shapes.back().coords.size()) {
        throw std::invalid_argument("backward: ground truth length does not match the model");
    }

    Gradients grads = Gradients::zeros_like(model);
    Eigen::VectorXd g = trace.shapes.back().coords - truth.coords; // dE/ds^T
    for (std::size_t t = T; t >= 1; --t) {
        const auto& st = model.stages[t - 1];
        const auto& z = trace.masks[t].bits;
        const auto& phi = trace.features[t];
        if (phi.size() != st.W.cols() || z.size() != phi.size()) {
            throw std::invalid_argument("backward: trace features do not match stage " + std::to_string(t));
        }
        grads.W[t - 1].noalias() = g * phi.cwiseProduct(z).transpose();
        grads.b[t - 1] = g;

        // g <- g + Psi^T D_z W^T g, using the block-diagonal structure of Psi.
        const Eigen::VectorXd u = (st.W.transpose() * g).cwiseProduct(z);
        const FeatureJacobian psi = field.jacobian(t - 1, trace.shapes[t - 1]);
        Eigen::VectorXd next = g;
        for (std::size_t p = 0; p < psi.blocks.size(); ++p) {
            next.segment<2>(static_cast<Eigen::Index>(2 * p)) +=
                psi.blocks[p].transpose() * u.segment<kDescriptorDim>(static_cast<Eigen::Index>(p) * kDescriptorDim);
        }
        g = std::move(next);
    }
    if (model.has_global()) {
        const auto& z = trace.masks[0].bits;
        grads.W0.noalias() = g * trace.features[0].cwiseProduct(z).transpose();
        grads.b0 = g;
    }
    return grads;
}

} // namespace drc

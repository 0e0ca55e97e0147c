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
#include "drc/training.hpp"

#include "drc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace drc {

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0) || !(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be positive and momentum in [0, 1)");
    }
    if (!(dropout_rate > 0.0 && dropout_rate <= 1.0)) {
        throw std::invalid_argument("TrainConfig: dropout_rate must lie in (0, 1]");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("TrainConfig: batch_size must be at least 1");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("TrainConfig: epsilon must be positive");
    }
    if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0) || !(min_learning_rate > 0.0)) {
        throw std::invalid_argument("TrainConfig: lr_decay_factor must lie in (0, 1) and min_learning_rate be positive");
    }
    if (patience_epochs < 1 || max_epochs < 0 || stage_epochs < 0) {
        throw std::invalid_argument("TrainConfig: patience must be >= 1 and epoch counts non-negative");
    }
}

std::vector<LocalDescriptorConfig> default_local_configs(std::size_t stages, double epsilon)
{
    std::vector<LocalDescriptorConfig> cfgs(stages);
    for (std::size_t t = 0; t < stages; ++t) {
        cfgs[t].patch_size = (t + 1 == stages && stages > 1) ? 16 : 32;
        cfgs[t].epsilon = epsilon;
    }
    return cfgs;
}

std::vector<TrainingSample> prepare_samples(std::span<const FaceSample> faces, const HogConfig& hog,
                                            std::span<const LocalDescriptorConfig> local_cfgs, bool with_global)
{
    std::vector<TrainingSample> out;
    out.reserve(faces.size());
    for (const auto& f : faces) {
        TrainingSample s;
        if (with_global) s.global_features = extract_global(f.image, hog);
        s.local_features = std::make_shared<ImageFeatureField>(f.image, local_cfgs);
        s.truth = f.truth;
        s.d_pupils = f.d_pupils;
        out.push_back(std::move(s));
    }
    return out;
}

std::pair<std::vector<FaceSample>, std::vector<FaceSample>>
split_validation(std::vector<FaceSample> samples, std::size_t validation_count, std::uint64_t seed)
{
    if (validation_count >= samples.size()) {
        throw std::invalid_argument("split_validation: validation_count " + std::to_string(validation_count) +
                                    " leaves no training samples out of " + std::to_string(samples.size()));
    }
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> held(samples.size(), false);
    for (std::size_t i = 0; i < validation_count; ++i) held[order[i]] = true;

    std::pair<std::vector<FaceSample>, std::vector<FaceSample>> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (held[i] ? out.second : out.first).push_back(std::move(samples[i]));
    }
    return out;
}

std::vector<FaceSample> augment_flip(std::span<const FaceSample> samples, const LandmarkLayout& layout)
{
    std::vector<FaceSample> out(samples.begin(), samples.end());
    out.reserve(2 * samples.size());
    for (const auto& s : samples) {
        FaceSample m;
        m.image = mirror_horizontal(s.image);
        m.truth = flip_shape(s.truth, s.image.width, layout);
        m.d_pupils = s.d_pupils;
        m.source_id = s.source_id + "#flip";
        out.push_back(std::move(m));
    }
    return out;
}

OptimizerState OptimizerState::init(const CascadeModel& model, double learning_rate, double momentum)
{
    OptimizerState st;
    st.velocity = Gradients::zeros_like(model);
    st.learning_rate = learning_rate;
    st.momentum = momentum;
    st.best_validation_error = std::numeric_limits<double>::infinity();
    return st;
}

bool OptimizerState::end_epoch(double validation_error, int patience, double decay)
{
    if (validation_error < best_validation_error) {
        best_validation_error = validation_error;
        epochs_since_improvement = 0;
        return true;
    }
    if (++epochs_since_improvement >= patience) {
        learning_rate *= decay;
        epochs_since_improvement = 0;
    }
    return false;
}

namespace {

template <typename P, typename G, typename V>
void momentum_update(P& param, const G& grad, V& vel, double momentum, double step)
{
    vel = momentum * vel - step * grad;
    param += vel;
}

} // namespace

void sgd_step(CascadeModel& model, const Gradients& grads, OptimizerState& state, std::size_t batch_size)
{
    if (batch_size == 0) {
        throw std::invalid_argument("sgd_step: batch size must be positive");
    }
    if (!grads.congruent_with(model) || !state.velocity.congruent_with(model)) {
        throw std::invalid_argument("sgd_step: gradient or velocity shapes do not match the model");
    }
    const double step = state.learning_rate / static_cast<double>(batch_size);
    const double mu = state.momentum;
    auto& v = state.velocity;
    if (model.has_global()) {
        momentum_update(model.W0, grads.W0, v.W0, mu, step);
        momentum_update(model.b0, grads.b0, v.b0, mu, step);
    }
    for (std::size_t t = 0; t < model.stages.size(); ++t) {
        momentum_update(model.stages[t].W, grads.W[t], v.W[t], mu, step);
        momentum_update(model.stages[t].b, grads.b[t], v.b[t], mu, step);
    }
}

namespace {

// Mean normalised error over samples with a usable inter-pupil distance.
double mean_error(std::span<const Shape> preds, std::span<const TrainingSample> samples, std::size_t* excluded)
{
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].d_pupils > 0.0)) {
            ++skipped;
            continue;
        }
        sum += normalized_error(preds[i], samples[i].truth, samples[i].d_pupils);
        ++n;
    }
    if (excluded) *excluded = skipped;
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

Rng phase_rng(std::uint64_t seed, std::uint64_t phase)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(phase)};
    return Rng(seq);
}

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw NumericError(std::string("non-finite ") + what + " during training");
    }
}

// Cached inputs of one linear layer: prediction = base + W (z . phi) + b.
struct LayerInputs {
    std::vector<Shape> base;
    std::vector<Eigen::VectorXd> phi;
};

std::vector<Shape> layer_predictions(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, double p,
                                     const LayerInputs& in)
{
    std::vector<Shape> out;
    out.reserve(in.base.size());
    for (std::size_t i = 0; i < in.base.size(); ++i) {
        out.push_back(local_forward(W, b, in.base[i], in.phi[i], nullptr, p));
    }
    return out;
}

// Fits one layer of `model` (stage 0 = global) with everything else frozen.
void train_layer(CascadeModel& model, std::size_t stage, const LayerInputs& train_in,
                 std::span<const TrainingSample> train, const LayerInputs& val_in,
                 std::span<const TrainingSample> validation, const TrainConfig& cfg, const EpochCallback& on_epoch)
{
    Eigen::MatrixXd& W = stage == 0 ? model.W0 : model.stages[stage - 1].W;
    Eigen::VectorXd& b = stage == 0 ? model.b0 : model.stages[stage - 1].b;
    const double p = model.dropout_rate;
    const std::string phase = "seq-stage-" + std::to_string(stage);
    const bool has_val = !validation.empty();

    // Plateau and checkpointing follow the layer's own squared-error objective; the
    // normalized errors are only reported.
    auto objective = [](const std::vector<Shape>& preds, std::span<const TrainingSample> set) {
        double sum = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) sum += 0.5 * (preds[i].coords - set[i].truth.coords).squaredNorm();
        return sum / static_cast<double>(preds.size());
    };
    double criterion = 0.0;
    auto evaluate = [&](double& train_err, double& val_err) {
        const auto tp = layer_predictions(W, b, p, train_in);
        train_err = mean_error(tp, train, nullptr);
        if (has_val) {
            const auto vp = layer_predictions(W, b, p, val_in);
            val_err = mean_error(vp, validation, nullptr);
            criterion = objective(vp, validation);
        } else {
            val_err = train_err;
            criterion = objective(tp, train);
        }
        require_finite(train_err, "training error");
        require_finite(criterion, "stage objective");
    };

    OptimizerState state = OptimizerState::init(model, cfg.learning_rate, cfg.momentum);
    Gradients grads = Gradients::zeros_like(model);
    Eigen::MatrixXd& gW = stage == 0 ? grads.W0 : grads.W[stage - 1];
    Eigen::VectorXd& gb = stage == 0 ? grads.b0 : grads.b[stage - 1];

    double train_err = 0.0;
    double val_err = 0.0;
    evaluate(train_err, val_err);
    state.end_epoch(criterion, cfg.patience_epochs, cfg.lr_decay_factor);
    Eigen::MatrixXd best_W = W;
    Eigen::VectorXd best_b = b;
    if (on_epoch) on_epoch({0, phase, state.learning_rate, train_err, val_err});

    Rng rng = phase_rng(cfg.seed, stage + 1);
    for (int epoch = 1; epoch <= cfg.stage_epochs; ++epoch) {
        if (state.learning_rate < cfg.min_learning_rate * (1.0 - 1e-9)) break;
        const double lr_used = state.learning_rate;
        const auto order = shuffled_indices(train.size(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            gW.setZero();
            gb.setZero();
            for (std::size_t k = start; k < end; ++k) {
                const auto i = order[k];
                const auto mask = DropoutMask::sample(train_in.phi[i].size(), p, rng);
                const Eigen::VectorXd kept = train_in.phi[i].cwiseProduct(mask.bits);
                const Eigen::VectorXd r = train_in.base[i].coords + W * kept + b - train[i].truth.coords;
                gW.noalias() += r * kept.transpose();
                gb += r;
            }
            if (!gW.allFinite() || !gb.allFinite()) {
                throw NumericError("non-finite gradient in " + phase);
            }
            sgd_step(model, grads, state, end - start);
        }
        evaluate(train_err, val_err);
        if (state.end_epoch(criterion, cfg.patience_epochs, cfg.lr_decay_factor)) {
            best_W = W;
            best_b = b;
        }
        if (on_epoch) on_epoch({epoch, phase, lr_used, train_err, val_err});
    }
    W = std::move(best_W);
    b = std::move(best_b);
}

} // namespace

CascadeModel pretrain_sequential(std::span<const TrainingSample> train, std::span<const TrainingSample> validation,
                                 const ModelSpec& spec, const TrainConfig& cfg, const EpochCallback& on_epoch)
{
    cfg.validate();
    if (train.empty()) {
        throw std::invalid_argument("pretrain_sequential: empty training set");
    }
    const auto rows = static_cast<Eigen::Index>(2 * spec.layout.num_landmarks);
    for (const auto& s : train) {
        if (s.truth.coords.size() != rows) {
            throw std::invalid_argument("pretrain_sequential: sample shape does not match the landmark layout");
        }
    }

    std::optional<Shape> mean;
    if (!spec.with_global) {
        std::vector<Shape> truths;
        truths.reserve(train.size());
        for (const auto& s : train) truths.push_back(s.truth);
        mean = mean_shape(truths);
    }
    CascadeModel model =
        CascadeModel::zeros(spec.layout, spec.hog, spec.local_cfgs, cfg.dropout_rate, spec.with_global, mean);

    // Current inference-mode output of the frozen prefix for every sample.
    auto initial_inputs = [&](std::span<const TrainingSample> set) {
        LayerInputs in;
        for (const auto& s : set) {
            in.base.push_back(Shape::zeros(spec.layout.num_landmarks));
            in.phi.push_back(s.global_features);
        }
        return in;
    };
    LayerInputs train_in;
    LayerInputs val_in;
    std::vector<Shape> train_cur;
    std::vector<Shape> val_cur;

    if (spec.with_global) {
        train_in = initial_inputs(train);
        val_in = initial_inputs(validation);
        train_layer(model, 0, train_in, train, val_in, validation, cfg, on_epoch);
        train_cur = layer_predictions(model.W0, model.b0, model.dropout_rate, train_in);
        val_cur = layer_predictions(model.W0, model.b0, model.dropout_rate, val_in);
    } else {
        train_cur.assign(train.size(), *mean);
        val_cur.assign(validation.size(), *mean);
    }

    for (std::size_t t = 1; t <= model.num_stages(); ++t) {
        train_in = LayerInputs{train_cur, {}};
        val_in = LayerInputs{val_cur, {}};
        for (std::size_t i = 0; i < train.size(); ++i) {
            train_in.phi.push_back(train[i].local_features->features(t - 1, train_cur[i]));
        }
        for (std::size_t i = 0; i < validation.size(); ++i) {
            val_in.phi.push_back(validation[i].local_features->features(t - 1, val_cur[i]));
        }
        train_layer(model, t, train_in, train, val_in, validation, cfg, on_epoch);
        const auto& st = model.stages[t - 1];
        train_cur = layer_predictions(st.W, st.b, model.dropout_rate, train_in);
        val_cur = layer_predictions(st.W, st.b, model.dropout_rate, val_in);
    }
    return model;
}

std::vector<Shape> stage_predictions(const CascadeModel& model, const TrainingSample& sample)
{
    Rng unused(0);
    return forward(model, sample.global_features, *sample.local_features, Mode::Inference, unused).shapes;
}

namespace {

std::vector<Shape> final_predictions(const CascadeModel& model, std::span<const TrainingSample> samples)
{
    std::vector<Shape> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(stage_predictions(model, s).back());
    return out;
}

} // namespace

double mean_final_error(const CascadeModel& model, std::span<const TrainingSample> samples, std::size_t* excluded)
{
    return mean_error(final_predictions(model, samples), samples, excluded);
}

CascadeModel train_joint(CascadeModel model, std::span<const TrainingSample> train,
                         std::span<const TrainingSample> validation, const TrainConfig& cfg,
                         const EpochCallback& on_epoch)
{
    cfg.validate();
    model.validate();
    if (cfg.max_epochs == 0) {
        return model;
    }
    if (train.empty()) {
        throw std::invalid_argument("train_joint: empty training set");
    }
    const bool has_val = !validation.empty();
    auto evaluate = [&](double& train_err, double& val_err) {
        train_err = mean_final_error(model, train);
        val_err = has_val ? mean_final_error(model, validation) : train_err;
        require_finite(train_err, "training error");
    };

    OptimizerState state = OptimizerState::init(model, cfg.learning_rate, cfg.momentum);
    double train_err = 0.0;
    double val_err = 0.0;
    evaluate(train_err, val_err);
    state.end_epoch(val_err, cfg.patience_epochs, cfg.lr_decay_factor);
    CascadeModel best = model;
    if (on_epoch) on_epoch({0, "joint", state.learning_rate, train_err, val_err});

    Rng rng = phase_rng(cfg.seed, 0xC0FFEE);
    Gradients grads = Gradients::zeros_like(model);
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (state.learning_rate < cfg.min_learning_rate * (1.0 - 1e-9)) break;
        const double lr_used = state.learning_rate;
        const auto order = shuffled_indices(train.size(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            grads = Gradients::zeros_like(model);
            for (std::size_t k = start; k < end; ++k) {
                const auto& s = train[order[k]];
                const auto trace = forward(model, s.global_features, *s.local_features, Mode::Training, rng);
                grads += backward(model, trace, s.truth, *s.local_features);
            }
            if (!grads.all_finite()) {
                throw NumericError("non-finite gradient in joint training");
            }
            sgd_step(model, grads, state, end - start);
        }
        evaluate(train_err, val_err);
        if (state.end_epoch(val_err, cfg.patience_epochs, cfg.lr_decay_factor)) {
            best = model;
        }
        if (on_epoch) on_epoch({epoch, "joint", lr_used, train_err, val_err});
    }
    return best;
}

std::vector<StageStats> stage_bias_variance(const CascadeModel& model, std::span<const TrainingSample> samples,
                                            std::size_t* excluded)
{
    if (samples.empty()) {
        throw std::invalid_argument("stage_bias_variance: empty dataset");
    }
    const auto stages = model.num_stages() + 1;
    std::vector<std::vector<double>> errs(stages);
    std::size_t skipped = 0;
    for (const auto& s : samples) {
        if (!(s.d_pupils > 0.0)) {
            ++skipped;
            continue;
        }
        const auto shapes = stage_predictions(model, s);
        for (std::size_t t = 0; t < stages; ++t) {
            errs[t].push_back(normalized_error(shapes[t], s.truth, s.d_pupils));
        }
    }
    if (excluded) *excluded = skipped;
    std::vector<StageStats> out(stages);
    for (std::size_t t = 0; t < stages; ++t) {
        const auto& e = errs[t];
        if (e.empty()) {
            out[t] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
            continue;
        }
        const double n = static_cast<double>(e.size());
        const double mean = std::accumulate(e.begin(), e.end(), 0.0) / n;
        double var = 0.0;
        for (double v : e) var += (v - mean) * (v - mean);
        out[t] = {mean, std::sqrt(var / n)};
    }
    return out;
}

} // namespace drc

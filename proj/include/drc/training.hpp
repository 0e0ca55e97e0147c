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
#include "drc/sample.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace drc {

struct TrainConfig {
    std::size_t stages = 5;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    std::size_t batch_size = 100;
    double dropout_rate = 0.5; ///< keep probability p
    double epsilon = 2.0;
    int patience_epochs = 10;
    double lr_decay_factor = 0.1;
    double min_learning_rate = 1e-5;
    int max_epochs = 100;   ///< joint fine-tuning
    int stage_epochs = 100; ///< each sequential stage
    std::size_t validation_count = 200;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Descriptor configs for T stages: 32 px patches, the last stage 16 px.
std::vector<LocalDescriptorConfig> default_local_configs(std::size_t stages, double epsilon);

/// Cached per-sample inputs for training and evaluation.
struct TrainingSample {
    Eigen::VectorXd global_features; ///< phi^0; empty when the model has no global layer
    std::shared_ptr<const LocalFeatureField> local_features;
    Shape truth;
    double d_pupils = 0.0;
};

std::vector<TrainingSample> prepare_samples(std::span<const FaceSample> faces, const HogConfig& hog,
                                            std::span<const LocalDescriptorConfig> local_cfgs, bool with_global);

/// Uniform random hold-out of `validation_count` samples. Returns
/// (train, validation); throws std::invalid_argument when the hold-out would
/// leave nothing to train on.
std::pair<std::vector<FaceSample>, std::vector<FaceSample>>
split_validation(std::vector<FaceSample> samples, std::size_t validation_count, std::uint64_t seed);

/// Originals followed by their horizontally mirrored copies.
std::vector<FaceSample> augment_flip(std::span<const FaceSample> samples, const LandmarkLayout& layout);

struct OptimizerState {
    Gradients velocity;
    double momentum = 0.9;
    double learning_rate = 1e-2;
    int epochs_since_improvement = 0;
    double best_validation_error = 0.0;

    static OptimizerState init(const CascadeModel& model, double learning_rate, double momentum);

    /// Records a validation error; decays the rate after `patience` stale
    /// epochs. Returns true when the error improved on the best so far.
    bool end_epoch(double validation_error, int patience, double decay);
};

/// v <- momentum v - lr g / batch_size; params <- params + v.
void sgd_step(CascadeModel& model, const Gradients& grads, OptimizerState& state, std::size_t batch_size);

struct EpochRecord {
    int epoch = 0;
    std::string phase; ///< "seq-stage-<t>" or "joint"
    double learning_rate = 0.0;
    double train_error = 0.0;
    double validation_error = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Which parts of the cascade the model carries.
struct ModelSpec {
    LandmarkLayout layout;
    HogConfig hog;
    std::vector<LocalDescriptorConfig> local_cfgs;
    bool with_global = true;
};

/**
 * Sequential learning: fits the global layer, then each local layer in turn
 * against the residual of the frozen prefix, all by mini-batch SGD with
 * dropout. Each stage keeps its best-validation parameters.
 *
 * Without a global layer the cascade starts from the mean training shape.
 */
CascadeModel pretrain_sequential(std::span<const TrainingSample> train, std::span<const TrainingSample> validation,
                                 const ModelSpec& spec, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Joint learning by back-propagation through the whole cascade. Returns the
/// parameters with the lowest validation error seen, the input included.
CascadeModel train_joint(CascadeModel model, std::span<const TrainingSample> train,
                         std::span<const TrainingSample> validation, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

/// Inference-mode shapes s^0..s^T for one prepared sample.
std::vector<Shape> stage_predictions(const CascadeModel& model, const TrainingSample& sample);

struct StageStats {
    double mean = 0.0;
    double stddev = 0.0; ///< population standard deviation
};

/// Mean and spread of the normalised error at every stage 0..T. Samples with
/// a non-positive inter-pupil distance are skipped and counted in `excluded`.
std::vector<StageStats> stage_bias_variance(const CascadeModel& model, std::span<const TrainingSample> samples,
                                            std::size_t* excluded = nullptr);

/// Mean normalised error of the final stage.
double mean_final_error(const CascadeModel& model, std::span<const TrainingSample> samples,
                        std::size_t* excluded = nullptr);

} // namespace drc

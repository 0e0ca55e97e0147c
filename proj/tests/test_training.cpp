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
#include "doctest.h"
#include "test_support.hpp"

#include "drc/synthetic.hpp"
#include "drc/training.hpp"

#include <Eigen/Dense>

#include <random>

using namespace drc;
using drc::testing::AnalyticField;
using drc::testing::random_model;
using drc::testing::five_dim_hog;
using drc::testing::linear_problem;
using drc::testing::tiny_hog;

namespace {

ModelSpec global_only_spec(std::size_t T = 0)
{
    ModelSpec spec;
    spec.layout = drc::testing::ring_layout(2);
    spec.hog = five_dim_hog();
    spec.local_cfgs.assign(T, LocalDescriptorConfig{16, 2.0, 0.0});
    return spec;
}

SyntheticConfig small_synthetic(std::size_t count, std::uint64_t seed)
{
    SyntheticConfig cfg;
    cfg.sample_count = count;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("sgd_step")
{
    CascadeModel m = random_model(2, 1, tiny_hog(), 1);
    const CascadeModel before = m;
    OptimizerState st = OptimizerState::init(m, 0.1, 0.9);
    sgd_step(m, Gradients::zeros_like(m), st, 10);
    CHECK(m == before);

    Gradients g = Gradients::zeros_like(m);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < g.W0.size(); ++i) g.W0.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < g.W[0].size(); ++i) g.W[0].data()[i] = n(rng);
    g.b[0].setConstant(0.5);

    CascadeModel plain = before;
    OptimizerState st0 = OptimizerState::init(plain, 0.1, 0.0);
    sgd_step(plain, g, st0, 4);
    CHECK((plain.W0 - (before.W0 - 0.1 * g.W0 / 4)).norm() < 1e-15);
    CHECK((plain.stages[0].b - (before.stages[0].b - 0.1 * g.b[0] / 4)).norm() < 1e-15);

    CascadeModel mom = before;
    OptimizerState st9 = OptimizerState::init(mom, 0.1, 0.9);
    sgd_step(mom, g, st9, 4);
    sgd_step(mom, g, st9, 4);
    // v1 = -lr g/B, v2 = 0.9 v1 - lr g/B: total displacement -lr g (1 + 1.9) / B.
    CHECK((mom.W0 - before.W0 + 0.1 * g.W0 * 2.9 / 4).norm() < 1e-13);

    Gradients bad = g;
    bad.W.pop_back();
    CHECK_THROWS_AS(sgd_step(mom, bad, st9, 4), std::invalid_argument);
}

TEST_CASE("plateau schedule decays the learning rate")
{
    CascadeModel m = random_model(2, 0, tiny_hog(), 1);
    OptimizerState st = OptimizerState::init(m, 1e-2, 0.9);
    CHECK(st.end_epoch(1.0, 3, 0.1));
    CHECK_FALSE(st.end_epoch(1.0, 3, 0.1));
    CHECK_FALSE(st.end_epoch(1.5, 3, 0.1));
    CHECK(st.learning_rate == 1e-2);
    CHECK_FALSE(st.end_epoch(1.2, 3, 0.1));
    CHECK(st.learning_rate == doctest::Approx(1e-3));
    CHECK(st.end_epoch(0.5, 3, 0.1));
}

TEST_CASE("sequential global stage reaches the least-squares solution")
{
    const auto lp = linear_problem(20, 3);
    const Eigen::MatrixXd theta = (lp.X.transpose() * lp.X).ldlt().solve(lp.X.transpose() * lp.Y); // (d+1) x 2P

    TrainConfig cfg;
    cfg.stages = 0;
    cfg.dropout_rate = 1.0;
    cfg.stage_epochs = 5000;
    cfg.patience_epochs = 5000;
    const auto model = pretrain_sequential(lp.samples, {}, global_only_spec(), cfg);
    Eigen::MatrixXd fitted(6, 4);
    fitted << model.W0.transpose(), model.b0.transpose();
    const double rel = (fitted - theta).norm() / theta.norm();
    MESSAGE("relative parameter error " << rel);
    CHECK(rel < 1e-3);
    CHECK(model.num_stages() == 0);

    // Residual of the fitted model equals the least-squares residual.
    const Eigen::MatrixXd resid_ls = lp.X * theta - lp.Y;
    Eigen::MatrixXd resid(20, 4);
    for (Eigen::Index i = 0; i < 20; ++i) {
        resid.row(i) = (model.W0 * lp.samples[static_cast<std::size_t>(i)].global_features + model.b0).transpose() - lp.Y.row(i);
    }
    CHECK(resid.norm() == doctest::Approx(resid_ls.norm()).epsilon(1e-4));
}

TEST_CASE("full-batch gradient descent decreases a convex stage objective")
{
    const auto lp = linear_problem(20, 4);
    CascadeModel m = CascadeModel::zeros(drc::testing::ring_layout(2), five_dim_hog(), {}, 1.0, true);
    OptimizerState st = OptimizerState::init(m, 1e-3, 0.0);
    auto objective = [&] {
        double e = 0;
        for (const auto& s : lp.samples) e += 0.5 * (m.W0 * s.global_features + m.b0 - s.truth.coords).squaredNorm();
        return e;
    };
    double prev = objective();
    for (int step = 0; step < 50; ++step) {
        Gradients g = Gradients::zeros_like(m);
        for (const auto& s : lp.samples) {
            const Eigen::VectorXd r = m.W0 * s.global_features + m.b0 - s.truth.coords;
            g.W0 += r * s.global_features.transpose();
            g.b0 += r;
        }
        sgd_step(m, g, st, lp.samples.size());
        const double cur = objective();
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("pretraining freezes earlier stages")
{
    const auto faces = generate_synthetic(small_synthetic(60, 5));
    const auto layout = synthetic_layout(small_synthetic(60, 5));
    TrainConfig cfg;
    cfg.stage_epochs = 4;
    cfg.batch_size = 20;
    ModelSpec spec{layout, HogConfig{}, default_local_configs(2, 2.0), true};
    const auto train = prepare_samples(faces, spec.hog, spec.local_cfgs, true);

    ModelSpec one = spec;
    one.local_cfgs.resize(1);
    const auto short_cascade = pretrain_sequential(train, {}, one, cfg);
    const auto long_cascade = pretrain_sequential(train, {}, spec, cfg);
    CHECK(short_cascade.W0 == long_cascade.W0);
    CHECK(short_cascade.b0 == long_cascade.b0);
    CHECK(short_cascade.stages[0] == long_cascade.stages[0]);
}

TEST_CASE("sequential stages do not increase training error")
{
    const auto scfg = small_synthetic(300, 6);
    const auto faces = generate_synthetic(scfg);
    TrainConfig cfg;
    cfg.stage_epochs = 30;
    cfg.batch_size = 50;
    ModelSpec spec{synthetic_layout(scfg), HogConfig{}, default_local_configs(3, 2.0), true};
    const auto train = prepare_samples(faces, spec.hog, spec.local_cfgs, true);
    const auto model = pretrain_sequential(train, {}, spec, cfg);
    const auto stats = stage_bias_variance(model, train);
    REQUIRE(stats.size() == 4);
    for (std::size_t t = 1; t < stats.size(); ++t) {
        MESSAGE("stage " << t << " mean " << stats[t].mean);
        CHECK(stats[t].mean <= stats[t - 1].mean);
    }
}

TEST_CASE("train_joint contracts")
{
    const auto scfg = small_synthetic(120, 7);
    const auto faces = generate_synthetic(scfg);
    auto [tr, va] = split_validation(faces, 30, 3);
    TrainConfig cfg;
    cfg.stage_epochs = 5;
    cfg.batch_size = 30;
    ModelSpec spec{synthetic_layout(scfg), HogConfig{}, default_local_configs(2, 2.0), true};
    const auto train = prepare_samples(tr, spec.hog, spec.local_cfgs, true);
    const auto val = prepare_samples(va, spec.hog, spec.local_cfgs, true);
    const auto pre = pretrain_sequential(train, val, spec, cfg);

    TrainConfig none = cfg;
    none.max_epochs = 0;
    CHECK(train_joint(pre, train, val, none) == pre);

    cfg.max_epochs = 4;
    std::vector<EpochRecord> log;
    const auto joint = train_joint(pre, train, val, cfg, [&](const EpochRecord& r) { log.push_back(r); });
    CHECK(log.size() == 5);
    CHECK(log.front().phase == "joint");
    CHECK(mean_final_error(joint, val) <= mean_final_error(pre, val));

    // Same seed, same result.
    CHECK(train_joint(pre, train, val, cfg) == joint);
}

TEST_CASE("split and flip augmentation")
{
    const auto scfg = small_synthetic(10, 8);
    const auto faces = generate_synthetic(scfg);
    const auto layout = synthetic_layout(scfg);
    CHECK_THROWS_AS(split_validation(faces, 10, 1), std::invalid_argument);
    auto [a, b] = split_validation(faces, 3, 1);
    CHECK(a.size() == 7);
    CHECK(b.size() == 3);

    CHECK(augment_flip(std::vector<FaceSample>{}, layout).empty());
    const auto aug = augment_flip(faces, layout);
    REQUIRE(aug.size() == 20);
    const auto back = augment_flip(std::vector<FaceSample>{aug[10]}, layout);
    CHECK(back[1].image == faces[0].image);
    CHECK((back[1].truth.coords - faces[0].truth.coords).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(aug[10].d_pupils == doctest::Approx(interpupil_distance(aug[10].truth, layout)));
}

TEST_CASE("stage_bias_variance degenerate statistics")
{
    auto field = std::make_shared<AnalyticField>(2);
    CascadeModel m = CascadeModel::zeros(drc::testing::ring_layout(2), five_dim_hog(),
                                         std::vector<LocalDescriptorConfig>(3, LocalDescriptorConfig{16, 2.0, 0.0}), 0.5, true);
    Shape truth = Shape::zeros(2);
    truth.coords << 10, 12, 30, 15;
    m.b0 = truth.coords;
    const std::vector<TrainingSample> one{{Eigen::VectorXd::Ones(5), field, truth, 20.0}};
    const auto stats = stage_bias_variance(m, one);
    REQUIRE(stats.size() == 4);
    for (const auto& s : stats) {
        CHECK(s.mean == 0.0);
        CHECK(s.stddev == 0.0);
    }

    std::vector<TrainingSample> two = one;
    two.push_back({Eigen::VectorXd::Ones(5), field, Shape((truth.coords.array() + 3.0).matrix().eval()), 10.0});
    two.push_back({Eigen::VectorXd::Ones(5), field, truth, 0.0});
    std::size_t excluded = 0;
    const auto s2 = stage_bias_variance(m, two, &excluded);
    CHECK(excluded == 1);
    // Errors {0, 3 sqrt(2) / 10}: mean and population deviation are both half of it.
    const double e = 3.0 * std::sqrt(2.0) / 10.0;
    CHECK(s2[0].mean == doctest::Approx(e / 2));
    CHECK(s2[0].stddev == doctest::Approx(e / 2));
}

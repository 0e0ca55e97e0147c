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
// Acceptance checks for the cascade. Prints one PASS/FAIL line per criterion
// and exits non-zero if any criterion fails.
#include "test_support.hpp"

#include "drc/cli.hpp"
#include "drc/errors.hpp"
#include "drc/hog.hpp"
#include "drc/model_io.hpp"
#include "drc/response_maps.hpp"
#include "drc/synthetic.hpp"
#include "drc/training.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace drc;
namespace fs = std::filesystem;
using drc::testing::relative_error;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

int g_failures = 0;
std::vector<int> g_selected; // empty runs everything

void report(int id, const std::string& title, const std::function<Verdict()>& body)
{
    if (!g_selected.empty() && std::find(g_selected.begin(), g_selected.end(), id) == g_selected.end()) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++g_failures;
    std::printf("[%s] criterion %d: %s (%s; %.1f s)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(),
                secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------ gradients

Verdict last_stage_gradient()
{
    const auto t0 = std::chrono::steady_clock::now();
    SyntheticConfig sc;
    sc.image_size = 64;
    sc.sample_count = 1;
    sc.seed = 31;
    const auto face = generate_synthetic(sc).front();
    const auto cfgs = default_local_configs(2, 2.0);
    const ImageFeatureField field(face.image, cfgs);
    const Eigen::VectorXd phi0 = extract_global(face.image, HogConfig{});

    // P = 3 model whose global layer lands near the true landmarks.
    CascadeModel m = drc::testing::random_model(3, 2, HogConfig{}, 41, 0.01, 0.0);
    m.local_cfgs = cfgs;
    m.b0 = face.truth.coords.head(6);
    Shape truth(face.truth.coords.head(6).eval());
    truth.coords.array() += 1.5;

    auto energy = [&](const CascadeModel& model) {
        Rng rng(77);
        return half_squared_error(forward(model, phi0, field, Mode::Training, rng), truth);
    };
    Rng rng(77);
    const auto g = backward(m, forward(m, phi0, field, Mode::Training, rng), truth, field);
    const double h = 1e-5;
    double worst = 0.0;
    CascadeModel probe = m;
    auto& W = probe.stages.back().W;
    for (Eigen::Index i = 0; i < W.size(); ++i) {
        const double orig = W.data()[i];
        W.data()[i] = orig + h;
        const double ep = energy(probe);
        W.data()[i] = orig - h;
        const double em = energy(probe);
        W.data()[i] = orig;
        worst = std::max(worst, relative_error(g.W.back().data()[i], (ep - em) / (2 * h), 1e-6));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 10.0,
            "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(W.size()) + " weights, " +
                fmt("%.2f", secs) + " s"};
}

Verdict full_chain_gradient()
{
    const auto t0 = std::chrono::steady_clock::now();
    const drc::testing::AnalyticField field(5);
    std::mt19937_64 gen(13);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd phi0(20);
    for (auto& v : phi0) v = n(gen);
    const CascadeModel m = drc::testing::random_model(2, 3, drc::testing::tiny_hog(), 7, 0.02);
    Shape truth = Shape::zeros(2);
    for (Eigen::Index i = 0; i < 4; ++i) truth.coords[i] = 2.0 * n(gen);

    auto energy = [&](const CascadeModel& model) {
        Rng rng(5);
        return half_squared_error(forward(model, phi0, field, Mode::Training, rng), truth);
    };
    Rng rng(5);
    const auto g = backward(m, forward(m, phi0, field, Mode::Training, rng), truth, field);
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0;
    CascadeModel probe = m;
    auto check = [&](Eigen::MatrixXd& W, const Eigen::MatrixXd& grad) {
        for (Eigen::Index i = 0; i < W.size(); ++i) {
            const double orig = W.data()[i];
            W.data()[i] = orig + h;
            const double ep = energy(probe);
            W.data()[i] = orig - h;
            const double em = energy(probe);
            W.data()[i] = orig;
            worst = std::max(worst, relative_error(grad.data()[i], (ep - em) / (2 * h), 1e-6));
            ++checked;
        }
    };
    check(probe.W0, g.W0);
    for (std::size_t t = 0; t < probe.stages.size(); ++t) check(probe.stages[t].W, g.W[t]);
    const double secs = seconds_since(t0);
    return {worst < 1e-3 && secs < 30.0, "max relative error " + fmt("%.3g", worst) + " over " +
                                             std::to_string(checked) + " weights, " + fmt("%.2f", secs) + " s"};
}

// ------------------------------------------------------------- least squares

Verdict least_squares_oracle()
{
    const auto lp = drc::testing::linear_problem(20, 3);
    const Eigen::MatrixXd theta = (lp.X.transpose() * lp.X).ldlt().solve(lp.X.transpose() * lp.Y);
    ModelSpec spec;
    spec.layout = drc::testing::ring_layout(2);
    spec.hog = drc::testing::five_dim_hog();
    TrainConfig cfg;
    cfg.stages = 0;
    cfg.dropout_rate = 1.0;
    cfg.stage_epochs = 5000;
    cfg.patience_epochs = 5000;
    int epochs = 0;
    const auto model = pretrain_sequential(lp.samples, {}, spec, cfg, [&](const EpochRecord& r) { epochs = r.epoch; });
    Eigen::MatrixXd fitted(theta.rows(), theta.cols());
    fitted << model.W0.transpose(), model.b0.transpose();
    const double rel = (fitted - theta).norm() / theta.norm();
    return {rel < 1e-3 && epochs <= 5000,
            "relative parameter error " + fmt("%.3g", rel) + " after " + std::to_string(epochs) + " epochs"};
}

// ------------------------------------------------------- synthetic benchmark

struct BenchmarkResult {
    std::vector<StageStats> sequential;
    std::vector<StageStats> joint;
    double seconds = 0.0;
};

std::vector<double> drop_fractions(const std::vector<StageStats>& s)
{
    const double total = s.front().mean - s.back().mean;
    std::vector<double> out;
    for (std::size_t t = 1; t < s.size(); ++t) out.push_back((s[t - 1].mean - s[t].mean) / total);
    return out;
}

std::string stage_table(const char* name, const std::vector<StageStats>& s)
{
    std::ostringstream os;
    os << "    " << name << ":";
    for (std::size_t t = 0; t < s.size(); ++t) {
        os << " [" << t << "] " << fmt("%.5f", s[t].mean) << "+-" << fmt("%.5f", s[t].stddev);
    }
    return os.str();
}

const BenchmarkResult& benchmark()
{
    static const BenchmarkResult result = [] {
        const auto t0 = std::chrono::steady_clock::now();
        // The default synthetic face at twice the size, so that the 32 and 16 pixel
        // patches sit at the scale they have on real face crops.
        SyntheticConfig sc;
        sc.sample_count = 2700;
        sc.seed = 2024;
        sc.image_size = 96;
        sc.face_scale = 2.0;
        sc.translation *= 2.0;
        sc.jitter_sigma *= 2.0;
        sc.blob_sigma *= 2.0;
        auto faces = generate_synthetic(sc);
        const std::vector<FaceSample> train_faces(faces.begin(), faces.begin() + 2000);
        const std::vector<FaceSample> val_faces(faces.begin() + 2000, faces.begin() + 2200);
        const std::vector<FaceSample> test_faces(faces.begin() + 2200, faces.end());
        faces.clear();
        faces.shrink_to_fit();

        TrainConfig cfg;
        cfg.stages = 5;
        cfg.seed = 7;
        const ModelSpec spec{synthetic_layout(sc), HogConfig{}, default_local_configs(cfg.stages, cfg.epsilon), true};
        const auto train = prepare_samples(train_faces, spec.hog, spec.local_cfgs, true);
        const auto val = prepare_samples(val_faces, spec.hog, spec.local_cfgs, true);
        const auto test = prepare_samples(test_faces, spec.hog, spec.local_cfgs, true);
        std::printf("    %zu samples prepared after %.0f s\n", train.size() + val.size() + test.size(), seconds_since(t0));

        const auto sequential = pretrain_sequential(train, val, spec, cfg);
        std::printf("    sequential pre-training done after %.0f s\n", seconds_since(t0));
        std::fflush(stdout);
        const auto joint = train_joint(sequential, train, val, cfg);

        BenchmarkResult r;
        r.sequential = stage_bias_variance(sequential, test);
        r.joint = stage_bias_variance(joint, test);
        r.seconds = seconds_since(t0);
        std::printf("%s\n%s\n", stage_table("sequential", r.sequential).c_str(), stage_table("joint", r.joint).c_str());
        return r;
    }();
    return result;
}

Verdict ordering_claim()
{
    const auto& r = benchmark();
    const auto seq = drop_fractions(r.sequential);
    const auto joint = drop_fractions(r.joint);
    const double seq_first = seq.front();
    const double seq_max = *std::max_element(seq.begin(), seq.end());
    const double joint_max = *std::max_element(joint.begin(), joint.end());
    const double seq_final = r.sequential.back().mean;
    const double joint_final = r.joint.back().mean;
    const bool total_ok = r.sequential.front().mean > seq_final && r.joint.front().mean > joint_final;
    const bool a = total_ok && seq_first > 0.5 && joint_max < seq_max;
    const bool b = joint_final <= seq_final;
    return {a && b && r.seconds < 1800.0,
            "(a) sequential stage-1 drop fraction " + fmt("%.3f", seq_first) + ", largest " + fmt("%.3f", seq_max) +
                ", joint largest " + fmt("%.3f", joint_max) + (a ? " ok" : " violated") + "; (b) final error joint " +
                fmt("%.5f", joint_final) + " vs sequential " + fmt("%.5f", seq_final) + (b ? " ok" : " violated") +
                "; training " + fmt("%.0f", r.seconds) + " s"};
}

Verdict variance_claim()
{
    const auto& r = benchmark();
    bool monotone = true;
    std::string worst_step = "none";
    double worst_ratio = 0.0;
    for (std::size_t t = 2; t < r.joint.size(); ++t) {
        const double ratio = r.joint[t].stddev / r.joint[t - 1].stddev;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_step = std::to_string(t - 1) + "->" + std::to_string(t);
        }
        if (r.joint[t].stddev > 1.05 * r.joint[t - 1].stddev) monotone = false;
    }
    const bool final_ok = r.joint.back().stddev <= r.sequential.back().stddev;
    return {monotone && final_ok, "largest joint std ratio " + fmt("%.3f", worst_ratio) + " at stage " + worst_step +
                                      "; final std joint " + fmt("%.5f", r.joint.back().stddev) + " vs sequential " +
                                      fmt("%.5f", r.sequential.back().stddev)};
}

// ------------------------------------------------------------------- dropout

Verdict dropout_expectation()
{
    const CascadeModel m = drc::testing::random_model(5, 0, HogConfig{}, 17, 0.05);
    SyntheticConfig sc;
    sc.sample_count = 1;
    const Eigen::VectorXd phi0 = extract_global(generate_synthetic(sc).front().image, HogConfig{});
    const Shape expected = global_forward(m, phi0, nullptr);
    const auto dim = static_cast<Eigen::Index>(expected.coords.size());
    const int N = 10000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(dim);
    Rng rng(99);
    for (int k = 0; k < N; ++k) {
        const auto mask = DropoutMask::sample(phi0.size(), m.dropout_rate, rng);
        const Eigen::VectorXd s = global_forward(m, phi0, &mask).coords;
        sum += s;
        sumsq += s.cwiseProduct(s);
    }
    const Eigen::VectorXd mean = sum / N;
    const Eigen::VectorXd var = (sumsq / N - mean.cwiseProduct(mean)) * (double(N) / (N - 1));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double se = std::sqrt(var[i] / N);
        worst = std::max(worst, std::abs(mean[i] - expected.coords[i]) / se);
    }
    return {worst < 3.0, "largest deviation " + fmt("%.2f", worst) + " standard errors over " + std::to_string(dim) +
                             " coordinates"};
}

// ----------------------------------------------------------- infrastructure

Verdict descriptor_infrastructure()
{
    SyntheticConfig sc;
    sc.sample_count = 1;
    sc.seed = 5;
    const GrayImage img = generate_synthetic(sc).front().image;
    const double sigma = 4.0;
    const auto planes = blurred_responses(img, sigma);
    const ResponseMaps maps = build_response_maps(img, sigma);
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> ux(0, img.width);
    std::uniform_int_distribution<int> uy(0, img.height);
    std::uniform_int_distribution<int> ub(0, kOrientationBins - 1);
    int mismatches = 0;
    for (int k = 0; k < 100; ++k) {
        int x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        const int bin = ub(rng);
        double naive = 0.0;
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) naive += planes.at(bin, x, y);
        }
        if (maps.rect_sum(bin, x0, y0, x1, y1) != naive) ++mismatches;
    }
    const auto hog_dim = extract_global(img, HogConfig{}).size();
    return {mismatches == 0 && hog_dim == 1764 && HogConfig{}.dimension() == 1764,
            std::to_string(mismatches) + " of 100 rectangle sums differ; HOG dimension " + std::to_string(hog_dim)};
}

CascadeModel random_serializable_model(std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> P_dist(2, 8);
    std::uniform_int_distribution<std::size_t> T_dist(0, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t P = P_dist(rng);
    const std::size_t T = T_dist(rng);
    const HogConfig hog = coin(rng) ? drc::testing::tiny_hog() : drc::testing::five_dim_hog();
    std::vector<LocalDescriptorConfig> cfgs;
    for (std::size_t t = 0; t < T; ++t) {
        cfgs.push_back({coin(rng) ? 16 : 32, 0.5 + std::abs(n(rng)), coin(rng) ? 0.0 : 1.0 + std::abs(n(rng))});
    }
    const bool with_global = coin(rng);
    std::optional<Shape> mean;
    if (!with_global) {
        mean = Shape::zeros(P);
        for (auto& v : mean->coords) v = 30 * n(rng);
    }
    CascadeModel m = CascadeModel::zeros(drc::testing::ring_layout(P), hog, cfgs, std::uniform_real_distribution<>(0.05, 1.0)(rng),
                                         with_global, mean);
    // Values spanning many binades, including subnormals and negative zero.
    auto value = [&] {
        switch (rng() % 8) {
        case 0: return -0.0;
        case 1: return std::numeric_limits<double>::denorm_min() * double(rng() % 1000 + 1);
        case 2: return std::ldexp(n(rng), static_cast<int>(rng() % 600) - 300);
        default: return n(rng);
        }
    };
    auto fill = [&](auto& mat) {
        for (Eigen::Index i = 0; i < mat.size(); ++i) mat.data()[i] = value();
    };
    fill(m.W0);
    fill(m.b0);
    for (auto& st : m.stages) {
        fill(st.W);
        fill(st.b);
    }
    return m;
}

Verdict serialization()
{
    std::mt19937_64 rng(2718);
    const fs::path dir = fs::temp_directory_path() / ("drc_acceptance_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    int roundtrip_failures = 0;
    int truncation_failures = 0;
    std::size_t truncations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = random_serializable_model(rng);
        const fs::path file = dir / "model.drc";
        save_model(m, file);
        if (!(load_model(file) == m)) ++roundtrip_failures;
        const auto bytes = serialize_model(m);
        // A handful of random cut points per model, plus every cut point for a few.
        std::vector<std::size_t> cuts;
        if (trial < 5) {
            for (std::size_t c = 0; c < bytes.size(); ++c) cuts.push_back(c);
        } else {
            for (int k = 0; k < 8; ++k) cuts.push_back(rng() % bytes.size());
        }
        for (std::size_t c : cuts) {
            ++truncations;
            try {
                (void)deserialize_model(std::span(bytes).first(c));
                ++truncation_failures;
            } catch (const CorruptModel&) {
            } catch (...) {
                ++truncation_failures;
            }
        }
    }
    fs::remove_all(dir);
    return {roundtrip_failures == 0 && truncation_failures == 0,
            std::to_string(roundtrip_failures) + " of 1000 round trips differ; " + std::to_string(truncation_failures) +
                " of " + std::to_string(truncations) + " truncated files not rejected as corrupt"};
}

Verdict determinism()
{
    const fs::path dir = fs::temp_directory_path() / ("drc_acceptance_det_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    std::ostringstream sink;
    auto run = [&](std::vector<std::string> args) {
        if (run_cli(args, sink, sink) != kExitOk) throw std::runtime_error("command failed: " + sink.str());
    };
    const std::string data = (dir / "data").string();
    run({"synth", "--out", data, "--count", "60", "--seed", "12"});
    for (const char* name : {"a", "b"}) {
        run({"train", "--data", data, "--model", (dir / name).string() + ".drc", "--stages", "3", "--stage_epochs", "3",
             "--max_epochs", "3", "--batch_size", "20", "--validation_count", "10", "--seed", "5"});
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    const bool model_same = slurp(dir / "a.drc") == slurp(dir / "b.drc");
    const bool log_same = slurp(dir / "a.drc.csv") == slurp(dir / "b.drc.csv");
    const bool nonempty = !slurp(dir / "a.drc").empty() && !slurp(dir / "a.drc.csv").empty();
    fs::remove_all(dir);
    return {model_same && log_same && nonempty, std::string("model files ") + (model_same ? "identical" : "differ") +
                                                    ", logs " + (log_same ? "identical" : "differ")};
}

} // namespace

// Optional arguments select criteria by number, e.g. `drc_acceptance 5 6`.
int main(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i) g_selected.push_back(std::atoi(argv[i]));
    std::printf("[INFO] criterion 1: published benchmark numbers need the original face datasets; "
                "the property checks below stand in for them\n");
    report(2, "last-stage gradient matches finite differences", last_stage_gradient);
    report(3, "full-chain gradient matches finite differences", full_chain_gradient);
    report(4, "SGD reaches the least-squares solution", least_squares_oracle);
    report(5, "joint training spreads error reduction across stages", ordering_claim);
    report(6, "joint per-stage spread decreases across stages", variance_claim);
    report(7, "dropout output expectation equals the scaled inference output", dropout_expectation);
    report(8, "integral maps and HOG dimension", descriptor_infrastructure);
    report(9, "model serialization round trip and truncation", serialization);
    report(10, "training runs are reproducible", determinism);
    std::printf("%s: %d criterion(s) failed\n", g_failures ? "FAIL" : "PASS", g_failures);
    return g_failures ? 1 : 0;
}

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
#include "drc/cli.hpp"

#include "drc/config.hpp"
#include "drc/dataset.hpp"
#include "drc/errors.hpp"
#include "drc/model_io.hpp"
#include "drc/pts_io.hpp"
#include "drc/image_io.hpp"
#include "drc/synthetic.hpp"
#include "drc/training.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace drc {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr std::string_view kUsage =
    "usage: drcascade <command> [--config FILE] [--key value]...\n"
    "commands:\n"
    "  synth     generate a synthetic dataset (images/, annotations/, layout.cfg)\n"
    "  train     sequential pre-training and optional joint fine-tuning\n"
    "  evaluate  per-sample and mean normalised error as CSV\n"
    "  predict   write predicted .pts files for every image in a directory\n"
    "  diagnose  per-stage mean and standard deviation of the normalised error\n";

// Locale-independent shortest round-trip formatting.
std::string num(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    return out;
}

std::string required(const KeyValueConfig& kv, const std::string& key)
{
    if (!kv.has(key) || kv.get_string(key, "").empty()) {
        throw UsageError("missing required option --" + key);
    }
    return kv.get_string(key, "");
}

// ---------------------------------------------------------------- dataset keys

constexpr std::array<std::string_view, 4> kDataKeys = {"data", "images", "annotations", "layout"};

struct DatasetPaths {
    fs::path images;
    fs::path annotations;
    fs::path layout; ///< may be empty
};

DatasetPaths dataset_paths(const KeyValueConfig& kv)
{
    DatasetPaths p;
    const fs::path root = kv.get_string("data", "");
    p.images = kv.get_string("images", root.empty() ? "" : (root / "images").string());
    p.annotations = kv.get_string("annotations", root.empty() ? "" : (root / "annotations").string());
    p.layout = kv.get_string("layout", root.empty() ? "" : (root / "layout.cfg").string());
    if (p.images.empty() || p.annotations.empty()) {
        throw UsageError("dataset location missing: give --data or both --images and --annotations");
    }
    return p;
}

LandmarkLayout dataset_layout(const DatasetPaths& p, const LandmarkLayout* fallback)
{
    if (!p.layout.empty() && fs::exists(p.layout)) return read_layout(p.layout);
    if (fallback) return *fallback;
    throw DataError("no landmark layout: " + (p.layout.empty() ? std::string("--layout not given") : p.layout.string() + " not found"));
}

std::vector<FaceSample> load_for(const DatasetPaths& p, const LandmarkLayout& layout, std::ostream& err)
{
    auto loaded = load_dataset(p.images, p.annotations, layout);
    for (const auto& issue : loaded.rejected) {
        err << "skipped " << issue.file << ": " << issue.reason << '\n';
    }
    return std::move(loaded.samples);
}

void check_landmarks(const CascadeModel& model, const LandmarkLayout& layout)
{
    if (model.num_landmarks() != layout.num_landmarks) {
        throw DataError("landmark count mismatch: dataset has P = " + std::to_string(layout.num_landmarks) +
                        ", model expects P = " + std::to_string(model.num_landmarks()));
    }
}

// ---------------------------------------------------------------------- synth

constexpr std::array<std::string_view, 17> kSynthKeys = {
    "out",          "count",      "n_points",   "image_size",  "seed",          "scale_min",
    "scale_max",    "rotation_deg", "translation", "jitter_sigma", "blob_sigma", "blob_contrast",
    "contrast_jitter", "background", "noise_sigma", "margin", "face_scale"};

int cmd_synth(const KeyValueConfig& kv, std::ostream& out)
{
    kv.reject_unknown(kSynthKeys);
    const fs::path root = required(kv, "out");
    SyntheticConfig cfg;
    cfg.sample_count = kv.get_uint("count", cfg.sample_count);
    cfg.num_landmarks = kv.get_uint("n_points", cfg.num_landmarks);
    cfg.image_size = static_cast<int>(kv.get_int("image_size", cfg.image_size));
    cfg.seed = kv.get_uint("seed", cfg.seed);
    cfg.scale_min = kv.get_double("scale_min", cfg.scale_min);
    cfg.scale_max = kv.get_double("scale_max", cfg.scale_max);
    cfg.rotation_deg = kv.get_double("rotation_deg", cfg.rotation_deg);
    cfg.translation = kv.get_double("translation", cfg.translation);
    cfg.jitter_sigma = kv.get_double("jitter_sigma", cfg.jitter_sigma);
    cfg.blob_sigma = kv.get_double("blob_sigma", cfg.blob_sigma);
    cfg.blob_contrast = kv.get_double("blob_contrast", cfg.blob_contrast);
    cfg.contrast_jitter = kv.get_double("contrast_jitter", cfg.contrast_jitter);
    cfg.background = kv.get_double("background", cfg.background);
    cfg.noise_sigma = kv.get_double("noise_sigma", cfg.noise_sigma);
    cfg.margin = static_cast<int>(kv.get_int("margin", cfg.margin));
    cfg.face_scale = kv.get_double("face_scale", cfg.face_scale);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const auto samples = generate_synthetic(cfg);
    write_dataset(root, samples);
    if (!samples.empty()) write_layout(root / "layout.cfg", synthetic_layout(cfg));
    out << "wrote " << samples.size() << " samples to " << root.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------- train

constexpr std::array<std::string_view, 30> kTrainKeys = {
    "data",           "images",         "annotations",  "layout",      "model",        "log",
    "mode",           "stages",         "learning_rate", "momentum",   "batch_size",   "dropout_rate",
    "epsilon",        "patience_epochs", "lr_decay_factor", "min_learning_rate", "max_epochs", "stage_epochs",
    "validation_count", "seed",         "flip",         "init_model",  "hog_resize",   "hog_block",
    "hog_stride",     "hog_cell",       "hog_bins",     "patch_sizes", "blur_sigma",   "config"};

enum class TrainMode { Sequential, Joint, JointLocal };

TrainMode parse_mode(const std::string& s)
{
    if (s == "SequentialReg") return TrainMode::Sequential;
    if (s == "DeepReg") return TrainMode::Joint;
    if (s == "DeepRegLocal") return TrainMode::JointLocal;
    throw UsageError("unknown mode '" + s + "' (expected SequentialReg, DeepReg or DeepRegLocal)");
}

TrainConfig train_config(const KeyValueConfig& kv)
{
    TrainConfig c;
    c.stages = kv.get_uint("stages", c.stages);
    c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
    c.momentum = kv.get_double("momentum", c.momentum);
    c.batch_size = kv.get_uint("batch_size", c.batch_size);
    c.dropout_rate = kv.get_double("dropout_rate", c.dropout_rate);
    c.epsilon = kv.get_double("epsilon", c.epsilon);
    c.patience_epochs = static_cast<int>(kv.get_int("patience_epochs", c.patience_epochs));
    c.lr_decay_factor = kv.get_double("lr_decay_factor", c.lr_decay_factor);
    c.min_learning_rate = kv.get_double("min_learning_rate", c.min_learning_rate);
    c.max_epochs = static_cast<int>(kv.get_int("max_epochs", c.max_epochs));
    c.stage_epochs = static_cast<int>(kv.get_int("stage_epochs", c.stage_epochs));
    c.validation_count = kv.get_uint("validation_count", c.validation_count);
    c.seed = kv.get_uint("seed", c.seed);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

ModelSpec model_spec(const KeyValueConfig& kv, const TrainConfig& tc, const LandmarkLayout& layout, bool with_global)
{
    ModelSpec spec;
    spec.layout = layout;
    spec.with_global = with_global;
    spec.hog.resize_to = static_cast<int>(kv.get_int("hog_resize", spec.hog.resize_to));
    spec.hog.block_size = static_cast<int>(kv.get_int("hog_block", spec.hog.block_size));
    spec.hog.block_stride = static_cast<int>(kv.get_int("hog_stride", spec.hog.block_stride));
    spec.hog.cell_size = static_cast<int>(kv.get_int("hog_cell", spec.hog.cell_size));
    spec.hog.num_bins = static_cast<int>(kv.get_int("hog_bins", spec.hog.num_bins));
    spec.local_cfgs = default_local_configs(tc.stages, tc.epsilon);
    const auto patches = kv.get_index_list("patch_sizes", {});
    if (!patches.empty()) {
        if (patches.size() != tc.stages) {
            throw UsageError("patch_sizes lists " + std::to_string(patches.size()) + " sizes for " +
                             std::to_string(tc.stages) + " stages");
        }
        for (std::size_t t = 0; t < tc.stages; ++t) spec.local_cfgs[t].patch_size = static_cast<int>(patches[t]);
    }
    const double sigma = kv.get_double("blur_sigma", 0.0);
    for (auto& c : spec.local_cfgs) c.blur_sigma = sigma;
    try {
        spec.hog.validate();
        for (const auto& c : spec.local_cfgs) c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return spec;
}

int cmd_train(const KeyValueConfig& kv, std::ostream& out, std::ostream& err)
{
    kv.reject_unknown(kTrainKeys);
    const fs::path model_path = required(kv, "model");
    const fs::path log_path = kv.get_string("log", model_path.string() + ".csv");
    const TrainMode mode = parse_mode(kv.get_string("mode", "DeepReg"));
    const TrainConfig tc = train_config(kv);
    const auto paths = dataset_paths(kv);

    std::optional<CascadeModel> init;
    if (kv.has("init_model")) init = load_model(kv.get_string("init_model", ""));
    const LandmarkLayout layout = dataset_layout(paths, init ? &init->layout : nullptr);
    if (init) check_landmarks(*init, layout);

    auto samples = load_for(paths, layout, err);
    if (samples.empty()) throw DataError(paths.images.string() + ": dataset is empty");
    auto [train_faces, val_faces] = split_validation(std::move(samples), tc.validation_count, tc.seed);
    if (kv.get_bool("flip", true)) train_faces = augment_flip(train_faces, layout);

    const ModelSpec spec = model_spec(kv, tc, layout, mode != TrainMode::JointLocal);
    const HogConfig& hog = init ? init->hog : spec.hog;
    const auto& local_cfgs = init ? init->local_cfgs : spec.local_cfgs;
    const bool with_global = init ? init->has_global() : spec.with_global;
    const auto train = prepare_samples(train_faces, hog, local_cfgs, with_global);
    const auto validation = prepare_samples(val_faces, hog, local_cfgs, with_global);

    auto log = open_output(log_path);
    log << "epoch,phase,lr,train_error,validation_error\n";
    const EpochCallback on_epoch = [&](const EpochRecord& r) {
        log << r.epoch << ',' << r.phase << ',' << num(r.learning_rate) << ',' << num(r.train_error) << ','
            << num(r.validation_error) << '\n';
    };

    CascadeModel model = init ? *init : pretrain_sequential(train, validation, spec, tc, on_epoch);
    if (mode != TrainMode::Sequential) {
        model = train_joint(std::move(model), train, validation, tc, on_epoch);
    }
    save_model(model, model_path);
    if (!log) throw DataError(log_path.string() + ": write failed");

    out << "model " << model_path.string() << ": P=" << model.num_landmarks() << " T=" << model.num_stages()
        << (model.has_global() ? " global" : " mean-shape") << '\n'
        << "final train_error=" << num(mean_final_error(model, train))
        << " validation_error=" << num(validation.empty() ? 0.0 : mean_final_error(model, validation)) << '\n';
    return kExitOk;
}

// ------------------------------------------------------------ evaluate/diagnose

constexpr std::array<std::string_view, 7> kEvalKeys = {"model", "data", "images", "annotations", "layout", "out",
                                                       "config"};

std::vector<TrainingSample> load_eval_set(const KeyValueConfig& kv, const CascadeModel& model, std::ostream& err)
{
    const auto paths = dataset_paths(kv);
    const LandmarkLayout layout = dataset_layout(paths, &model.layout);
    check_landmarks(model, layout);
    const auto faces = load_for(paths, layout, err);
    if (faces.empty()) throw DataError(paths.images.string() + ": dataset is empty");
    return prepare_samples(faces, model.hog, model.local_cfgs, model.has_global());
}

int cmd_evaluate(const KeyValueConfig& kv, std::ostream& out, std::ostream& err)
{
    kv.reject_unknown(kEvalKeys);
    const auto model = load_model(required(kv, "model"));
    const fs::path csv_path = required(kv, "out");
    const auto paths = dataset_paths(kv);
    const LandmarkLayout layout = dataset_layout(paths, &model.layout);
    check_landmarks(model, layout);
    const auto faces = load_for(paths, layout, err);
    if (faces.empty()) throw DataError(paths.images.string() + ": dataset is empty");
    const auto samples = prepare_samples(faces, model.hog, model.local_cfgs, model.has_global());

    std::string body = "source_id,normalized_error\n";
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].d_pupils > 0.0)) {
            ++excluded;
            continue;
        }
        const double e = normalized_error(stage_predictions(model, samples[i]).back(), samples[i].truth,
                                          samples[i].d_pupils);
        body += faces[i].source_id + ',' + num(e) + '\n';
        sum += e;
        ++n;
    }
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    body += "mean," + num(mean) + '\n';
    body += "excluded," + std::to_string(excluded) + '\n';
    auto csv = open_output(csv_path);
    csv << body;
    if (!csv) throw DataError(csv_path.string() + ": write failed");
    out << "mean normalized error " << num(mean) << " over " << n << " samples\n";
    return kExitOk;
}

int cmd_diagnose(const KeyValueConfig& kv, std::ostream& out, std::ostream& err)
{
    kv.reject_unknown(kEvalKeys);
    const auto model = load_model(required(kv, "model"));
    const fs::path csv_path = required(kv, "out");
    const auto samples = load_eval_set(kv, model, err);
    const auto stats = stage_bias_variance(model, samples);

    std::string body = "stage,mean_error,std_error\n";
    for (std::size_t t = 0; t < stats.size(); ++t) {
        body += std::to_string(t) + ',' + num(stats[t].mean) + ',' + num(stats[t].stddev) + '\n';
        out << "stage " << t << ": mean " << num(stats[t].mean) << " std " << num(stats[t].stddev) << '\n';
    }
    auto csv = open_output(csv_path);
    csv << body;
    if (!csv) throw DataError(csv_path.string() + ": write failed");
    return kExitOk;
}

constexpr std::array<std::string_view, 4> kPredictKeys = {"model", "images", "out", "config"};

int cmd_predict(const KeyValueConfig& kv, std::ostream& out, std::ostream&)
{
    kv.reject_unknown(kPredictKeys);
    const auto model = load_model(required(kv, "model"));
    const fs::path image_dir = required(kv, "images");
    const fs::path out_dir = required(kv, "out");
    if (!fs::is_directory(image_dir)) throw DataError(image_dir.string() + ": image directory does not exist");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw DataError(out_dir.string() + ": cannot create output directory");

    std::vector<fs::path> images;
    for (const auto& e : fs::directory_iterator(image_dir)) {
        if (e.is_regular_file()) images.push_back(e.path());
    }
    std::sort(images.begin(), images.end());
    std::size_t written = 0;
    for (const auto& p : images) {
        GrayImage img;
        try {
            img = read_gray_image(p);
        } catch (const DataError&) {
            continue; // not an image
        }
        write_pts(out_dir / (p.stem().string() + ".pts"), predict(model, img));
        ++written;
    }
    out << "wrote " << written << " predictions to " << out_dir.string() << '\n';
    return kExitOk;
}

KeyValueConfig parse_args(std::span<const std::string> args)
{
    KeyValueConfig overrides;
    fs::path config_file;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0 || a.size() == 2) {
            throw UsageError("unexpected argument '" + a + "'");
        }
        std::string key = a.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.resize(eq);
        } else {
            if (i + 1 >= args.size()) throw UsageError("option --" + key + " needs a value");
            value = args[++i];
        }
        if (key == "config") {
            config_file = value;
        } else {
            overrides.set(key, value);
        }
    }
    KeyValueConfig kv = config_file.empty() ? KeyValueConfig{} : KeyValueConfig::read(config_file);
    for (const auto& [k, v] : overrides.entries()) kv.set(k, v);
    return kv;
}

} // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        (args.empty() ? err : out) << kUsage;
        return args.empty() ? kExitUsage : kExitOk;
    }
    const std::string& command = args[0];
    try {
        const KeyValueConfig kv = parse_args(args);
        if (command == "synth") return cmd_synth(kv, out);
        if (command == "train") return cmd_train(kv, out, err);
        if (command == "evaluate") return cmd_evaluate(kv, out, err);
        if (command == "predict") return cmd_predict(kv, out, err);
        if (command == "diagnose") return cmd_diagnose(kv, out, err);
        throw UsageError("unknown command '" + command + "'");
    } catch (const UsageError& e) {
        err << "drcascade: " << e.what() << '\n' << kUsage;
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "drcascade: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "drcascade: numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "drcascade: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace drc

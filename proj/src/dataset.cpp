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
#include "drc/dataset.hpp"

#include "drc/config.hpp"
#include "drc/errors.hpp"
#include "drc/image_io.hpp"
#include "drc/pts_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

namespace drc {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p)
{
    static constexpr std::array<std::string_view, 9> exts = {".png", ".jpg", ".jpeg", ".bmp", ".pgm",
                                                             ".ppm", ".tif", ".tiff", ".webp"};
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

std::string join(const std::vector<std::size_t>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

LoadResult load_dataset(const fs::path& image_dir, const fs::path& annotation_dir, const LandmarkLayout& layout)
{
    layout.validate();
    if (!fs::is_directory(image_dir)) {
        throw DataError(image_dir.string() + ": image directory does not exist");
    }
    if (!fs::is_directory(annotation_dir)) {
        throw DataError(annotation_dir.string() + ": annotation directory does not exist");
    }
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(image_dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());

    LoadResult result;
    for (const auto& img_path : images) {
        const auto ann_path = annotation_dir / (img_path.stem().string() + ".pts");
        if (!fs::exists(ann_path)) {
            result.rejected.push_back({img_path.string(), "missing annotation " + ann_path.string()});
            continue;
        }
        try {
            FaceSample s;
            s.truth = read_pts(ann_path);
            if (s.truth.num_landmarks() != layout.num_landmarks) {
                result.rejected.push_back({ann_path.string(), "has " + std::to_string(s.truth.num_landmarks()) +
                                                                  " landmarks, layout expects " +
                                                                  std::to_string(layout.num_landmarks)});
                continue;
            }
            s.d_pupils = interpupil_distance(s.truth, layout);
            s.image = read_gray_image(img_path);
            s.source_id = img_path.stem().string();
            result.samples.push_back(std::move(s));
        } catch (const DegenerateGeometry&) {
            result.rejected.push_back({ann_path.string(), "degenerate inter-pupil distance"});
        } catch (const DataError& e) {
            result.rejected.push_back({ann_path.string(), e.what()});
        }
    }
    if (!images.empty() && result.samples.empty()) {
        throw DataError(image_dir.string() + ": none of " + std::to_string(images.size()) +
                        " images could be loaded (first problem: " + result.rejected.front().reason + ")");
    }
    return result;
}

LandmarkLayout read_layout(const fs::path& path)
{
    KeyValueConfig kv;
    try {
        kv = KeyValueConfig::read(path);
        static constexpr std::array<std::string_view, 4> known = {"n_points", "flip", "left_eye", "right_eye"};
        kv.reject_unknown(known);
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    }
    LandmarkLayout layout;
    try {
        layout.num_landmarks = static_cast<std::size_t>(kv.get_uint("n_points", 0));
        layout.flip_permutation = kv.get_index_list("flip", {});
        layout.left_eye = kv.get_index_list("left_eye", {});
        layout.right_eye = kv.get_index_list("right_eye", {});
        layout.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return layout;
}

void write_layout(const fs::path& path, const LandmarkLayout& layout)
{
    std::ofstream out(path);
    if (!out) throw DataError(path.string() + ": cannot write layout");
    out << "n_points = " << layout.num_landmarks << '\n'
        << "flip = " << join(layout.flip_permutation) << '\n'
        << "left_eye = " << join(layout.left_eye) << '\n'
        << "right_eye = " << join(layout.right_eye) << '\n';
    if (!out) throw DataError(path.string() + ": write failed");
}

void write_dataset(const fs::path& root, const std::vector<FaceSample>& samples)
{
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root)) {
        throw DataError(root.string() + ": cannot create output directory");
    }
    if (samples.empty()) return;
    const auto img_dir = root / "images";
    const auto ann_dir = root / "annotations";
    fs::create_directories(img_dir, ec);
    fs::create_directories(ann_dir, ec);
    if (ec) throw DataError(root.string() + ": cannot create dataset subdirectories");
    for (const auto& s : samples) {
        write_gray_image(img_dir / (s.source_id + ".png"), s.image);
        write_pts(ann_dir / (s.source_id + ".pts"), s.truth);
    }
}

} // namespace drc

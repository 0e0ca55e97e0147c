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

#include "drc/sample.hpp"
#include "drc/shape.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace drc {

struct LoadIssue {
    std::string file;
    std::string reason;
};

struct LoadResult {
    std::vector<FaceSample> samples; ///< sorted by source_id
    std::vector<LoadIssue> rejected;
};

/**
 * Pairs every image in `image_dir` with `<stem>.pts` in `annotation_dir`.
 *
 * Samples with a missing or malformed annotation, a landmark count that
 * differs from the layout, or coincident eye centres are skipped and listed
 * in `rejected`. An empty image directory yields an empty result; a
 * non-empty one with no usable sample throws DataError.
 */
LoadResult load_dataset(const std::filesystem::path& image_dir, const std::filesystem::path& annotation_dir,
                        const LandmarkLayout& layout);

/// Layout files use the key-value config syntax:
///   n_points = 5
///   flip = 1 0 2 4 3
///   left_eye = 0
///   right_eye = 1
LandmarkLayout read_layout(const std::filesystem::path& path);
void write_layout(const std::filesystem::path& path, const LandmarkLayout& layout);

/// Writes `images/<id>.png` and `annotations/<id>.pts` under `root`.
void write_dataset(const std::filesystem::path& root, const std::vector<FaceSample>& samples);

} // namespace drc

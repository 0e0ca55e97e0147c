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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace drc {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/**
 * Binary model layout, all integers unsigned 32-bit and all reals IEEE-754
 * 64-bit, little-endian:
 *
 *     "DRCM"  version  P  T  dropout_rate
 *     hog: resize_to block_size block_stride cell_size num_bins
 *     T x { patch_size epsilon blur_sigma }
 *     flip_permutation[P]  n_left left[n_left]  n_right right[n_right]
 *     matrices W0, b0, mean_shape, then W_t, b_t for t = 1..T,
 *       each as rows, cols, rows*cols row-major values
 *
 * Absent parts (no global layer, no mean shape) are 0 x 1 matrices.
 */
std::vector<std::uint8_t> serialize_model(const CascadeModel& model);

/// Throws UnsupportedFormat for a bad magic or version and CorruptModel for
/// truncation, trailing bytes or invariant violations. Never returns a
/// partially populated model.
CascadeModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const CascadeModel& model, const std::filesystem::path& path);
CascadeModel load_model(const std::filesystem::path& path);

} // namespace drc

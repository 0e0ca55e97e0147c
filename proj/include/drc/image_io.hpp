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

#include "drc/image.hpp"

#include <filesystem>

namespace drc {

/// Decodes any raster format the image codec supports. Colour images are
/// converted with luma weights 0.299 / 0.587 / 0.114; 8- and 16-bit depths
/// are scaled to [0, 1]. Throws DataError when decoding fails.
GrayImage read_gray_image(const std::filesystem::path& path);

/// Writes an 8-bit image (values rounded and clamped). The format follows
/// the file extension.
void write_gray_image(const std::filesystem::path& path, const GrayImage& img);

} // namespace drc

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

#include "drc/shape.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace drc {

/**
 * pts annotation grammar:
 *
 *     version: 1
 *     n_points: <P>
 *     {
 *     <x> <y>      (P lines)
 *     }
 *
 * Whitespace is free-form and `#` starts a comment that runs to the end of
 * the line. Throws DataError naming `source` on any deviation.
 */
Shape parse_pts(std::string_view text, const std::string& source = "<memory>");

/// Shortest round-trip decimal formatting, one landmark per line.
std::string format_pts(const Shape& s);

Shape read_pts(const std::filesystem::path& path);
void write_pts(const std::filesystem::path& path, const Shape& s);

} // namespace drc

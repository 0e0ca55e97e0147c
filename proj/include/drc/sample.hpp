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
#include "drc/shape.hpp"

#include <string>

namespace drc {

/// One annotated, pre-cropped face.
struct FaceSample {
    GrayImage image;
    Shape truth;
    double d_pupils = 0.0;
    std::string source_id;

    bool operator==(const FaceSample&) const = default;
};

} // namespace drc

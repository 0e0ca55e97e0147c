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

#include <stdexcept>
#include <string>

namespace drc {

/// Eye centres coincide, so the sample cannot be normalised.
class DegenerateGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model file has the wrong magic bytes or an unknown version.
class UnsupportedFormat : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model file is truncated or violates a shape invariant.
class CorruptModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset could not be read or is inconsistent with a model.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A loss or parameter became NaN/inf during training.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace drc

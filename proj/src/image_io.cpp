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
#include "drc/image_io.hpp"

#include "drc/errors.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

namespace drc {

GrayImage read_gray_image(const std::filesystem::path& path)
{
    const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty()) {
        throw DataError(path.string() + ": cannot decode image");
    }
    double scale = 1.0;
    switch (raw.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    case CV_32F:
    case CV_64F: scale = 1.0; break;
    default: throw DataError(path.string() + ": unsupported pixel depth");
    }
    cv::Mat img;
    raw.convertTo(img, CV_64F, scale);

    GrayImage out(img.cols, img.rows);
    const int ch = img.channels();
    for (int y = 0; y < img.rows; ++y) {
        const double* row = img.ptr<double>(y);
        for (int x = 0; x < img.cols; ++x) {
            const double* px = row + static_cast<std::ptrdiff_t>(x) * ch;
            double v = 0.0;
            if (ch == 1 || ch == 2) {
                v = px[0];
            } else {
                // OpenCV stores colour as BGR(A).
                v = 0.299 * px[2] + 0.587 * px[1] + 0.114 * px[0];
            }
            out.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

void write_gray_image(const std::filesystem::path& path, const GrayImage& img)
{
    if (img.empty()) {
        throw DataError(path.string() + ": refusing to write an empty image");
    }
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y) {
        auto* row = m.ptr<unsigned char>(y);
        for (int x = 0; x < img.width; ++x) {
            row[x] = static_cast<unsigned char>(std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0));
        }
    }
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m);
    } catch (const cv::Exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (!ok) {
        throw DataError(path.string() + ": cannot write image");
    }
}

} // namespace drc

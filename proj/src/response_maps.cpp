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
#include "drc/response_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drc {

namespace {

std::vector<double> gaussian_kernel(double sigma)
{
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

// Zero-padded separable convolution, in place.
void blur_plane(std::vector<double>& plane, int w, int h, const std::vector<double>& kernel)
{
    const int r = static_cast<int>(kernel.size() / 2);
    std::vector<double> tmp(plane.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = std::max(-r, -x); i <= std::min(r, w - 1 - x); ++i) {
                acc += kernel[static_cast<std::size_t>(i + r)] * plane[static_cast<std::size_t>(y * w + x + i)];
            }
            tmp[static_cast<std::size_t>(y * w + x)] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = std::max(-r, -y); i <= std::min(r, h - 1 - y); ++i) {
                acc += kernel[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>((y + i) * w + x)];
            }
            plane[static_cast<std::size_t>(y * w + x)] = acc;
        }
    }
}

// Responses are bounded by sqrt(2); pick the finest power-of-two grid for which
// the sum over the whole image stays below 2^53 grid units.
int quantization_exponent(int w, int h)
{
    const double bound = 2.0 * static_cast<double>(w) * static_cast<double>(h);
    return 52 - static_cast<int>(std::ceil(std::log2(bound)));
}

} // namespace

OrientationPlanes blurred_responses(const GrayImage& img, double sigma)
{
    if (img.empty()) {
        throw std::invalid_argument("build_response_maps: empty image");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("build_response_maps: blur sigma must be positive");
    }
    const int w = img.width;
    const int h = img.height;
    OrientationPlanes out;
    out.width = w;
    out.height = h;
    for (auto& p : out.planes) p.assign(static_cast<std::size_t>(w) * h, 0.0);

    const double bin_width = 2.0 * std::numbers::pi / kOrientationBins;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = img.clamped(x + 1, y) - img.clamped(x - 1, y);
            const double gy = img.clamped(x, y + 1) - img.clamped(x, y - 1);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += 2.0 * std::numbers::pi;
            const double a = theta / bin_width;
            const double lo = std::floor(a);
            const double frac = a - lo;
            const int b0 = static_cast<int>(lo) % kOrientationBins;
            const int b1 = (b0 + 1) % kOrientationBins;
            const auto idx = static_cast<std::size_t>(y * w + x);
            out.planes[static_cast<std::size_t>(b0)][idx] += mag * (1.0 - frac);
            out.planes[static_cast<std::size_t>(b1)][idx] += mag * frac;
        }
    }

    const auto kernel = gaussian_kernel(sigma);
    const int e = quantization_exponent(w, h);
    for (auto& p : out.planes) {
        blur_plane(p, w, h, kernel);
        for (auto& v : p) {
            v = std::ldexp(std::floor(std::ldexp(std::max(v, 0.0), e)), -e);
        }
    }
    return out;
}

ResponseMaps::ResponseMaps(const OrientationPlanes& blurred, double sigma)
    : width_(blurred.width), height_(blurred.height), sigma_(sigma)
{
    const int w = width_;
    const int h = height_;
    for (int b = 0; b < kOrientationBins; ++b) {
        auto& m = maps_[static_cast<std::size_t>(b)];
        m.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
        const auto& src = blurred.planes[static_cast<std::size_t>(b)];
        for (int y = 0; y < h; ++y) {
            double row = 0.0;
            for (int x = 0; x < w; ++x) {
                row += src[static_cast<std::size_t>(y * w + x)];
                m[static_cast<std::size_t>((y + 1) * (w + 1) + x + 1)] =
                    m[static_cast<std::size_t>(y * (w + 1) + x + 1)] + row;
            }
        }
    }
}

double ResponseMaps::rect_sum(int bin, int x0, int y0, int x1, int y1) const
{
    x0 = std::clamp(x0, 0, width_);
    x1 = std::clamp(x1, 0, width_);
    y0 = std::clamp(y0, 0, height_);
    y1 = std::clamp(y1, 0, height_);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    return integral(bin, y1, x1) - integral(bin, y0, x1) - integral(bin, y1, x0) + integral(bin, y0, x0);
}

ResponseMaps build_response_maps(const GrayImage& img, double sigma)
{
    return ResponseMaps(blurred_responses(img, sigma), sigma);
}

} // namespace drc

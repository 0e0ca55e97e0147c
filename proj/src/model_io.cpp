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
#include "drc/model_io.hpp"

#include "drc/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace drc {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'R', 'C', 'M'};

class Writer {
public:
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::size_t v)
    {
        if (v > std::numeric_limits<std::uint32_t>::max()) {
            throw std::invalid_argument("save_model: value does not fit the 32-bit format");
        }
        u32(static_cast<std::uint32_t>(v));
    }
    void u32(int v) { u32(static_cast<std::size_t>(v)); }
    void f64(double v)
    {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    template <typename Derived>
    void matrix(const Eigen::DenseBase<Derived>& m)
    {
        u32(static_cast<std::size_t>(m.rows()));
        u32(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
        }
    }
    void bytes(const std::uint8_t* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    std::size_t remaining() const { return b_.size() - pos_; }

    void need(std::size_t n, const char* what) const
    {
        if (n > remaining()) {
            throw CorruptModel(std::string("model file truncated while reading ") + what);
        }
    }
    std::uint32_t u32(const char* what)
    {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    int i32(const char* what)
    {
        const auto v = u32(what);
        if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
            throw CorruptModel(std::string("model field out of range: ") + what);
        }
        return static_cast<int>(v);
    }
    double f64(const char* what)
    {
        need(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }
    Eigen::MatrixXd matrix(const char* what)
    {
        const std::uint64_t rows = u32(what);
        const std::uint64_t cols = u32(what);
        if (rows * cols > remaining() / 8) {
            throw CorruptModel(std::string("model file truncated inside matrix ") + what);
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64(what);
        }
        return m;
    }
    Eigen::VectorXd vector(const char* what)
    {
        Eigen::MatrixXd m = matrix(what);
        if (m.cols() != 1) {
            throw CorruptModel(std::string("model vector ") + what + " must have one column");
        }
        return m.col(0);
    }
    std::vector<std::size_t> indices(std::size_t n, const char* what)
    {
        need(4 * n, what);
        std::vector<std::size_t> out(n);
        for (auto& v : out) v = u32(what);
        return out;
    }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> serialize_model(const CascadeModel& model)
{
    model.validate();
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kModelFormatVersion);
    w.u32(model.num_landmarks());
    w.u32(model.num_stages());
    w.f64(model.dropout_rate);
    w.u32(model.hog.resize_to);
    w.u32(model.hog.block_size);
    w.u32(model.hog.block_stride);
    w.u32(model.hog.cell_size);
    w.u32(model.hog.num_bins);
    for (const auto& c : model.local_cfgs) {
        w.u32(c.patch_size);
        w.f64(c.epsilon);
        w.f64(c.blur_sigma);
    }
    for (auto q : model.layout.flip_permutation) w.u32(q);
    w.u32(model.layout.left_eye.size());
    for (auto i : model.layout.left_eye) w.u32(i);
    w.u32(model.layout.right_eye.size());
    for (auto i : model.layout.right_eye) w.u32(i);

    const Eigen::VectorXd none(0);
    w.matrix(model.W0);
    w.matrix(model.b0);
    w.matrix(model.mean_shape ? model.mean_shape->coords : none);
    for (const auto& st : model.stages) {
        w.matrix(st.W);
        w.matrix(st.b);
    }
    return w.take();
}

CascadeModel deserialize_model(std::span<const std::uint8_t> bytes)
{
    const std::size_t head = std::min(bytes.size(), sizeof kMagic);
    if (head > 0 && std::memcmp(bytes.data(), kMagic, head) != 0) {
        throw UnsupportedFormat("not a cascade model file (bad magic bytes)");
    }
    if (head < sizeof kMagic) {
        throw CorruptModel("model file truncated inside the magic bytes");
    }
    Reader r(bytes.subspan(4));
    const auto version = r.u32("version");
    if (version != kModelFormatVersion) {
        throw UnsupportedFormat("unsupported model format version " + std::to_string(version));
    }
    const std::size_t P = r.u32("landmark count");
    const std::size_t T = r.u32("stage count");
    // Every stage needs at least its descriptor config and two matrix headers.
    if (T > r.remaining() / 36 || P > r.remaining() / 4) {
        throw CorruptModel("model header declares more data than the file holds");
    }

    CascadeModel m;
    m.dropout_rate = r.f64("dropout rate");
    m.hog.resize_to = r.i32("hog config");
    m.hog.block_size = r.i32("hog config");
    m.hog.block_stride = r.i32("hog config");
    m.hog.cell_size = r.i32("hog config");
    m.hog.num_bins = r.i32("hog config");
    m.local_cfgs.resize(T);
    for (auto& c : m.local_cfgs) {
        c.patch_size = r.i32("descriptor config");
        c.epsilon = r.f64("descriptor config");
        c.blur_sigma = r.f64("descriptor config");
    }
    m.layout.num_landmarks = P;
    m.layout.flip_permutation = r.indices(P, "flip permutation");
    m.layout.left_eye = r.indices(r.u32("eye subset"), "eye subset");
    m.layout.right_eye = r.indices(r.u32("eye subset"), "eye subset");

    m.W0 = r.matrix("W0");
    m.b0 = r.vector("b0");
    Eigen::VectorXd mean = r.vector("mean shape");
    if (mean.size() > 0) m.mean_shape = Shape(std::move(mean));
    m.stages.resize(T);
    for (auto& st : m.stages) {
        st.W = r.matrix("stage W");
        st.b = r.vector("stage b");
    }
    if (r.remaining() != 0) {
        throw CorruptModel("model file has " + std::to_string(r.remaining()) + " trailing bytes");
    }
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw CorruptModel(std::string("model invariant violated: ") + e.what());
    }
    return m;
}

void save_model(const CascadeModel& model, const std::filesystem::path& path)
{
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError(path.string() + ": write failed");
}

CascadeModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open model file");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace drc

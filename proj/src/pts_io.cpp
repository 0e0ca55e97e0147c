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
#include "drc/pts_io.hpp"

#include "drc/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace drc {

namespace {

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string cur;
    bool comment = false;
    auto flush = [&] {
        if (!cur.empty()) tokens.push_back(std::move(cur));
        cur.clear();
    };
    for (char c : text) {
        if (comment) {
            if (c == '\n') comment = false;
            continue;
        }
        if (c == '#') {
            flush();
            comment = true;
        } else if (c == ':' || c == '{' || c == '}') {
            flush();
            tokens.emplace_back(1, c);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return tokens;
}

template <typename T>
bool parse_number(const std::string& tok, T& out)
{
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace

Shape parse_pts(std::string_view text, const std::string& source)
{
    const auto tokens = tokenize(text);
    std::size_t i = 0;
    auto fail = [&](const std::string& why) -> void { throw DataError(source + ": " + why); };
    auto expect = [&](const char* tok) {
        if (i >= tokens.size() || tokens[i] != tok) fail(std::string("expected '") + tok + "'");
        ++i;
    };

    expect("version");
    expect(":");
    int version = 0;
    if (i >= tokens.size() || !parse_number(tokens[i], version)) fail("malformed version");
    if (version != 1) fail("unsupported version " + tokens[i]);
    ++i;
    expect("n_points");
    expect(":");
    long n_points = 0;
    if (i >= tokens.size() || !parse_number(tokens[i], n_points) || n_points <= 0) fail("malformed n_points");
    ++i;
    expect("{");

    std::vector<double> values;
    while (i < tokens.size() && tokens[i] != "}") {
        double v = 0.0;
        if (!parse_number(tokens[i], v) || !std::isfinite(v)) fail("malformed coordinate '" + tokens[i] + "'");
        values.push_back(v);
        ++i;
    }
    expect("}");
    if (i != tokens.size()) fail("unexpected content after '}'");
    if (values.size() % 2 != 0) fail("odd number of coordinates");
    if (values.size() / 2 != static_cast<std::size_t>(n_points)) {
        fail("n_points is " + std::to_string(n_points) + " but " + std::to_string(values.size() / 2) +
             " coordinate lines were found");
    }
    Shape s = Shape::zeros(values.size() / 2);
    for (std::size_t k = 0; k < values.size(); ++k) s.coords[static_cast<Eigen::Index>(k)] = values[k];
    return s;
}

std::string format_pts(const Shape& s)
{
    std::string out = "version: 1\nn_points: " + std::to_string(s.num_landmarks()) + "\n{\n";
    char buf[64];
    for (std::size_t p = 0; p < s.num_landmarks(); ++p) {
        auto r = std::to_chars(buf, buf + sizeof buf, s.x(p));
        *r.ptr++ = ' ';
        r = std::to_chars(r.ptr, buf + sizeof buf, s.y(p));
        out.append(buf, r.ptr);
        out.push_back('\n');
    }
    out += "}\n";
    return out;
}

Shape read_pts(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open annotation");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pts(ss.str(), path.string());
}

void write_pts(const std::filesystem::path& path, const Shape& s)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot write annotation");
    out << format_pts(s);
    if (!out) throw DataError(path.string() + ": write failed");
}

} // namespace drc

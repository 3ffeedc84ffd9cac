// SPDX-License-Identifier: Apache-2.0
//
// apopt - access point placement optimization for tunnel radio coverage
// Copyright (C) 2026 The apopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

namespace apopt::io {

/// Fixed-point text with `digits` decimals (locale independent).
inline void append_fixed(std::string& out, double v, int digits = 6) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
    out.append(buf, res.ptr);
}

inline std::string fixed(double v, int digits = 6) {
    std::string s;
    append_fixed(s, v, digits);
    return s;
}

/// Minimal CSV writer: LF line endings, fields written as given.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::string_view header) : os_(path, std::ios::binary) {
        if (!os_) throw std::runtime_error("cannot open '" + path + "' for writing");
        os_ << header << '\n';
    }

    void row(std::initializer_list<std::string_view> fields) {
        bool first = true;
        for (auto f : fields) {
            if (!first) os_ << ',';
            os_ << f;
            first = false;
        }
        os_ << '\n';
    }

    void line(std::string_view text) { os_ << text << '\n'; }

private:
    std::ofstream os_;
};

inline void write_text(const std::string& path, std::string_view text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << text;
}

} // namespace apopt::io

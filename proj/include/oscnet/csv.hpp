// Copyright 2026 The oscnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Plain CSV output: comma separated, '\n' line ends, numbers with 12
// significant digits ("%.12g"), non-finite values as nan / inf / -inf.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "oscnet/error.hpp"

namespace oscnet::csv {

inline std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  }

  void header(const std::vector<std::string>& columns) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) out_ << ',';
      out_ << columns[k];
    }
    out_ << '\n';
  }

  Writer& cell(double x) { return raw(number(x)); }
  Writer& cell(std::size_t x) { return raw(std::to_string(x)); }
  Writer& cell(std::string_view s) { return raw(s); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "failed writing '" + path_ + "'");
  }

 private:
  Writer& raw(std::string_view s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::string path_;
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace oscnet::csv

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

// Minimal INI dialect shared by network files and scenario configs:
//
//   # comment            (also ';')
//   [section]
//   key = value          (key may contain spaces, dots and colons)
//
// Keys keep their order of appearance; duplicate keys inside one section are
// rejected. Values are raw strings, parsed by the caller.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "oscnet/error.hpp"

namespace oscnet::ini {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::vector<Entry> entries;
  int line = 0;

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
  void set(std::string key, std::string value) {
    for (auto& e : entries)
      if (e.key == key) {
        e.value = std::move(value);
        return;
      }
    entries.push_back({std::move(key), std::move(value), 0});
  }
};

struct Document {
  std::vector<Section> sections;

  const Section* find(std::string_view name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
  Section& get_or_add(std::string_view name) {
    for (auto& s : sections)
      if (s.name == name) return s;
    sections.push_back({std::string(name), {}, 0});
    return sections.back();
  }
};

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline Document parse(std::string_view text, std::string_view origin = "<string>") {
  Document doc;
  Section* current = nullptr;
  int lineno = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ConfigError,
                std::string(origin) + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (nl == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      auto name = std::string(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) fail("empty section name");
      if (doc.find(name)) fail("duplicate section [" + name + "]");
      doc.sections.push_back({name, {}, lineno});
      current = &doc.sections.back();
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected 'key = value'");
      if (!current) fail("entry outside of any section");
      auto key = std::string(trim(line.substr(0, eq)));
      auto value = std::string(trim(line.substr(eq + 1)));
      // trailing comments
      if (auto hash = value.find(" #"); hash != std::string::npos) value = std::string(trim(value.substr(0, hash)));
      if (key.empty()) fail("empty key");
      if (current->find(key)) fail("duplicate key '" + key + "' in [" + current->name + "]");
      current->entries.push_back({std::move(key), std::move(value), lineno});
    }
    if (nl == text.size()) break;
  }
  return doc;
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

inline std::string write(const Document& doc, std::string_view header_comment = {}) {
  std::string out;
  if (!header_comment.empty()) {
    out += "# ";
    out += header_comment;
    out += "\n";
  }
  for (const auto& s : doc.sections) {
    if (!out.empty()) out += "\n";
    out += "[" + s.name + "]\n";
    for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
  }
  return out;
}

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), ptr);
}

/// Accepts decimal, exponent and hex-float ("0x1.8p+0") spellings.
inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    auto piece = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (!piece.empty()) parts.emplace_back(piece);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

}  // namespace oscnet::ini

// Copyright 2026 The FedRisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// RFC 4180 style CSV reading and writing.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fedrisk/error.hpp"

namespace fedrisk::csv {

using Row = std::vector<std::string>;

// Reads one record. Quoted fields may contain commas, doubled quotes and
// line breaks. Returns false at end of input.
inline bool read_row(std::istream& in, Row& row, std::size_t* line = nullptr) {
  row.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n' && line != nullptr) ++*line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) fail(ErrorCode::kMalformedRow, "unterminated quoted field");
  if (line != nullptr) ++*line;
  if (!any) return false;
  row.push_back(std::move(field));
  return true;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Lower-case, with every run of non-alphanumerics folded to one underscore:
// "Round-Trip Time [ms]" -> "round_trip_time_ms".
inline std::string normalize_header(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      out.push_back(static_cast<char>(std::tolower(u)));
    } else {
      pending = true;
    }
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> to_int(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  long long v = 0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

// Column positions by normalized header name.
class Header {
 public:
  Header() = default;
  explicit Header(const Row& names) : names_(names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      index_.emplace(normalize_header(names[i]), i);
    }
  }

  std::size_t size() const { return names_.size(); }
  const Row& names() const { return names_; }

  // First of the candidate names present in the header.
  std::optional<std::size_t> find(std::initializer_list<std::string_view> names) const {
    for (auto n : names) {
      const auto it = index_.find(std::string(n));
      if (it != index_.end()) return it->second;
    }
    return std::nullopt;
  }

 private:
  Row names_;
  std::map<std::string, std::size_t> index_;
};

inline std::string escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

}  // namespace fedrisk::csv

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

// A small rule-based user-agent parser covering the common desktop and
// mobile browser families.

#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "fedrisk/similarity.hpp"

namespace fedrisk {

struct UserAgentInfo {
  std::string os;
  std::string arch;
  std::string engine;
  std::string browser;
  std::optional<double> os_version;
  std::optional<double> browser_version;
  StringSet tokens;
};

// First "major[.minor]" number in the text; '_' counts as a dot, so
// "10_15_7" reads as 10.15.
inline std::optional<double> leading_version(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && !std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == s.size()) return std::nullopt;
  std::string num;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) num.push_back(s[i++]);
  if (i + 1 < s.size() && (s[i] == '.' || s[i] == '_') &&
      std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
    num.push_back('.');
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) num.push_back(s[i++]);
  }
  return std::stod(num);
}

// Text before the first digit, trimmed: "Chrome Mobile 79.0" -> "Chrome Mobile".
inline std::string leading_name(std::string_view s) {
  std::size_t end = 0;
  while (end < s.size() && !std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
  std::size_t b = 0;
  while (b < end && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (end > b && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(b, end - b));
}

namespace ua_detail {

inline std::optional<double> version_after(std::string_view ua, std::string_view marker) {
  const auto pos = ua.find(marker);
  if (pos == std::string_view::npos) return std::nullopt;
  return leading_version(ua.substr(pos + marker.size()));
}

inline bool has(std::string_view ua, std::string_view needle) {
  return ua.find(needle) != std::string_view::npos;
}

}  // namespace ua_detail

// Empty when neither an OS nor a browser family is recognized.
inline std::optional<UserAgentInfo> parse_user_agent(std::string_view ua) {
  using ua_detail::has;
  using ua_detail::version_after;
  UserAgentInfo info;

  if (has(ua, "Windows NT")) {
    info.os = "Windows";
    info.os_version = version_after(ua, "Windows NT");
  } else if (has(ua, "iPhone") || has(ua, "iPad")) {
    info.os = "iOS";
    info.os_version = version_after(ua, " OS ");
  } else if (has(ua, "Mac OS X")) {
    info.os = "Mac OS X";
    info.os_version = version_after(ua, "Mac OS X");
  } else if (has(ua, "Android")) {
    info.os = "Android";
    info.os_version = version_after(ua, "Android");
  } else if (has(ua, "CrOS")) {
    info.os = "Chrome OS";
  } else if (has(ua, "Linux")) {
    info.os = "Linux";
  }

  if (has(ua, "x86_64") || has(ua, "Win64") || has(ua, "x64") || has(ua, "WOW64") ||
      has(ua, "amd64")) {
    info.arch = "x64";
  } else if (has(ua, "arm64") || has(ua, "aarch64")) {
    info.arch = "arm64";
  } else if (has(ua, "armv")) {
    info.arch = "arm";
  } else if (has(ua, "i686") || has(ua, "i386")) {
    info.arch = "x86";
  } else {
    info.arch = "unknown";
  }

  if (has(ua, "Edg/")) {
    info.browser = "Edge";
    info.browser_version = version_after(ua, "Edg/");
  } else if (has(ua, "OPR/")) {
    info.browser = "Opera";
    info.browser_version = version_after(ua, "OPR/");
  } else if (has(ua, "Firefox/")) {
    info.browser = "Firefox";
    info.browser_version = version_after(ua, "Firefox/");
  } else if (has(ua, "Chrome/")) {
    info.browser = "Chrome";
    info.browser_version = version_after(ua, "Chrome/");
  } else if (has(ua, "Safari/") && has(ua, "Version/")) {
    info.browser = "Safari";
    info.browser_version = version_after(ua, "Version/");
  } else if (has(ua, "MSIE ")) {
    info.browser = "Internet Explorer";
    info.browser_version = version_after(ua, "MSIE ");
  } else if (has(ua, "Trident/")) {
    info.browser = "Internet Explorer";
    info.browser_version = version_after(ua, "rv:");
  }

  if (has(ua, "Trident/")) {
    info.engine = "Trident";
  } else if (has(ua, "Edg/") || has(ua, "OPR/") || has(ua, "Chrome/")) {
    info.engine = "Blink";
  } else if (has(ua, "AppleWebKit")) {
    info.engine = "WebKit";
  } else if (has(ua, "Gecko/")) {
    info.engine = "Gecko";
  } else if (has(ua, "Presto")) {
    info.engine = "Presto";
  } else {
    info.engine = "unknown";
  }

  std::string token;
  bool letters = false;
  auto flush = [&] {
    if (token.size() >= 2 && letters) info.tokens.insert(token);
    token.clear();
    letters = false;
  };
  for (char ch : ua) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      token.push_back(static_cast<char>(std::tolower(u)));
      letters = letters || std::isalpha(u);
    } else {
      flush();
    }
  }
  flush();

  if (info.os.empty() && info.browser.empty()) return std::nullopt;
  if (info.os.empty()) info.os = "unknown";
  if (info.browser.empty()) info.browser = "unknown";
  return info;
}

}  // namespace fedrisk

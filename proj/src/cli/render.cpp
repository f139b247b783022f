// Copyright 2026 The digrad Authors.
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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "digrad/cli.hpp"
#include "digrad/errors.hpp"

namespace digrad {
namespace {

std::string escape_html(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&#39;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string field_text(const nlohmann::json& record, const char* key) {
  if (!record.contains(key)) return "?";
  const auto& v = record[key];
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::string render_html(const nlohmann::json& record) {
  const auto tokens = record.at("tokens").get<std::vector<std::string>>();
  const auto attrs = record.at("attributions").get<std::vector<double>>();
  if (tokens.size() != attrs.size()) {
    throw LengthMismatch("record has " + std::to_string(tokens.size()) +
                         " tokens but " + std::to_string(attrs.size()) +
                         " attributions");
  }
  double max_abs = 0.0;
  for (const double a : attrs) max_abs = std::max(max_abs, std::abs(a));

  std::string html =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>digrad attribution</title>\n<style>\n"
      "body { font-family: sans-serif; margin: 2em; }\n"
      ".sentence { font-size: 1.4em; line-height: 2em; }\n"
      ".w { padding: 0.1em 0.2em; border-radius: 0.2em; }\n"
      ".meta { color: #444; }\n"
      "</style>\n</head>\n<body>\n";
  html += "<p class=\"meta\">method: " +
          escape_html(field_text(record, "method")) +
          " | predicted label: " +
          escape_html(field_text(record, "predicted")) +
          " | target: " + escape_html(field_text(record, "target")) + "</p>\n";
  html += "<p class=\"sentence\">";
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (j > 0) html += ' ';
    const double a = attrs[j];
    html += "<span class=\"w\"";
    if (max_abs > 0.0 && a != 0.0) {
      char style[96];
      const double opacity = std::abs(a) / max_abs;
      std::snprintf(style, sizeof style,
                    " style=\"background-color: rgba(%s, %.3f)\"",
                    a > 0.0 ? "220, 38, 38" : "37, 99, 235", opacity);
      html += style;
    }
    char title[48];
    std::snprintf(title, sizeof title, " title=\"%.6g\"", a);
    html += title;
    html += '>' + escape_html(tokens[j]) + "</span>";
  }
  html += "</p>\n</body>\n</html>\n";
  return html;
}

std::vector<nlohmann::json> parse_report(std::istream& in) {
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), number);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", number);
    if (j.contains("config")) continue;
    if (!j.contains("tokens") || !j["tokens"].is_array() ||
        !j.contains("attributions") || !j["attributions"].is_array()) {
      throw ParseError("record lacks tokens/attributions arrays", number);
    }
    const auto& t = j["tokens"];
    const auto& a = j["attributions"];
    if (t.size() != a.size()) {
      throw ParseError("tokens and attributions differ in length", number);
    }
    for (const auto& v : t) {
      if (!v.is_string()) throw ParseError("non-string token", number);
    }
    for (const auto& v : a) {
      if (!v.is_number()) throw ParseError("non-numeric attribution", number);
    }
    records.push_back(std::move(j));
  }
  return records;
}

}  // namespace digrad

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

#include <charconv>
#include <limits>

#include "digrad/cli.hpp"
#include "digrad/errors.hpp"
#include "digrad/eval.hpp"

namespace digrad {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    auto item = trim(std::string_view(s).substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_unsigned(const Settings& s, const std::string& key) {
  const std::string& text = s.at(key);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text +
                      "'");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return value;
}

template <typename Fn>
auto parse_enum(const std::string& key, const std::string& text, Fn&& fn) {
  try {
    return fn(text);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

const Settings& default_settings() {
  static const Settings defaults{
      {"activation", "tanh"},
      {"batch-size", "16"},
      {"checkpoint", ""},
      {"data", ""},
      {"dim", "16"},
      {"embeddings", ""},
      {"epochs", "20"},
      {"factor", "0"},
      {"head", "probability"},
      {"hidden", "16"},
      {"index", ""},
      {"jobs", "1"},
      {"knn", "500"},
      {"limit", "0"},
      {"lr", "0.5"},
      {"methods", "ig,dig-greedy,dig-maxcount"},
      {"metric", "euclidean"},
      {"out", "out"},
      {"path-mode", "joint"},
      {"report", ""},
      {"seed", "0"},
      {"sentences", "1200"},
      {"steps", "30"},
      {"strategy", ""},
      {"sweep", ""},
      {"topk", "20"},
      {"validation", "0.1"},
  };
  return defaults;
}

Settings parse_config_text(std::istream& in) {
  Settings out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) +
                        ": expected key=value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (!default_settings().contains(key)) {
      throw ConfigError("config line " + std::to_string(number) +
                        ": unknown key '" + key + "'");
    }
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

Settings resolve_settings(const Settings& file, const Settings& flags,
                          const std::optional<std::string>& env_seed) {
  Settings out = default_settings();
  if (env_seed && !env_seed->empty()) out["seed"] = *env_seed;
  for (const auto& [k, v] : file) out[k] = v;
  for (const auto& [k, v] : flags) out[k] = v;
  return out;
}

RunConfig to_run_config(const Settings& settings) {
  Settings s = default_settings();
  for (const auto& [k, v] : settings) {
    if (!s.contains(k)) throw ConfigError("unknown setting '" + k + "'");
    s[k] = v;
  }

  RunConfig c;
  c.settings = s;
  c.data = s["data"];
  c.embeddings = s["embeddings"];
  c.checkpoint = s["checkpoint"];
  c.index = s["index"];
  c.report = s["report"];
  c.out = s["out"];
  c.methods = s["strategy"].empty() ? split_list(s["methods"])
                                    : std::vector{s["strategy"]};
  if (c.methods.empty()) throw ConfigError("methods: no method given");
  for (const auto& m : c.methods) {
    parse_enum("methods", m, [](const std::string& v) {
      return parse_ranking_method(v);
    });
  }
  c.steps = parse_unsigned(s, "steps");
  if (c.steps < 1) throw ConfigError("steps: must be >= 1");
  c.factor = parse_unsigned(s, "factor");
  if (c.factor > 12) throw ConfigError("factor: must be <= 12");
  c.knn = parse_unsigned(s, "knn");
  if (c.knn < 1) throw ConfigError("knn: must be >= 1");
  for (const auto& item : split_list(s["topk"])) {
    const double k = parse_real("topk", item);
    if (!(k > 0.0 && k <= 100.0)) {
      throw ConfigError("topk: values must be in (0, 100], got " + item);
    }
    c.topk.push_back(k);
  }
  if (c.topk.empty()) throw ConfigError("topk: no value given");
  c.metric = parse_enum("metric", s["metric"],
                        [](const std::string& v) { return parse_metric(v); });
  c.seed = parse_unsigned(s, "seed");
  const auto jobs = parse_unsigned(s, "jobs");
  if (jobs < 1 || jobs > 256) throw ConfigError("jobs: must be in [1, 256]");
  c.jobs = static_cast<unsigned>(jobs);
  c.head = parse_enum("head", s["head"], [](const std::string& v) {
    return parse_output_head(v);
  });
  c.path_mode = parse_enum("path-mode", s["path-mode"],
                           [](const std::string& v) {
                             return parse_path_mode(v);
                           });
  c.epochs = parse_unsigned(s, "epochs");
  c.lr = parse_real("lr", s["lr"]);
  if (!(c.lr > 0.0)) throw ConfigError("lr: must be positive");
  c.batch_size = parse_unsigned(s, "batch-size");
  if (c.batch_size < 1) throw ConfigError("batch-size: must be >= 1");
  c.hidden = parse_unsigned(s, "hidden");
  c.activation = parse_enum("activation", s["activation"],
                            [](const std::string& v) {
                              return parse_activation(v);
                            });
  c.validation = parse_real("validation", s["validation"]);
  if (!(c.validation >= 0.0 && c.validation < 1.0)) {
    throw ConfigError("validation: must be in [0, 1)");
  }
  c.limit = parse_unsigned(s, "limit");
  c.dim = parse_unsigned(s, "dim");
  if (c.dim < 1) throw ConfigError("dim: must be >= 1");
  c.sentences = parse_unsigned(s, "sentences");
  c.sweep = s["sweep"];
  return c;
}

std::vector<std::string> settings_lines(const Settings& settings) {
  std::vector<std::string> out;
  for (const auto& [k, v] : settings) out.push_back(k + "=" + v);
  return out;
}

nlohmann::json settings_json(const Settings& settings) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : settings) j[k] = v;
  return j;
}

}  // namespace digrad

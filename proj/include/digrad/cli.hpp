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

// The digrad command line: toy, train, index, attribute, evaluate, sweep and
// render.
//
// Settings resolve as command-line flags over --config FILE (flat key=value
// lines, keys named like the long flags) over DIGRAD_SEED (seed only) over
// built-in defaults. Exit codes: 0 success, 2 configuration error, 3 runtime
// error.

#ifndef DIGRAD_CLI_HPP_
#define DIGRAD_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "digrad/attribution.hpp"
#include "digrad/model.hpp"
#include "digrad/vocab_embed.hpp"
#include "json.hpp"

namespace digrad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

using Settings = std::map<std::string, std::string>;

// Every recognised key with its default value.
const Settings& default_settings();

// Parses key=value lines; blank lines and lines starting with '#' are
// skipped. Throws ConfigError naming the line for malformed lines or
// unknown keys.
Settings parse_config_text(std::istream& in);

// defaults < DIGRAD_SEED (env_seed) < file < flags.
Settings resolve_settings(const Settings& file, const Settings& flags,
                          const std::optional<std::string>& env_seed);

struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path embeddings;
  std::filesystem::path checkpoint;
  std::filesystem::path index;
  std::filesystem::path report;
  std::filesystem::path out;
  std::vector<std::string> methods;
  std::size_t steps = 30;
  std::size_t factor = 0;
  std::size_t knn = 500;
  std::vector<double> topk;
  Metric metric = Metric::kEuclidean;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  OutputHead head = OutputHead::kProbability;
  PathMode path_mode = PathMode::kJoint;
  std::size_t epochs = 20;
  double lr = 0.5;
  std::size_t batch_size = 16;
  std::size_t hidden = 16;
  Activation activation = Activation::kTanh;
  double validation = 0.1;
  std::size_t limit = 0;  // 0 means every sentence
  std::size_t dim = 16;
  std::size_t sentences = 1200;
  std::string sweep;
  Settings settings;  // the resolved text form, embedded in outputs
};

// Typed view of resolved settings. Throws ConfigError for bad values.
RunConfig to_run_config(const Settings& settings);

// The settings as sorted "key=value" strings and as a JSON object.
std::vector<std::string> settings_lines(const Settings& settings);
nlohmann::json settings_json(const Settings& settings);

// One self-contained HTML page for an attribution record as written by the
// attribute command.
std::string render_html(const nlohmann::json& record);

// Parses a report JSONL file (header line first) into its records. Throws
// ParseError with the offending line number.
std::vector<nlohmann::json> parse_report(std::istream& in);

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace digrad

#endif  // DIGRAD_CLI_HPP_

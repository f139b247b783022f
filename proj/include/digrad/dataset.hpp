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

#ifndef DIGRAD_DATASET_HPP_
#define DIGRAD_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace digrad {

struct LabeledExample {
  std::string text;
  std::size_t label = 0;

  bool operator==(const LabeledExample&) const = default;
};

// JSON lines, one {"text": string, "label": integer} object per line.
std::vector<LabeledExample> parse_dataset(std::istream& in);
std::vector<LabeledExample> read_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const std::vector<LabeledExample>& data);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<LabeledExample>& data);

}  // namespace digrad

#endif  // DIGRAD_DATASET_HPP_

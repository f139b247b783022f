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

#include "digrad/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "digrad/errors.hpp"
#include "json.hpp"

namespace digrad {

std::vector<LabeledExample> parse_dataset(std::istream& in) {
  std::vector<LabeledExample> data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      const auto label = record.at("label").get<long long>();
      if (label < 0) throw ParseError("negative label", line_no);
      data.push_back({record.at("text").get<std::string>(),
                      static_cast<std::size_t>(label)});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return data;
}

std::vector<LabeledExample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<LabeledExample>& data) {
  for (const auto& ex : data) {
    nlohmann::json record;
    record["text"] = ex.text;
    record["label"] = ex.label;
    out << record.dump() << '\n';
  }
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<LabeledExample>& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset(out, data);
}

}  // namespace digrad

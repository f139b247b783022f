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

#include "digrad/toy_data.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "digrad/errors.hpp"

namespace digrad {
namespace {

constexpr std::size_t kTopics = 6;
constexpr double kCenterRadius = 2.0;
constexpr double kSpread = 0.3;
constexpr double kMinScale = 0.05;

template <typename Rng>
const std::string& pick(const std::vector<std::string>& words, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, words.size() - 1);
  return words[d(rng)];
}

template <typename Rng>
Vector random_center(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector c(dim);
  double norm = 0.0;
  for (double& v : c) {
    v = normal(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : c) v *= kCenterRadius / norm;
  return c;
}

}  // namespace

const ToyLexicon& toy_lexicon() {
  static const ToyLexicon lexicon{
      {"good",      "great",     "excellent", "wonderful", "superb",
       "delightful", "charming", "brilliant", "lovely",    "moving",
       "enjoyable", "fantastic", "beautiful", "clever",    "witty",
       "touching",  "engaging",  "gripping",  "stunning",  "masterful",
       "fresh",     "heartfelt", "uplifting", "memorable", "solid",
       "warm",      "smart",     "funny",     "vivid",     "graceful",
       "rich",      "powerful",  "sweet",     "inspired",  "elegant",
       "terrific",  "joyful",    "radiant",   "sincere",   "splendid"},
      {"bad",       "awful",     "terrible",  "boring",    "dull",
       "tedious",   "weak",      "clumsy",    "bland",     "lifeless",
       "poor",      "dreadful",  "mediocre",  "stale",     "tiresome",
       "pointless", "shallow",   "messy",     "annoying",  "forgettable",
       "flat",      "sloppy",    "hollow",    "lame",      "painful",
       "silly",     "muddled",   "cheap",     "bloated",   "grim",
       "awkward",   "dreary",    "tired",     "lousy",     "ugly",
       "inept",     "murky",     "crude",     "drab",      "joyless"},
      {"the",       "a",         "movie",     "film",      "story",
       "plot",      "cast",      "actor",     "actress",   "director",
       "scene",     "script",    "ending",    "music",     "score",
       "camera",    "dialogue",  "character", "drama",     "comedy",
       "was",       "is",        "this",      "that",      "it",
       "with",      "and",       "of",        "in",        "on",
       "at",        "by",        "for",       "from",      "about",
       "very",      "quite",     "rather",    "really",    "truly",
       "city",      "house",     "river",     "train",     "night",
       "morning",   "summer",    "winter",    "school",    "family",
       "friend",    "brother",   "sister",    "mother",    "father",
       "village",   "island",    "forest",    "road",      "journey",
       "war",       "love",      "game",      "team",      "party",
       "dinner",    "letter",    "phone",     "car",       "ship",
       "song",      "dance",     "book",      "painting",  "garden",
       "kitchen",   "office",    "street",    "market",    "hotel",
       "two",       "three",     "hours",     "minutes",   "years",
       "first",     "second",    "last",      "new",       "old",
       "runs",      "feels",     "looks",     "seems",     "becomes",
       "tells",     "shows",     "follows",   "takes",     "makes",
       "young",     "little",    "long",      "short",     "whole",
       "own",       "other",     "same",      "every",     "some"}};
  return lexicon;
}

std::vector<LabeledExample> generate_toy_corpus(std::size_t count,
                                                std::uint64_t seed) {
  const ToyLexicon& lex = toy_lexicon();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> label_dist(0, 1);
  std::uniform_int_distribution<int> length_dist(4, 10);
  std::uniform_int_distribution<int> signal_dist(1, 3);
  std::bernoulli_distribution contrast(0.25);

  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = label_dist(rng);
    const auto& own = label == 1 ? lex.positive : lex.negative;
    const auto& other = label == 1 ? lex.negative : lex.positive;
    const int length = length_dist(rng);
    const int signal = std::min(signal_dist(rng), length - 1);

    std::vector<std::string> words;
    for (int s = 0; s < signal; ++s) words.push_back(pick(own, rng));
    if (signal >= 2 && contrast(rng)) words.push_back(pick(other, rng));
    while (static_cast<int>(words.size()) < length) {
      words.push_back(pick(lex.neutral, rng));
    }
    std::shuffle(words.begin(), words.end(), rng);

    std::string text;
    for (const auto& w : words) {
      if (!text.empty()) text += ' ';
      text += w;
    }
    out.push_back({std::move(text), static_cast<std::size_t>(label)});
  }
  return out;
}

EmbeddingTable generate_toy_embeddings(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  const ToyLexicon& lex = toy_lexicon();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kSpread);
  std::uniform_real_distribution<double> scale(kMinScale, 1.0);

  std::vector<std::string> surfaces = {"<pad>", "<unk>"};
  Matrix vectors(2, dim);
  auto add_cluster = [&](const std::vector<std::string>& words,
                         std::size_t begin, std::size_t end,
                         const Vector& center) {
    for (std::size_t w = begin; w < end; ++w) {
      Vector v = center;
      for (double& x : v) x += noise(rng);
      const double s = scale(rng);
      for (double& x : v) x *= s;
      surfaces.push_back(words[w]);
      vectors.push_row(v);
    }
  };

  add_cluster(lex.positive, 0, lex.positive.size(), random_center(dim, rng));
  add_cluster(lex.negative, 0, lex.negative.size(), random_center(dim, rng));
  const std::size_t per_topic = (lex.neutral.size() + kTopics - 1) / kTopics;
  for (std::size_t t = 0; t < kTopics; ++t) {
    const std::size_t begin = t * per_topic;
    const std::size_t end = std::min(lex.neutral.size(), begin + per_topic);
    add_cluster(lex.neutral, begin, end, random_center(dim, rng));
  }

  const Vector unk = random_center(dim, rng);
  for (std::size_t c = 0; c < dim; ++c) vectors(kUnkId, c) = unk[c];
  return EmbeddingTable(Vocabulary(std::move(surfaces)), std::move(vectors));
}

}  // namespace digrad

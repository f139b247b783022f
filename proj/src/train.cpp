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
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "digrad/model.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace digrad {

namespace {

struct Encoded {
  std::vector<TokenId> ids;
  std::size_t label = 0;
};

Classifier initial_model(EmbeddingTable table, const ClassifierShape& shape,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t d = table.dim();
  auto uniform_fill = [&rng](std::span<double> values, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : values) v = u(rng);
  };
  Matrix w1;
  Vector b1;
  if (shape.hidden > 0) {
    w1 = Matrix(shape.hidden, d);
    uniform_fill(w1.data(), d);
    b1.assign(shape.hidden, 0.0);
  }
  const std::size_t w2_cols = shape.hidden == 0 ? d : shape.hidden;
  Matrix w2(shape.num_classes, w2_cols);
  uniform_fill(w2.data(), w2_cols);
  Vector b2(shape.num_classes, 0.0);
  return Classifier(std::move(table), shape, std::move(w1), std::move(b1),
                    std::move(w2), std::move(b2));
}

double encoded_accuracy(const Classifier& model,
                        std::span<const Encoded> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    const Vector p = model.predict_proba(ex.ids);
    const auto pred = static_cast<std::size_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
    if (pred == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

// Accumulates parameter gradients over a minibatch and applies one SGD step.
struct Trainer {
  Classifier& model;
  Matrix gw1, gw2;
  Vector gb1, gb2;
  std::map<TokenId, Vector> gemb;  // ordered: updates apply deterministically

  explicit Trainer(Classifier& m) : model(m) { reset(); }

  void reset() {
    gw1 = Matrix(model.w1_.rows(), model.w1_.cols());
    gw2 = Matrix(model.w2_.rows(), model.w2_.cols());
    gb1.assign(model.b1_.size(), 0.0);
    gb2.assign(model.b2_.size(), 0.0);
    gemb.clear();
  }

  // Returns the example's cross-entropy loss.
  double accumulate(const Encoded& ex) {
    const Matrix points = model.table_.embed(ex.ids);
    const auto acts = model.run(points);
    const Vector p = softmax(acts.logits);
    const double loss = -std::log(std::max(p[ex.label], 1e-300));

    Vector dlogits = p;
    dlogits[ex.label] -= 1.0;
    for (std::size_t c = 0; c < dlogits.size(); ++c) gb2[c] += dlogits[c];

    const auto& w2_in = model.shape_.hidden > 0 ? acts.hidden : acts.pooled;
    for (std::size_t c = 0; c < gw2.rows(); ++c) {
      auto row = gw2.row(c);
      for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] += dlogits[c] * w2_in[j];
      }
    }

    Vector dpool;
    if (model.shape_.hidden > 0) {
      Vector dhidden(model.shape_.hidden, 0.0);
      for (std::size_t c = 0; c < model.w2_.rows(); ++c) {
        const auto row = model.w2_.row(c);
        for (std::size_t j = 0; j < row.size(); ++j) {
          dhidden[j] += row[j] * dlogits[c];
        }
      }
      if (model.shape_.activation == Activation::kTanh) {
        for (std::size_t j = 0; j < dhidden.size(); ++j) {
          dhidden[j] *= 1.0 - acts.hidden[j] * acts.hidden[j];
        }
      }
      dpool.assign(model.dim(), 0.0);
      for (std::size_t j = 0; j < dhidden.size(); ++j) {
        gb1[j] += dhidden[j];
        auto grow = gw1.row(j);
        const auto wrow = model.w1_.row(j);
        for (std::size_t k = 0; k < grow.size(); ++k) {
          grow[k] += dhidden[j] * acts.pooled[k];
          dpool[k] += wrow[k] * dhidden[j];
        }
      }
    } else {
      dpool.assign(model.dim(), 0.0);
      for (std::size_t c = 0; c < model.w2_.rows(); ++c) {
        const auto row = model.w2_.row(c);
        for (std::size_t k = 0; k < row.size(); ++k) {
          dpool[k] += row[k] * dlogits[c];
        }
      }
    }

    const double inv_n = 1.0 / static_cast<double>(ex.ids.size());
    for (const TokenId id : ex.ids) {
      if (id == kPadId) continue;
      auto& g = gemb[id];
      if (g.empty()) g.assign(model.dim(), 0.0);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += dpool[k] * inv_n;
    }
    return loss;
  }

  void step(double lr, std::size_t batch) {
    const double scale = lr / static_cast<double>(batch);
    auto apply = [scale](std::span<double> param, std::span<const double> g) {
      for (std::size_t i = 0; i < param.size(); ++i) param[i] -= scale * g[i];
    };
    apply(model.w1_.data(), gw1.data());
    apply(model.b1_, gb1);
    apply(model.w2_.data(), gw2.data());
    apply(model.b2_, gb2);
    for (const auto& [id, g] : gemb) apply(model.table_.mutable_row(id), g);
    reset();
  }
};

double accuracy(const Classifier& model, std::span<const LabeledExample> data) {
  std::vector<Encoded> encoded;
  for (const auto& ex : data) {
    auto ids = tokenize(ex.text, model.table().vocab());
    if (ids.empty()) continue;
    encoded.push_back({std::move(ids), ex.label});
  }
  return encoded_accuracy(model, encoded);
}

TrainResult train(EmbeddingTable initial, std::span<const LabeledExample> data,
                  const TrainConfig& config) {
  const std::size_t classes = config.shape.num_classes;
  if (classes < 2) throw DegenerateDataset("need at least 2 classes");
  if (config.batch_size == 0) throw ConfigError("batch size must be >= 1");

  std::vector<std::size_t> per_class(classes, 0);
  std::vector<Encoded> encoded;
  for (const auto& ex : data) {
    if (ex.label >= classes) {
      throw DegenerateDataset("label " + std::to_string(ex.label) +
                              " outside [0, " + std::to_string(classes) + ")");
    }
    auto ids = tokenize(ex.text, initial.vocab());
    if (ids.empty()) continue;
    ++per_class[ex.label];
    encoded.push_back({std::move(ids), ex.label});
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (per_class[c] == 0) {
      throw DegenerateDataset("class " + std::to_string(c) +
                              " has no training examples");
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto val_size = static_cast<std::size_t>(std::floor(
      config.validation_fraction * static_cast<double>(encoded.size())));
  std::vector<Encoded> train_set, val_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < val_size ? val_set : train_set).push_back(encoded[order[i]]);
  }
  if (train_set.empty()) throw DegenerateDataset("empty training split");

  TrainResult result{initial_model(std::move(initial), config.shape,
                                   config.seed),
                     {}, 0.0, 0.0, train_set.size(), val_set.size()};
  Trainer trainer(result.model);

  std::vector<std::size_t> batch_order(train_set.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double loss = 0.0;
    std::size_t in_batch = 0;
    for (const std::size_t i : batch_order) {
      loss += trainer.accumulate(train_set[i]);
      if (++in_batch == config.batch_size) {
        trainer.step(config.learning_rate, in_batch);
        in_batch = 0;
      }
    }
    if (in_batch > 0) trainer.step(config.learning_rate, in_batch);

    result.log.push_back({epoch, loss / static_cast<double>(train_set.size()),
                          encoded_accuracy(result.model, train_set),
                          encoded_accuracy(result.model, val_set)});
  }
  result.train_accuracy = encoded_accuracy(result.model, train_set);
  result.validation_accuracy = encoded_accuracy(result.model, val_set);
  return result;
}

namespace {

constexpr const char* kCheckpointFormat = "digrad-classifier";
constexpr int kCheckpointVersion = 1;

nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, std::size_t cols) {
  Matrix m(0, cols);
  for (const auto& r : rows) {
    const auto values = r.get<std::vector<double>>();
    if (values.size() != cols) throw ParseError("checkpoint: ragged matrix");
    m.push_row(values);
  }
  return m;
}

}  // namespace

std::string checkpoint_json(const Classifier& model,
                            const std::string& config_text) {
  nlohmann::json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["dim"] = model.dim();
  doc["vocab_size"] = model.table().size();
  doc["num_classes"] = model.num_classes();
  doc["hidden"] = model.shape().hidden;
  doc["activation"] = std::string(to_string(model.shape().activation));
  doc["table_hash"] = internal::hex64(model.table().hash());
  doc["w1"] = matrix_json(model.w1());
  doc["b1"] = model.b1();
  doc["w2"] = matrix_json(model.w2());
  doc["b2"] = model.b2();
  if (!config_text.empty()) doc["config"] = config_text;
  return doc.dump() + "\n";
}

void save_checkpoint(const Classifier& model, const std::filesystem::path& path,
                     const std::string& config_text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_json(model, config_text);
}

Classifier parse_checkpoint(const std::string& text, EmbeddingTable table) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format") != kCheckpointFormat) {
      throw IncompatibleArtifact("not a digrad classifier checkpoint");
    }
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw IncompatibleArtifact("unsupported checkpoint version " +
                                 doc.at("version").dump());
    }
    const auto hash = doc.at("table_hash").get<std::string>();
    if (doc.at("dim").get<std::size_t>() != table.dim() ||
        doc.at("vocab_size").get<std::size_t>() != table.size() ||
        hash != internal::hex64(table.hash())) {
      throw IncompatibleArtifact(
          "checkpoint was trained with embedding table " + hash +
          " but the supplied table is " + internal::hex64(table.hash()));
    }
    ClassifierShape shape;
    shape.num_classes = doc.at("num_classes").get<std::size_t>();
    shape.hidden = doc.at("hidden").get<std::size_t>();
    shape.activation = parse_activation(doc.at("activation").get<std::string>());
    const std::size_t d = table.dim();
    Matrix w1 = shape.hidden > 0 ? matrix_from_json(doc.at("w1"), d) : Matrix();
    Matrix w2 = matrix_from_json(doc.at("w2"),
                                 shape.hidden == 0 ? d : shape.hidden);
    return Classifier(std::move(table), shape, std::move(w1),
                      doc.at("b1").get<Vector>(), std::move(w2),
                      doc.at("b2").get<Vector>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

Classifier load_checkpoint(const std::filesystem::path& path,
                           EmbeddingTable table) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), std::move(table));
}

}  // namespace digrad

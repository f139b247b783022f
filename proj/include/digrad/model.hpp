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

// The differentiable text classifier and the gradient-oracle contract that
// attribution code is written against.

#ifndef DIGRAD_MODEL_HPP_
#define DIGRAD_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "digrad/dataset.hpp"
#include "digrad/errors.hpp"
#include "digrad/matrix.hpp"
#include "digrad/vocab_embed.hpp"

namespace digrad {

// Which scalar of the network is differentiated: a class probability
// (post-softmax) or the raw logit.
enum class OutputHead { kProbability, kLogit };

std::string_view to_string(OutputHead head);
OutputHead parse_output_head(std::string_view name);

struct GradientRequest {
  Matrix points;  // n x D word vectors, n >= 1
  std::size_t target = 0;
  OutputHead head = OutputHead::kProbability;
};

struct GradientResponse {
  double value = 0.0;  // the selected output at `points`
  Matrix grads;        // n x D, d value / d points
};

// Thrown by gradient_batch; carries the position of the failing request.
class BatchError : public Error {
 public:
  BatchError(std::size_t index, const std::string& what,
             std::exception_ptr cause)
      : Error("batch element " + std::to_string(index) + ": " + what),
        index_(index),
        cause_(std::move(cause)) {}

  std::size_t index() const { return index_; }
  const std::exception_ptr& cause() const { return cause_; }

 private:
  std::size_t index_;
  std::exception_ptr cause_;
};

// A model F over a sequence of word vectors that can report its logits and
// the exact gradient of one output w.r.t. every input entry.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual Vector logits(const Matrix& points) const = 0;
  virtual GradientResponse gradient(const GradientRequest& request) const = 0;

  // Softmax of logits().
  Vector forward(const Matrix& points) const;

  double output(const Matrix& points, std::size_t target,
                OutputHead head) const;

  // Argmax of forward(); ties go to the smaller class index.
  std::size_t predict(const Matrix& points) const;

  // Elementwise gradient(), order preserved. Requests are evaluated on up to
  // `jobs` threads; the first failing element is rethrown as BatchError.
  std::vector<GradientResponse> gradient_batch(
      std::span<const GradientRequest> requests, unsigned jobs = 1) const;

 protected:
  // Throws ShapeError unless `points` is non-empty with dim() columns and
  // `target` < num_classes().
  void check_request(const Matrix& points, std::size_t target) const;
};

Vector softmax(std::span<const double> logits);

enum class Activation { kTanh, kIdentity };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

struct ClassifierShape {
  std::size_t num_classes = 2;
  std::size_t hidden = 16;  // 0: no hidden layer, logits = W2 pool + b2
  Activation activation = Activation::kTanh;
};

// embedding -> mean pool -> [hidden layer] -> linear -> softmax.
class Classifier final : public GradientOracle {
 public:
  // w1: H x D, b1: H, w2: C x H (C x D when H == 0), b2: C.
  Classifier(EmbeddingTable table, ClassifierShape shape, Matrix w1, Vector b1,
             Matrix w2, Vector b2);

  // Small random weights, zero biases.
  static Classifier random(EmbeddingTable table, ClassifierShape shape,
                           std::uint64_t seed, double scale = 0.5);

  std::size_t dim() const override { return table_.dim(); }
  std::size_t num_classes() const override { return shape_.num_classes; }
  Vector logits(const Matrix& points) const override;
  GradientResponse gradient(const GradientRequest& request) const override;

  const EmbeddingTable& table() const { return table_; }
  EmbeddingTable& mutable_table() { return table_; }
  const ClassifierShape& shape() const { return shape_; }
  const Matrix& w1() const { return w1_; }
  const Vector& b1() const { return b1_; }
  const Matrix& w2() const { return w2_; }
  const Vector& b2() const { return b2_; }
  Matrix& mutable_w1() { return w1_; }
  Vector& mutable_b1() { return b1_; }
  Matrix& mutable_w2() { return w2_; }
  Vector& mutable_b2() { return b2_; }

  Vector predict_proba(std::span<const TokenId> ids) const;

  bool operator==(const Classifier& other) const;

 private:
  struct Activations {
    Vector pooled;
    Vector hidden;  // empty when shape_.hidden == 0
    Vector logits;
  };
  Activations run(const Matrix& points) const;

  // d(output)/d(pooled) given d(output)/d(logits).
  Vector backprop_to_pool(const Activations& acts,
                          std::span<const double> dlogits) const;

  friend struct Trainer;

  EmbeddingTable table_;
  ClassifierShape shape_;
  Matrix w1_;
  Vector b1_;
  Matrix w2_;
  Vector b2_;
};

struct TrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 0.5;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  ClassifierShape shape;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainResult {
  Classifier model;
  std::vector<EpochLog> log;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;  // NaN-free; 0 when no validation split
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

// Minibatch SGD on cross-entropy, updating the embedding rows except <pad>.
// num_classes is taken from config.shape; every class in [0, C) must occur,
// otherwise DegenerateDataset.
TrainResult train(EmbeddingTable initial, std::span<const LabeledExample> data,
                  const TrainConfig& config);

double accuracy(const Classifier& model, std::span<const LabeledExample> data);

// Versioned JSON container with dims, class count, all dense layers and the
// hash of the embedding table the model was trained with.
void save_checkpoint(const Classifier& model, const std::filesystem::path& path,
                     const std::string& config_text = {});
std::string checkpoint_json(const Classifier& model,
                            const std::string& config_text = {});

// Throws IncompatibleArtifact if `table` is not the table the checkpoint was
// saved with.
Classifier load_checkpoint(const std::filesystem::path& path,
                           EmbeddingTable table);
Classifier parse_checkpoint(const std::string& text, EmbeddingTable table);

}  // namespace digrad

#endif  // DIGRAD_MODEL_HPP_

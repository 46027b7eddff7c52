// Copyright 2026 The ashlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ashlab/activations.hpp"
#include "ashlab/autodiff.hpp"
#include "ashlab/tensor.hpp"

namespace ashlab::nn {

struct DenseSpec {
  std::size_t in = 1;
  std::size_t out = 1;
};
// Stride 1, valid padding, NHWC input, weights [kh, kw, cin, cout].
struct Conv2dSpec {
  std::size_t kh = 3;
  std::size_t kw = 3;
  std::size_t cin = 1;
  std::size_t cout = 1;
};
struct FlattenSpec {};
struct ActivationLayerSpec {
  act::ActivationSpec activation;
};
using LayerSpec = std::variant<DenseSpec, Conv2dSpec, FlattenSpec, ActivationLayerSpec>;

struct ModelSpec {
  // Per-sample input extents, without the batch axis.
  std::vector<std::size_t> input_shape{2};
  std::vector<LayerSpec> layers;
};

// Hidden layers of the given widths, each followed by `activation`, then a
// linear output layer.
ModelSpec mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
              const act::ActivationSpec& activation);

class Dense {
 public:
  Dense(const DenseSpec& spec, std::string name, RngState& rng);
  Var forward(Tape& tape, const Var& x);
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Parameter weight_;  // [in, out]
  Parameter bias_;    // [out]
};

class Conv2d {
 public:
  Conv2d(const Conv2dSpec& spec, std::string name, RngState& rng);
  Var forward(Tape& tape, const Var& x);
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Conv2dSpec spec_;
  Parameter weight_;
  Parameter bias_;
};

// Valid, stride-1 convolution primitive: x [B,H,W,Cin], w [kh,kw,Cin,Cout].
Var conv2d(const Var& x, const Var& w, const Var& bias);

class Flatten {
 public:
  explicit Flatten(std::string name) : name_(std::move(name)) {}
  Var forward(Tape& tape, const Var& x);
  std::vector<Parameter*> parameters() { return {}; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

using Layer = std::variant<Dense, Conv2d, Flatten, act::Activation>;

class Model {
 public:
  Model(const ModelSpec& spec, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  // Runs the layers on a fresh-tape batch [B, input_shape...]. When `trace` is
  // given it receives each layer's output.
  Var forward(Tape& tape, const Tensor& batch, std::vector<Var>* trace = nullptr);

  // Registry in layer order; names are unique.
  std::vector<Parameter*> parameters();
  std::vector<Parameter*> trainable_parameters();
  Parameter& parameter(std::string_view name);
  std::vector<std::string> layer_names() const;
  std::vector<Layer>& layers() { return layers_; }
  const ModelSpec& spec() const { return spec_; }

  // Layer name -> current z_k value(s), for every layer that has one.
  std::map<std::string, std::vector<double>> zk_snapshot() const;
  // Re-imposes parameter constraints after an update (leak >= 0).
  void project();
  void zero_grad();

 private:
  ModelSpec spec_;
  std::vector<Layer> layers_;
};

enum class LossKind { kSoftmaxXent, kMse };

// Mean over the batch of -log softmax(logits)[label], computed with
// log-sum-exp stabilisation. logits [B, C].
Var softmax_xent(const Var& logits, const std::vector<std::size_t>& labels);
// Mean squared error over all elements.
Var mse(const Var& pred, const Tensor& target);

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.0;
};
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};
using OptimizerConfig = std::variant<SgdConfig, AdamConfig>;

class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::vector<Parameter*> params);
  // SGD: v <- momentum v + g; w <- w - lr v. Adam: bias-corrected moments.
  void step();
  void zero_grad();
  std::size_t steps() const { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t t_ = 0;
};

struct Dataset {
  Tensor features;  // [N, ...]
  std::vector<std::size_t> labels;
  std::size_t num_classes = 2;

  std::size_t size() const { return labels.size(); }
  // Rows `idx` gathered into [idx.size(), ...].
  Tensor gather(std::span<const std::size_t> idx) const;
  std::vector<std::size_t> gather_labels(std::span<const std::size_t> idx) const;
};

struct TrainConfig {
  OptimizerConfig optimizer = AdamConfig{};
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kSoftmaxXent;
  double val_split = 0.2;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  std::map<std::string, std::vector<double>> zk;
  double wall_ms = 0.0;
};

// Everything except wall time.
bool same_metrics(const EpochRecord& a, const EpochRecord& b);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
// One seeded shuffle, then the tail fraction becomes the validation set.
Split split_indices(std::size_t n, double val_split, std::uint64_t seed);

// In-place Fisher-Yates with the counter-based generator.
void shuffle(std::vector<std::size_t>& v, RngState& rng);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation evaluate(Model& model, const Dataset& data, std::span<const std::size_t> idx,
                    LossKind loss);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Shuffled mini-batch training. Validation metrics use the held-out split, or
// the training split when it is empty. Throws DivergenceError on a
// non-finite loss.
std::vector<EpochRecord> train(Model& model, const TrainConfig& config, const Dataset& data,
                               const EpochCallback& on_epoch = {});

}  // namespace ashlab::nn

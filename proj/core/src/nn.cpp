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

#include "ashlab/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "ashlab/errors.hpp"

namespace ashlab::nn {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Kaiming-uniform, fan-in scaled.
Tensor kaiming_uniform(const Shape& shape, std::size_t fan_in, RngState& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  return uniform(shape, rng, -bound, bound);
}

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;
constexpr std::uint64_t kShuffleStream = 0x7368756666ULL;
constexpr std::size_t kEvalChunk = 256;

}  // namespace

ModelSpec mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
              const act::ActivationSpec& activation) {
  ModelSpec spec;
  spec.input_shape = {in};
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    spec.layers.emplace_back(DenseSpec{prev, h});
    spec.layers.emplace_back(ActivationLayerSpec{activation});
    prev = h;
  }
  spec.layers.emplace_back(DenseSpec{prev, out});
  return spec;
}

Dense::Dense(const DenseSpec& spec, std::string name, RngState& rng)
    : name_(std::move(name)),
      weight_(name_ + ".W", kaiming_uniform(Shape{spec.in, spec.out}, spec.in, rng)),
      bias_(name_ + ".b", zeros(Shape{spec.out})) {}

Var Dense::forward(Tape& tape, const Var& x) {
  const Shape& s = x.shape();
  if (s.rank() != 2 || s[1] != weight_.value.shape()[0]) {
    throw ShapeError(name_ + ": expected input [B, " + std::to_string(weight_.value.shape()[0]) +
                     "], got " + s.str());
  }
  return ad::add_row(ad::matmul(x, tape.param(weight_)), tape.param(bias_));
}

Conv2d::Conv2d(const Conv2dSpec& spec, std::string name, RngState& rng)
    : name_(std::move(name)),
      spec_(spec),
      weight_(name_ + ".W", kaiming_uniform(Shape{spec.kh, spec.kw, spec.cin, spec.cout},
                                            spec.kh * spec.kw * spec.cin, rng)),
      bias_(name_ + ".b", zeros(Shape{spec.cout})) {}

Var Conv2d::forward(Tape& tape, const Var& x) {
  return conv2d(x, tape.param(weight_), tape.param(bias_));
}

Var conv2d(const Var& x, const Var& w, const Var& bias) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (xs.rank() != 4 || ws.rank() != 4 || xs[3] != ws[2] || xs[1] < ws[0] || xs[2] < ws[1] ||
      bias.value().numel() != ws[3]) {
    throw ShapeError("conv2d: incompatible input " + xs.str() + ", weight " + ws.str() +
                     ", bias " + bias.shape().str());
  }
  const std::size_t B = xs[0], H = xs[1], W = xs[2], C = xs[3];
  const std::size_t KH = ws[0], KW = ws[1], F = ws[3];
  const std::size_t OH = H - KH + 1, OW = W - KW + 1;
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = bias.value();
  auto xi = [=](std::size_t b, std::size_t i, std::size_t j, std::size_t c) {
    return ((b * H + i) * W + j) * C + c;
  };
  auto wi = [=](std::size_t p, std::size_t q, std::size_t c, std::size_t f) {
    return ((p * KW + q) * C + c) * F + f;
  };
  auto yi = [=](std::size_t b, std::size_t i, std::size_t j, std::size_t f) {
    return ((b * OH + i) * OW + j) * F + f;
  };

  Tensor y(Shape{B, OH, OW, F});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t i = 0; i < OH; ++i)
      for (std::size_t j = 0; j < OW; ++j)
        for (std::size_t f = 0; f < F; ++f) {
          double acc = bv[f];
          for (std::size_t p = 0; p < KH; ++p)
            for (std::size_t q = 0; q < KW; ++q)
              for (std::size_t c = 0; c < C; ++c)
                acc += xv[xi(b, i + p, j + q, c)] * wv[wi(p, q, c, f)];
          y[yi(b, i, j, f)] = acc;
        }

  return x.tape()->record(
      "conv2d", {x, w, bias}, std::move(y),
      [=](const Tensor& g, GradSink& sink) {
        const Tensor& xv = x.value();
        const Tensor& wv = w.value();
        Tensor dx(xv.shape()), dw(wv.shape()), db(bias.shape());
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t i = 0; i < OH; ++i)
            for (std::size_t j = 0; j < OW; ++j)
              for (std::size_t f = 0; f < F; ++f) {
                const double go = g[yi(b, i, j, f)];
                db[f] += go;
                for (std::size_t p = 0; p < KH; ++p)
                  for (std::size_t q = 0; q < KW; ++q)
                    for (std::size_t c = 0; c < C; ++c) {
                      dx[xi(b, i + p, j + q, c)] += go * wv[wi(p, q, c, f)];
                      dw[wi(p, q, c, f)] += go * xv[xi(b, i + p, j + q, c)];
                    }
              }
        sink.add(x, dx);
        sink.add(w, dw);
        sink.add(bias, db);
      });
}

Var Flatten::forward(Tape&, const Var& x) {
  const Shape& s = x.shape();
  if (s.rank() == 2) return x;
  return ad::reshape(x, Shape{s[0], s.numel() / s[0]});
}

namespace {

std::string dims_str(const std::vector<std::size_t>& d) {
  std::string s = "[";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + "]";
}

// Walks the per-sample shape through the layer chain. An empty input shape
// means "unknown" until the first dense layer pins it.
void check_chain(const ModelSpec& spec) {
  std::optional<std::vector<std::size_t>> cur;
  if (!spec.input_shape.empty()) cur = spec.input_shape;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + ": ";
    std::visit(Overloaded{
                   [&](const DenseSpec& d) {
                     if (cur && (cur->size() != 1 || (*cur)[0] != d.in)) {
                       throw ShapeError(where + "dense expects [" + std::to_string(d.in) + "], gets " +
                                        dims_str(*cur));
                     }
                     cur = std::vector<std::size_t>{d.out};
                   },
                   [&](const Conv2dSpec& c) {
                     if (cur) {
                       if (cur->size() != 3 || (*cur)[2] != c.cin || (*cur)[0] < c.kh || (*cur)[1] < c.kw) {
                         throw ShapeError(where + "conv2d cannot take " + dims_str(*cur));
                       }
                       cur = std::vector<std::size_t>{(*cur)[0] - c.kh + 1, (*cur)[1] - c.kw + 1, c.cout};
                     }
                   },
                   [&](const FlattenSpec&) {
                     if (cur) {
                       std::size_t n = 1;
                       for (std::size_t d : *cur) n *= d;
                       cur = std::vector<std::size_t>{n};
                     }
                   },
                   [](const ActivationLayerSpec&) {},
               },
               spec.layers[i]);
  }
}

}  // namespace

Model::Model(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  check_chain(spec);
  RngState rng{seed, 0};
  layers_.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const std::string idx = std::to_string(i);
    std::visit(Overloaded{
                   [&](const DenseSpec& d) {
                     layers_.emplace_back(std::in_place_type<Dense>, d, "dense" + idx, rng);
                   },
                   [&](const Conv2dSpec& c) {
                     layers_.emplace_back(std::in_place_type<Conv2d>, c, "conv" + idx, rng);
                   },
                   [&](const FlattenSpec&) {
                     layers_.emplace_back(std::in_place_type<Flatten>, "flatten" + idx);
                   },
                   [&](const ActivationLayerSpec& a) {
                     layers_.emplace_back(std::in_place_type<act::Activation>, a.activation,
                                          "act" + idx);
                   },
               },
               spec.layers[i]);
  }
}

Var Model::forward(Tape& tape, const Tensor& batch, std::vector<Var>* trace) {
  const auto& dims = batch.shape().dims();
  if (dims.size() != spec_.input_shape.size() + 1 ||
      !std::equal(spec_.input_shape.begin(), spec_.input_shape.end(), dims.begin() + 1)) {
    std::string expected = "[B";
    for (std::size_t d : spec_.input_shape) expected += "," + std::to_string(d);
    throw ShapeError("model input must be " + expected + "], got " + batch.shape().str());
  }
  Var h = tape.constant(batch);
  for (auto& layer : layers_) {
    h = std::visit(Overloaded{
                       [&](act::Activation& a) { return a.apply(tape, h); },
                       [&](auto& l) { return l.forward(tape, h); },
                   },
                   layer);
    if (trace) trace->push_back(h);
  }
  return h;
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    std::visit([&](auto& l) {
      for (Parameter* p : l.parameters()) out.push_back(p);
    }, layer);
  }
  return out;
}

std::vector<Parameter*> Model::trainable_parameters() {
  std::vector<Parameter*> out;
  for (Parameter* p : parameters())
    if (p->trainable) out.push_back(p);
  return out;
}

Parameter& Model::parameter(std::string_view name) {
  for (Parameter* p : parameters())
    if (p->name == name) return *p;
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

std::vector<std::string> Model::layer_names() const {
  std::vector<std::string> out;
  for (const auto& layer : layers_) {
    std::visit([&](const auto& l) { out.push_back(l.name()); }, layer);
  }
  return out;
}

std::map<std::string, std::vector<double>> Model::zk_snapshot() const {
  std::map<std::string, std::vector<double>> out;
  for (const auto& layer : layers_) {
    if (const auto* a = std::get_if<act::Activation>(&layer)) {
      auto z = a->zk_values();
      if (!z.empty()) out.emplace(a->name(), std::move(z));
    }
  }
  return out;
}

void Model::project() {
  for (auto& layer : layers_) {
    auto* a = std::get_if<act::Activation>(&layer);
    if (a == nullptr || !std::holds_alternative<act::LeakyAshParams>(a->spec())) continue;
    for (Parameter* p : a->parameters()) {
      if (p->name.ends_with(".leak") && p->value[0] < 0.0) p->value[0] = 0.0;
    }
  }
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

Var softmax_xent(const Var& logits, const std::vector<std::size_t>& labels) {
  const Shape& s = logits.shape();
  if (s.rank() != 2 || s[0] != labels.size()) {
    throw ShapeError("softmax_xent: logits " + s.str() + " vs " + std::to_string(labels.size()) +
                     " labels");
  }
  const std::size_t B = s[0], C = s[1];
  const Tensor& z = logits.value();
  Tensor probs(s);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] >= C) throw ShapeError("softmax_xent: label out of range");
    double mx = z[b * C];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, z[b * C + c]);
    double se = 0.0;
    for (std::size_t c = 0; c < C; ++c) se += std::exp(z[b * C + c] - mx);
    const double lse = mx + std::log(se);
    for (std::size_t c = 0; c < C; ++c) probs[b * C + c] = std::exp(z[b * C + c] - lse);
    total += lse - z[b * C + labels[b]];
  }
  const double n = static_cast<double>(B);
  return logits.tape()->record("softmax_xent", {logits}, Tensor::scalar(total / n),
                               [logits, probs, labels, B, C, n](const Tensor& g, GradSink& sink) {
                                 Tensor d = probs;
                                 for (std::size_t b = 0; b < B; ++b) d[b * C + labels[b]] -= 1.0;
                                 for (double& v : d.data()) v *= g[0] / n;
                                 sink.add(logits, d);
                               });
}

Var mse(const Var& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("mse: prediction " + pred.shape().str() + " vs target " +
                     target.shape().str());
  }
  Tape& tape = *pred.tape();
  return ad::mean(ad::square(ad::sub(pred, tape.constant(target))));
}

Optimizer::Optimizer(OptimizerConfig config, std::vector<Parameter*> params)
    : config_(config), params_(std::move(params)) {
  for (Parameter* p : params_) {
    m_.push_back(zeros(p->value.shape()));
    v_.push_back(zeros(p->value.shape()));
  }
}

void Optimizer::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Optimizer::step() {
  ++t_;
  std::visit(Overloaded{
                 [&](const SgdConfig& c) {
                   for (std::size_t k = 0; k < params_.size(); ++k) {
                     Parameter& p = *params_[k];
                     Tensor& vel = m_[k];
                     for (std::size_t i = 0; i < p.value.numel(); ++i) {
                       vel[i] = c.momentum * vel[i] + p.grad[i];
                       p.value[i] -= c.lr * vel[i];
                     }
                   }
                 },
                 [&](const AdamConfig& c) {
                   const double t = static_cast<double>(t_);
                   const double bc1 = 1.0 - std::pow(c.beta1, t);
                   const double bc2 = 1.0 - std::pow(c.beta2, t);
                   for (std::size_t k = 0; k < params_.size(); ++k) {
                     Parameter& p = *params_[k];
                     for (std::size_t i = 0; i < p.value.numel(); ++i) {
                       const double g = p.grad[i];
                       m_[k][i] = c.beta1 * m_[k][i] + (1.0 - c.beta1) * g;
                       v_[k][i] = c.beta2 * v_[k][i] + (1.0 - c.beta2) * g * g;
                       const double mhat = m_[k][i] / bc1;
                       const double vhat = v_[k][i] / bc2;
                       p.value[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
                     }
                   }
                 },
             },
             config_);
}

Tensor Dataset::gather(std::span<const std::size_t> idx) const {
  const auto& dims = features.shape().dims();
  const std::size_t row = features.numel() / dims[0];
  std::vector<std::size_t> out_dims = dims;
  out_dims[0] = idx.size();
  std::vector<double> buf;
  buf.reserve(idx.size() * row);
  const auto src = features.data();
  for (std::size_t i : idx) {
    if (i >= dims[0]) throw std::out_of_range("dataset row out of range");
    buf.insert(buf.end(), src.begin() + static_cast<std::ptrdiff_t>(i * row),
               src.begin() + static_cast<std::ptrdiff_t>((i + 1) * row));
  }
  return Tensor(Shape(std::move(out_dims)), std::move(buf));
}

std::vector<std::size_t> Dataset::gather_labels(std::span<const std::size_t> idx) const {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels.at(i));
  return out;
}

void validate(const TrainConfig& config) {
  const double lr = std::visit([](const auto& c) { return c.lr; }, config.optimizer);
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (config.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(config.val_split >= 0.0 && config.val_split < 1.0)) {
    throw std::invalid_argument("val_split must lie in [0, 1)");
  }
}

bool same_metrics(const EpochRecord& a, const EpochRecord& b) {
  return a.epoch == b.epoch && a.train_loss == b.train_loss && a.train_acc == b.train_acc &&
         a.val_loss == b.val_loss && a.val_acc == b.val_acc && a.zk == b.zk;
}

void shuffle(std::vector<std::size_t>& v, RngState& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(v[i - 1], v[j]);
  }
}

Split split_indices(std::size_t n, double val_split, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  RngState rng{seed ^ kSplitStream, 0};
  shuffle(idx, rng);
  const auto n_val = static_cast<std::size_t>(std::floor(val_split * static_cast<double>(n)));
  Split s;
  s.train.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));
  s.val.assign(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
  return s;
}

namespace {

Tensor one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  Tensor t(Shape{labels.size(), classes});
  for (std::size_t b = 0; b < labels.size(); ++b) t[b * classes + labels[b]] = 1.0;
  return t;
}

Var batch_loss(const Var& out, const std::vector<std::size_t>& labels, std::size_t classes,
               LossKind kind) {
  if (kind == LossKind::kSoftmaxXent) return softmax_xent(out, labels);
  return mse(out, one_hot(labels, classes));
}

std::size_t correct_count(const Tensor& out, const std::vector<std::size_t>& labels) {
  const std::size_t B = out.shape()[0];
  const std::size_t C = out.numel() / B;
  std::size_t correct = 0;
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c)
      if (out[b * C + c] > out[b * C + best]) best = c;
    correct += best == labels[b];
  }
  return correct;
}

}  // namespace

Evaluation evaluate(Model& model, const Dataset& data, std::span<const std::size_t> idx,
                    LossKind loss) {
  Evaluation ev;
  if (idx.empty()) return ev;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto chunk = idx.subspan(start, std::min(kEvalChunk, idx.size() - start));
    const auto labels = data.gather_labels(chunk);
    Tape tape;
    const Var out = model.forward(tape, data.gather(chunk));
    loss_sum += batch_loss(out, labels, data.num_classes, loss).value()[0] *
                static_cast<double>(chunk.size());
    correct += correct_count(out.value(), labels);
  }
  const double n = static_cast<double>(idx.size());
  ev.loss = loss_sum / n;
  ev.accuracy = static_cast<double>(correct) / n;
  return ev;
}

std::vector<EpochRecord> train(Model& model, const TrainConfig& config, const Dataset& data,
                               const EpochCallback& on_epoch) {
  validate(config);
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  std::vector<EpochRecord> records;
  if (config.epochs == 0) return records;

  const Split split = split_indices(data.size(), config.val_split, config.seed);
  if (split.train.empty()) throw std::invalid_argument("train: split leaves no training rows");
  const std::vector<std::size_t>& val_idx = split.val.empty() ? split.train : split.val;

  Optimizer opt(config.optimizer, model.trainable_parameters());
  RngState shuffle_rng{config.seed ^ kShuffleStream, 0};
  std::vector<std::size_t> order = split.train;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::span<const std::size_t> idx(
          order.data() + start, std::min(config.batch_size, order.size() - start));
      const auto labels = data.gather_labels(idx);
      Tape tape;
      std::vector<Var> trace;
      const Var out = model.forward(tape, data.gather(idx), &trace);
      const Var loss = batch_loss(out, labels, data.num_classes, config.loss);
      const double lv = loss.value()[0];
      for (std::size_t l = 0; l < trace.size(); ++l) {
        if (!trace[l].value().all_finite()) throw DivergenceError(epoch, batch_no, model.layer_names()[l]);
      }
      if (!std::isfinite(lv)) throw DivergenceError(epoch, batch_no, "loss");
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
      model.project();
      loss_sum += lv * static_cast<double>(idx.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_acc = evaluate(model, data, split.train, config.loss).accuracy;
    const Evaluation val = evaluate(model, data, val_idx, config.loss);
    rec.val_loss = val.loss;
    rec.val_acc = val.accuracy;
    rec.zk = model.zk_snapshot();
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(rec.val_loss)) throw DivergenceError(epoch, batch_no, "validation");
    if (on_epoch) on_epoch(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ashlab::nn

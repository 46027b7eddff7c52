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
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ashlab/tensor.hpp"

namespace ashlab {

class Tape;

// A trainable tensor that outlives individual tapes. Each forward pass binds it
// to a fresh tape with Tape::param; backward adds the gradient into `grad`.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string name, Tensor init, bool trainable = true)
      : name(std::move(name)), value(init), grad(zeros(init.shape())), trainable(trainable) {}

  void zero_grad() { grad = zeros(value.shape()); }
};

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Scratch gradient buffers handed to backward rules.
class GradSink {
 public:
  // True when `v` takes part in differentiation; rules may skip work otherwise.
  bool wants(const Var& v) const;
  void add(const Var& v, const Tensor& g);
  // Mutable buffer for `v`, allocated on first use.
  Tensor& slot(const Var& v);

 private:
  friend class Tape;
  explicit GradSink(Tape& tape);
  Tape& tape_;
  std::vector<Tensor> grads_;
  std::vector<bool> touched_;
};

using BackwardFn = std::function<void(const Tensor& grad_out, GradSink& sink)>;

// Define-by-run recording of primitive applications.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value, bool requires_grad = true);
  // Leaf bound to an external parameter. After backward, `p.grad` has been
  // incremented by the gradient of this pass.
  Var param(Parameter& p);

  // Appends a primitive. Throws std::invalid_argument when an input belongs to
  // another tape.
  Var record(std::string_view op, std::span<const Var> inputs, Tensor forward, BackwardFn rule);
  Var record(std::string_view op, std::initializer_list<Var> inputs, Tensor forward,
             BackwardFn rule) {
    return record(op, std::span<const Var>(inputs.begin(), inputs.size()), std::move(forward),
                  std::move(rule));
  }

  // Reverse sweep from a scalar loss. Gradients accumulate into every node's
  // grad (and bound parameters) additively across calls.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  const std::string& op_name(std::size_t id) const { return nodes_.at(id).op; }

 private:
  friend class Var;
  friend class GradSink;

  struct Node {
    std::string op;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn rule;
    Parameter* bound = nullptr;
  };

  const Node& node(const Var& v) const;
  std::size_t push(Node n);

  // deque keeps node references stable while the tape grows.
  std::deque<Node> nodes_;
};

namespace ad {

// Elementwise with scalar broadcast of `b`.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
// max(a, c) for a constant c; left-continuous subgradient (0 at a == c).
Var maximum(const Var& a, double c);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);

Var matmul(const Var& a, const Var& b);
// [m x n] plus a length-n row vector added to every row.
Var add_row(const Var& x, const Var& row);
Var reshape(const Var& a, Shape shape);

Var sum(const Var& a);
Var mean(const Var& a);
// Population statistics over all elements, as scalar nodes.
Var mean_all(const Var& a);
Var std_all(const Var& a);

}  // namespace ad

struct FdReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

using ScalarFn = std::function<Var(Tape&, const Var&)>;

// Compares reverse-mode gradients of f at x against central differences
// (f(x + h e_i) - f(x - h e_i)) / 2h. Relative error per coordinate uses the
// denominator max(|analytic|, |numeric|, 1e-8). Throws std::domain_error on a
// non-finite evaluation.
FdReport fd_check(const ScalarFn& f, const Tensor& x, double h = 1e-6);

}  // namespace ashlab

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

#include "ashlab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ashlab/errors.hpp"

namespace ashlab {

const Tensor& Var::value() const { return tape_->node(*this).value; }
const Tensor& Var::grad() const { return tape_->node(*this).grad; }
bool Var::requires_grad() const { return tape_->node(*this).requires_grad; }

GradSink::GradSink(Tape& tape)
    : tape_(tape), grads_(tape.nodes_.size()), touched_(tape.nodes_.size(), false) {}

bool GradSink::wants(const Var& v) const { return tape_.node(v).requires_grad; }

Tensor& GradSink::slot(const Var& v) {
  const std::size_t id = v.id();
  if (!touched_[id]) {
    grads_[id] = zeros(tape_.nodes_[id].value.shape());
    touched_[id] = true;
  }
  return grads_[id];
}

void GradSink::add(const Var& v, const Tensor& g) {
  if (!wants(v)) return;
  Tensor& dst = slot(v);
  if (g.shape() != dst.shape()) {
    throw ShapeError("backward rule produced gradient of shape " + g.shape().str() +
                     " for node of shape " + dst.shape().str());
  }
  accumulate(dst, g);
}

const Tape::Node& Tape::node(const Var& v) const {
  if (v.tape() != this) throw std::invalid_argument("variable belongs to a different tape");
  return nodes_.at(v.id());
}

std::size_t Tape::push(Node n) {
  n.grad = zeros(n.value.shape());
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return Var(this, push(std::move(n)));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.op = "param:" + p.name;
  n.value = p.value;
  n.requires_grad = p.trainable;
  n.bound = &p;
  return Var(this, push(std::move(n)));
}

Var Tape::record(std::string_view op, std::span<const Var> inputs, Tensor forward,
                 BackwardFn rule) {
  Node n;
  n.op = std::string(op);
  n.value = std::move(forward);
  for (const Var& in : inputs) {
    if (in.tape() != this) {
      throw std::invalid_argument("record(" + n.op + "): input from a different tape");
    }
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.rule = std::move(rule);
  return Var(this, push(std::move(n)));
}

void Tape::backward(const Var& loss) {
  const Node& root = node(loss);
  if (root.value.numel() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + root.value.shape().str());
  }
  if (!root.requires_grad) return;

  GradSink sink(*this);
  sink.slot(loss)[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!sink.touched_[i] || !n.requires_grad || !n.rule) continue;
    n.rule(sink.grads_[i], sink);
  }
  for (std::size_t i = 0; i <= loss.id(); ++i) {
    Node& n = nodes_[i];
    if (!sink.touched_[i] || !n.requires_grad) continue;
    accumulate(n.grad, sink.grads_[i]);
    if (n.bound != nullptr) accumulate(n.bound->grad, sink.grads_[i]);
  }
}

namespace ad {
namespace {

Tape& tape_of(const Var& a) { return *a.tape(); }

// Gradient for a broadcast scalar operand is the sum over the output.
Tensor reduce_to(const Tensor& g, const Shape& target) {
  if (g.shape() == target) return g;
  return Tensor::scalar(reduce(ReduceOp::kSum, g));
}

template <typename Fwd, typename Deriv>
Var unary(const Var& a, std::string_view name, Fwd fwd, Deriv deriv) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = fwd(x[i]);
  return tape_of(a).record(name, {a}, y, [a, y, deriv](const Tensor& g, GradSink& sink) {
    const Tensor& xv = a.value();
    Tensor gx(xv.shape());
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] = g[i] * deriv(xv[i], y[i]);
    sink.add(a, gx);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return tape_of(a).record("add", {a, b}, a.value() + b.value(),
                           [a, b](const Tensor& g, GradSink& sink) {
                             sink.add(a, g);
                             if (sink.wants(b)) sink.add(b, reduce_to(g, b.shape()));
                           });
}

Var sub(const Var& a, const Var& b) {
  return tape_of(a).record("sub", {a, b}, a.value() - b.value(),
                           [a, b](const Tensor& g, GradSink& sink) {
                             sink.add(a, g);
                             if (sink.wants(b)) sink.add(b, reduce_to(g * -1.0, b.shape()));
                           });
}

Var mul(const Var& a, const Var& b) {
  return tape_of(a).record("mul", {a, b}, a.value() * b.value(),
                           [a, b](const Tensor& g, GradSink& sink) {
                             if (sink.wants(a)) sink.add(a, g * b.value());
                             if (sink.wants(b)) sink.add(b, reduce_to(g * a.value(), b.shape()));
                           });
}

Var div(const Var& a, const Var& b) {
  return tape_of(a).record(
      "div", {a, b}, a.value() / b.value(), [a, b](const Tensor& g, GradSink& sink) {
        const Tensor& bv = b.value();
        if (sink.wants(a)) sink.add(a, g / bv);
        if (sink.wants(b)) {
          const Tensor& av = a.value();
          const bool bcast = bv.is_scalar() && av.shape() != bv.shape();
          Tensor gb(av.shape());
          for (std::size_t i = 0; i < gb.numel(); ++i) {
            const double d = bcast ? bv[0] : bv[i];
            gb[i] = -g[i] * av[i] / (d * d);
          }
          sink.add(b, reduce_to(gb, bv.shape()));
        }
      });
}

Var maximum(const Var& a, double c) {
  return unary(
      a, "maximum", [c](double x) { return x > c ? x : c; },
      [c](double x, double) { return x > c ? 1.0 : 0.0; });
}

Var scale(const Var& a, double s) {
  return unary(
      a, "scale", [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
  return unary(
      a, "add_scalar", [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var square(const Var& a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var exp(const Var& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  for (double v : a.value().data()) {
    if (!(v > 0.0)) throw std::domain_error("ad::log of non-positive value");
  }
  return unary(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var tanh(const Var& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(a, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var matmul(const Var& a, const Var& b) {
  return tape_of(a).record("matmul", {a, b}, ashlab::matmul(a.value(), b.value()),
                           [a, b](const Tensor& g, GradSink& sink) {
                             if (sink.wants(a)) sink.add(a, ashlab::matmul(g, transpose(b.value())));
                             if (sink.wants(b)) sink.add(b, ashlab::matmul(transpose(a.value()), g));
                           });
}

Var add_row(const Var& x, const Var& row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  if (xv.shape().rank() != 2 || rv.numel() != xv.shape()[1]) {
    throw ShapeError("add_row: cannot add " + rv.shape().str() + " to rows of " +
                     xv.shape().str());
  }
  const std::size_t m = xv.shape()[0], n = xv.shape()[1];
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = xv[i * n + j] + rv[j];
  return tape_of(x).record("add_row", {x, row}, y, [x, row, m, n](const Tensor& g, GradSink& sink) {
    sink.add(x, g);
    if (sink.wants(row)) {
      Tensor gr(row.shape());
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
      sink.add(row, gr);
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  return tape_of(a).record("reshape", {a}, y, [a](const Tensor& g, GradSink& sink) {
    sink.add(a, g.reshaped(a.shape()));
  });
}

Var sum(const Var& a) {
  return tape_of(a).record("sum", {a}, Tensor::scalar(reduce(ReduceOp::kSum, a.value())),
                           [a](const Tensor& g, GradSink& sink) {
                             sink.add(a, full(a.shape(), g[0]));
                           });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().numel());
  return tape_of(a).record("mean", {a}, Tensor::scalar(reduce(ReduceOp::kSum, a.value()) / n),
                           [a, n](const Tensor& g, GradSink& sink) {
                             sink.add(a, full(a.shape(), g[0] / n));
                           });
}

Var mean_all(const Var& a) {
  const double n = static_cast<double>(a.value().numel());
  return tape_of(a).record("mean_all", {a}, Tensor::scalar(reduce(ReduceOp::kMean, a.value())),
                           [a, n](const Tensor& g, GradSink& sink) {
                             sink.add(a, full(a.shape(), g[0] / n));
                           });
}

Var std_all(const Var& a) {
  RunningMoments m;
  for (double v : a.value().data()) m.push(v);
  const double mu = m.mean;
  const double sigma = std::sqrt(m.var_pop());
  const double n = static_cast<double>(m.n);
  return tape_of(a).record("std_all", {a}, Tensor::scalar(sigma),
                           [a, mu, sigma, n](const Tensor& g, GradSink& sink) {
                             Tensor gx(a.shape());
                             if (sigma > 0.0) {
                               const Tensor& xv = a.value();
                               for (std::size_t i = 0; i < gx.numel(); ++i)
                                 gx[i] = g[0] * (xv[i] - mu) / (n * sigma);
                             }
                             sink.add(a, gx);
                           });
}

}  // namespace ad

FdReport fd_check(const ScalarFn& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_check: h must be positive");

  Tape tape;
  const Var leaf = tape.leaf(x, true);
  const Var out = f(tape, leaf);
  if (!std::isfinite(out.value().item())) {
    throw std::domain_error("fd_check: non-finite evaluation at x");
  }
  tape.backward(out);
  const Tensor analytic = leaf.grad();

  auto eval = [&f](const Tensor& point) {
    Tape t;
    const double v = f(t, t.constant(point)).value().item();
    if (!std::isfinite(v)) throw std::domain_error("fd_check: non-finite evaluation");
    return v;
  };

  FdReport report;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = eval(probe);
    probe[i] = orig - h;
    const double fm = eval(probe);
    probe[i] = orig;
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (i == 0 || rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace ashlab

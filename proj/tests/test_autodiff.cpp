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

#include <gtest/gtest.h>

#include <cmath>

#include "ashlab/activations.hpp"
#include "ashlab/autodiff.hpp"
#include "ashlab/errors.hpp"
#include "oracles.hpp"

using namespace ashlab;

TEST(Tape, RecordAddValue) {
  Tape t;
  const Var a = t.leaf(Tensor::of({1, 2}));
  const Var b = t.leaf(Tensor::of({3, 5}));
  EXPECT_EQ(ad::add(a, b).value().vec(), (std::vector<double>{4, 7}));
}

TEST(Tape, ConstantsReceiveNothing) {
  Tape t;
  const Var a = t.constant(Tensor::of({1, 2}));
  const Var y = ad::sum(ad::square(a));
  EXPECT_FALSE(y.requires_grad());
  t.backward(y);
  EXPECT_EQ(a.grad().vec(), (std::vector<double>{0, 0}));
}

TEST(Tape, MixingTapesRejected) {
  Tape t1, t2;
  const Var a = t1.leaf(Tensor::of({1}));
  const Var b = t2.leaf(Tensor::of({1}));
  EXPECT_THROW(ad::add(a, b), std::invalid_argument);
}

TEST(Tape, NonScalarLossRejected) {
  Tape t;
  const Var a = t.leaf(Tensor::of({1, 2}));
  EXPECT_THROW(t.backward(a), ShapeError);
}

TEST(Backward, SumGivesOnes) {
  Tape t;
  const Var x = t.leaf(Tensor::of({0.3, -1, 8}));
  t.backward(ad::sum(x));
  EXPECT_EQ(x.grad().vec(), (std::vector<double>{1, 1, 1}));
}

TEST(Backward, SquareSum) {
  Tape t;
  const Var x = t.leaf(Tensor::of({1, 2}));
  t.backward(ad::sum(ad::mul(x, x)));
  EXPECT_EQ(x.grad().vec(), (std::vector<double>{2, 4}));
}

TEST(Backward, FanOutAccumulates) {
  Tape t;
  const Var x = t.leaf(Tensor::of({1, -3, 2}));
  t.backward(ad::sum(ad::add(x, x)));
  EXPECT_EQ(x.grad().vec(), (std::vector<double>{2, 2, 2}));
}

TEST(Backward, ReplayDoublesGrads) {
  Tape t;
  const Var x = t.leaf(Tensor::of({0.5, 1.5}));
  const Var y = ad::sum(ad::mul(ad::exp(x), x));
  t.backward(y);
  const Tensor once = x.grad();
  t.backward(y);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(x.grad()[i], 2.0 * once[i]);
}

TEST(Backward, GradAllZeroBeforeBackward) {
  Tape t;
  const Var x = t.leaf(Tensor::of({1, 2, 3}));
  ad::sum(x);
  EXPECT_EQ(x.grad().vec(), (std::vector<double>{0, 0, 0}));
}

TEST(Backward, ParameterBinding) {
  Parameter p("w", Tensor::of({2.0, -1.0}));
  {
    Tape t;
    t.backward(ad::sum(ad::square(t.param(p))));
  }
  EXPECT_EQ(p.grad.vec(), (std::vector<double>{4.0, -2.0}));
  p.zero_grad();
  EXPECT_EQ(p.grad.vec(), (std::vector<double>{0.0, 0.0}));
}

TEST(Backward, MatmulMatchesFiniteDifferences) {
  RngState rng{4, 0};
  const Tensor u = randn(Shape{4, 4}, rng);
  const Tensor w = randn(Shape{4, 4}, rng);
  const FdReport r = fd_check(
      [&](Tape& t, const Var& wv) { return ad::sum(ad::matmul(wv, t.constant(u))); }, w);
  EXPECT_LT(r.max_rel_err, 1e-6);
}

TEST(FdCheck, LinearIsExact) {
  RngState rng{1, 0};
  const FdReport r = fd_check([](Tape&, const Var& x) { return ad::sum(x); }, randn(Shape{10}, rng));
  EXPECT_LT(r.max_rel_err, 1e-10);
}

TEST(FdCheck, SwishAtOne) {
  const FdReport r = fd_check([](Tape&, const Var& x) { return ad::sum(act::swish(x)); }, Tensor::scalar(1.0));
  const double want = static_cast<double>(oracle::swish_grad(1.0L));
  EXPECT_NEAR(want, 0.92767, 1e-5);
  EXPECT_NEAR(r.analytic, want, 1e-12);
  EXPECT_LT(r.max_rel_err, 1e-8);
}

TEST(FdCheck, ConditionalUnitThetaGradIsZero) {
  const Tensor x = Tensor::of({-1.0, 0.2, 0.7, 2.0});
  const auto f = [&](Tape& t, const Var& theta) {
    return ad::sum(act::conditional_unit(t.constant(x), t.constant(Tensor::scalar(1.5)), theta));
  };
  // Away from every x the numeric derivative is zero as well.
  const FdReport far = fd_check(f, Tensor::scalar(0.5));
  EXPECT_EQ(far.analytic, 0.0);
  EXPECT_EQ(far.numeric, 0.0);
  // Inside the h-window of a kink only the numeric side sees the jump.
  const FdReport near = fd_check(f, Tensor::scalar(0.7));
  EXPECT_EQ(near.analytic, 0.0);
  EXPECT_NE(near.numeric, 0.0);
}

TEST(FdCheck, NonFiniteEvaluationRejected) {
  EXPECT_THROW(fd_check([](Tape&, const Var& x) { return ad::sum(ad::log(x)); }, Tensor::scalar(0.0)),
               std::domain_error);
}

TEST(ConditionalUnit, PartialsOnActiveSet) {
  Tape t;
  const Var x = t.leaf(Tensor::of({-1.0, 0.5, 1.0, 3.0}));
  const Var a = t.leaf(Tensor::scalar(2.0));
  const Var th = t.leaf(Tensor::scalar(0.5));
  const Var y = act::conditional_unit(x, a, th);
  EXPECT_EQ(y.value().vec(), (std::vector<double>{0, 1, 2, 6}));
  t.backward(ad::sum(y));
  EXPECT_EQ(x.grad().vec(), (std::vector<double>{0, 2, 2, 2}));
  EXPECT_EQ(a.grad().item(), 0.5 + 1.0 + 3.0);
  EXPECT_EQ(th.grad().item(), 0.0);
}

// Every elementary op against finite differences.
TEST(Primitives, FiniteDifferences) {
  RngState rng{21, 0};
  const Tensor x = randn(Shape{3, 4}, rng);
  Tensor pos = x;
  for (auto& v : pos.data()) v = 0.5 + std::abs(v);
  const Tensor other = randn(Shape{3, 4}, rng);
  const Tensor row = randn(Shape{4}, rng);
  const Tensor rhs = randn(Shape{4, 2}, rng);

  const std::vector<std::pair<const char*, ScalarFn>> cases = {
      {"sub", [&](Tape& t, const Var& v) { return ad::sum(ad::sub(v, t.constant(other))); }},
      {"mul", [&](Tape& t, const Var& v) { return ad::sum(ad::mul(v, t.constant(other))); }},
      {"div", [&](Tape& t, const Var& v) { return ad::sum(ad::div(t.constant(other), v)); }},
      {"scale", [&](Tape&, const Var& v) { return ad::sum(ad::scale(v, -2.5)); }},
      {"tanh", [&](Tape&, const Var& v) { return ad::sum(ad::tanh(v)); }},
      {"sigmoid", [&](Tape&, const Var& v) { return ad::sum(ad::sigmoid(v)); }},
      {"exp", [&](Tape&, const Var& v) { return ad::sum(ad::exp(v)); }},
      {"log", [&](Tape&, const Var& v) { return ad::sum(ad::log(v)); }},
      {"mean", [&](Tape&, const Var& v) { return ad::exp(ad::mean(v)); }},
      {"mean_all", [&](Tape&, const Var& v) { return ad::square(ad::mean_all(v)); }},
      {"std_all", [&](Tape&, const Var& v) { return ad::std_all(v); }},
      {"add_row", [&](Tape& t, const Var& v) { return ad::sum(ad::square(ad::add_row(v, t.constant(row)))); }},
      {"matmul", [&](Tape& t, const Var& v) { return ad::sum(ad::square(ad::matmul(v, t.constant(rhs)))); }},
      {"reshape", [&](Tape& t, const Var& v) {
         return ad::sum(ad::mul(ad::reshape(v, Shape{12}), t.constant(other.reshaped(Shape{12}))));
       }},
  };
  for (const auto& [name, f] : cases) {
    const Tensor& at = std::string(name) == "log" || std::string(name) == "div" ? pos : x;
    EXPECT_LT(fd_check(f, at).max_rel_err, 1e-6) << name;
  }
}

TEST(Primitives, MaximumUsesLeftSubgradient) {
  Tape t;
  const Var x = t.leaf(Tensor::of({-1.0, 0.0, 2.0}));
  t.backward(ad::sum(ad::maximum(x, 0.0)));
  EXPECT_EQ(x.grad().vec(), (std::vector<double>{0, 0, 1}));
}

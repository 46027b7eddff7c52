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
#include <stdexcept>

#include "ashlab/errors.hpp"
#include "ashlab/tensor.hpp"
#include "oracles.hpp"

using namespace ashlab;

TEST(Shape, RejectsBadExtents) {
  EXPECT_THROW(Shape({0}), ShapeError);
  EXPECT_THROW(Shape({1, 2, 3, 4, 5}), ShapeError);
  EXPECT_THROW(Shape(std::vector<std::size_t>{}), ShapeError);
  EXPECT_EQ(Shape({2, 3, 4}).numel(), 24u);
}

TEST(Shape, RowMajorOffset) {
  const Shape s{2, 3, 4};
  const std::size_t idx[] = {1, 2, 3};
  EXPECT_EQ(s.offset(idx), 1u * 12 + 2 * 4 + 3);
}

TEST(Tensor, FullExamples) {
  const Tensor a = full(Shape{2, 2}, 0.0);
  for (double v : a.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(full(Shape{1}, 1.0).item(), 1.0);
  const Tensor c = full(Shape{3}, 2.5);
  EXPECT_EQ(c.vec(), (std::vector<double>{2.5, 2.5, 2.5}));
}

TEST(Tensor, IndexRoundTrip) {
  Tensor t(Shape{2, 3, 4, 5});
  RngState rng{1, 0};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 5; ++d) {
          const double v = rng.next_normal();
          t.at({a, b, c, d}) = v;
          EXPECT_EQ(t.at({a, b, c, d}), v);
        }
  EXPECT_THROW(t.at({2, 0, 0, 0}), std::out_of_range);
}

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(Tensor(Shape{3}, {1.0, 2.0}), ShapeError);
}

TEST(Rng, DeterministicAndSeedSensitive) {
  RngState a{42, 0}, b{42, 0}, c{43, 0};
  const Tensor x = randn(Shape{100}, a);
  EXPECT_EQ(x, randn(Shape{100}, b));
  EXPECT_NE(x, randn(Shape{100}, c));
  RngState d{42, 100};
  RngState e{42, 0};
  randn(Shape{100}, e);
  EXPECT_EQ(randn(Shape{10}, d), randn(Shape{10}, e));
}

TEST(Rng, UniformOpenInterval) {
  RngState r{5, 0};
  for (int i = 0; i < 10000; ++i) {
    const double u = r.next_uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.next_below(7), 7u);
}

TEST(Randn, SampleMean) {
  RngState rng{7, 0};
  const Tensor x = randn(Shape{100000}, rng, 0.0, 1.0);
  EXPECT_NEAR(reduce(ReduceOp::kMean, x), 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(reduce(ReduceOp::kVarPop, x)), 1.0, 0.02);
}

TEST(Randn, ZeroStdIsConstant) {
  RngState rng{7, 0};
  const Tensor x = randn(Shape{50}, rng, 3.25, 0.0);
  for (double v : x.data()) EXPECT_EQ(v, 3.25);
}

TEST(Randn, NegativeStdRejected) {
  RngState rng{7, 0};
  EXPECT_THROW(randn(Shape{5}, rng, 0.0, -1.0), std::domain_error);
}

TEST(Ewise, Examples) {
  EXPECT_EQ((Tensor::of({1, 2}) + Tensor::of({3, 4})).vec(), (std::vector<double>{4, 6}));
  RngState rng{3, 0};
  const Tensor x = randn(Shape{4, 4}, rng);
  EXPECT_EQ(ewise(EwiseOp::kMul, x, Tensor::scalar(1.0)), x);
  EXPECT_EQ(ewise(EwiseOp::kMax, Tensor::of({-1, 2}), Tensor::scalar(0.0)).vec(),
            (std::vector<double>{0, 2}));
  EXPECT_EQ((Tensor::of({5, 7}) - Tensor::of({1, 2})).vec(), (std::vector<double>{4, 5}));
}

TEST(Ewise, Errors) {
  EXPECT_THROW(Tensor::of({1, 2}) + Tensor::of({1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor::of({1, 2}) / Tensor::of({1, 0}), std::domain_error);
  EXPECT_THROW(Tensor::of({1, 2}) / Tensor::scalar(0.0), std::domain_error);
}

TEST(Matmul, Examples) {
  const Tensor eye(Shape{2, 2}, {1, 0, 0, 1});
  const Tensor a(Shape{2, 2}, {1.5, -2, 3, 4});
  EXPECT_EQ(matmul(eye, a), a);
  EXPECT_EQ(matmul(Tensor(Shape{1, 2}, {1, 2}), Tensor(Shape{2, 1}, {3, 4})).item(), 11.0);
  EXPECT_THROW(matmul(Tensor(Shape{2, 3}), Tensor(Shape{2, 3})), ShapeError);
}

TEST(Matmul, MatchesNaiveOracleExactly) {
  RngState rng{8, 0};
  for (std::size_t n : {1u, 3u, 8u, 17u, 32u}) {
    const Tensor a = randn(Shape{n, n + 1}, rng);
    const Tensor b = randn(Shape{n + 1, n}, rng);
    const auto want = oracle::matmul(a.vec(), b.vec(), n, n + 1, n);
    EXPECT_EQ(matmul(a, b).vec(), want) << "n=" << n;
  }
}

TEST(Transpose, SwapsAxes) {
  const Tensor a(Shape{2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor t = transpose(a);
  EXPECT_EQ(t.shape(), (Shape{3, 2}));
  EXPECT_EQ(t.vec(), (std::vector<double>{1, 4, 2, 5, 3, 6}));
}

TEST(Reduce, HandSums) {
  const Tensor x = Tensor::of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_DOUBLE_EQ(reduce(ReduceOp::kMean, x), 5.5);
  EXPECT_DOUBLE_EQ(reduce(ReduceOp::kVarPop, x), 8.25);
  EXPECT_NEAR(std::sqrt(reduce(ReduceOp::kVarPop, x)), 2.8723, 1e-4);
  EXPECT_EQ(reduce(ReduceOp::kSum, x), 55.0);
  EXPECT_EQ(reduce(ReduceOp::kMin, x), 1.0);
  EXPECT_EQ(reduce(ReduceOp::kMax, x), 10.0);
  EXPECT_EQ(reduce(ReduceOp::kVarPop, full(Shape{9}, 4.2)), 0.0);
}

TEST(Reduce, WelfordMatchesTwoPass) {
  RngState rng{11, 0};
  for (std::size_t n : {2u, 100u, 10000u, 1000000u}) {
    const Tensor x = randn(Shape{n}, rng, 3.0, 2.0);
    const auto m = oracle::two_pass(x.vec());
    const double mean = reduce(ReduceOp::kMean, x);
    const double var = reduce(ReduceOp::kVarPop, x);
    EXPECT_NEAR(mean, static_cast<double>(m.mean), 1e-12 * std::abs(static_cast<double>(m.mean)));
    EXPECT_NEAR(var, static_cast<double>(m.var), 1e-12 * static_cast<double>(m.var)) << "n=" << n;
  }
}

TEST(Tensor, FiniteCheck) {
  Tensor t = Tensor::of({1, 2});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}

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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ashlab {

// Ordered extents, rank 1..4. By convention a rank > 1 tensor carries the
// batch on its leading axis and channels on its trailing axis.
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Shape() : dims_{1} {}
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
  std::size_t numel() const { return numel_; }
  const std::vector<std::size_t>& dims() const { return dims_; }

  // Row-major linear offset of an index tuple.
  std::size_t offset(std::span<const std::size_t> index) const;

  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t numel_ = 1;
};

// Counter-based generator: draw i of stream `seed` is a pure function of
// (seed, counter). Every draw advances the counter by one.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double next_uniform();
  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t next_below(std::uint64_t bound);
  // Standard normal via the inverse CDF.
  double next_normal();
};

// Dense row-major fp64 array.
class Tensor {
 public:
  Tensor() : Tensor(Shape{1}) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  // Rank-1 tensor from a list of values.
  static Tensor of(std::initializer_list<double> values);
  static Tensor scalar(double value) { return Tensor(Shape{1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool is_scalar() const { return data_.size() == 1; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);
  double item() const;

  Tensor reshaped(Shape shape) const;
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor full(const Shape& shape, double value);
Tensor zeros(const Shape& shape);
Tensor ones(const Shape& shape);
// i.i.d. N(mean, std^2) via inverse-CDF sampling; throws std::domain_error
// when std < 0.
Tensor randn(const Shape& shape, RngState& rng, double mean = 0.0, double std = 1.0);
Tensor uniform(const Shape& shape, RngState& rng, double lo, double hi);

enum class EwiseOp { kAdd, kSub, kMul, kDiv, kMax };

// Elementwise binary op; `b` may be a one-element tensor broadcast to `a`.
Tensor ewise(EwiseOp op, const Tensor& a, const Tensor& b);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, double s);
Tensor operator*(double s, const Tensor& a);
Tensor operator+(const Tensor& a, double s);

// In-place a += b (same shape).
void accumulate(Tensor& a, const Tensor& b);

// [m x k] * [k x n], accumulating over k in increasing order.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

enum class ReduceOp { kMean, kVarPop, kMin, kMax, kSum };

double reduce(ReduceOp op, const Tensor& x);
double reduce(ReduceOp op, std::span<const double> x);

// Single-pass Welford accumulator.
struct RunningMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double var_pop() const { return n ? m2 / static_cast<double>(n) : 0.0; }
};

}  // namespace ashlab

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

#include "ashlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ashlab/errors.hpp"
#include "ashlab/normal.hpp"

namespace ashlab {
namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape().str() +
                     " vs " + b.shape().str());
  }
}

}  // namespace

Shape::Shape(std::initializer_list<std::size_t> dims)
    : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty() || dims_.size() > kMaxRank) {
    throw ShapeError("shape rank must be in [1, 4], got " + std::to_string(dims_.size()));
  }
  numel_ = 1;
  for (std::size_t d : dims_) {
    if (d == 0) throw ShapeError("shape extents must be >= 1");
    numel_ *= d;
  }
}

std::size_t Shape::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) +
                     " does not match shape " + str());
  }
  std::size_t off = 0;
  for (std::size_t axis = 0; axis < dims_.size(); ++axis) {
    if (index[axis] >= dims_[axis]) throw std::out_of_range("index out of range for " + str());
    off = off * dims_[axis] + index[axis];
  }
  return off;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ',';
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

std::uint64_t RngState::next_u64() {
  const std::uint64_t out = mix64(mix64(seed) + counter * kGamma);
  ++counter;
  return out;
}

double RngState::next_uniform() {
  // 53 random bits, centred in their bucket so 0 and 1 are never produced.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngState::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double RngState::next_normal() { return normal::quantile(next_uniform()); }

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_.numel(), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("buffer of " + std::to_string(data_.size()) +
                     " elements does not match shape " + shape_.str());
  }
}

Tensor Tensor::of(std::initializer_list<double> values) {
  return Tensor(Shape{values.size()}, std::vector<double>(values));
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[shape_.offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return data_[shape_.offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_.str());
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != numel()) {
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor full(const Shape& shape, double value) {
  return Tensor(shape, std::vector<double>(shape.numel(), value));
}

Tensor zeros(const Shape& shape) { return full(shape, 0.0); }
Tensor ones(const Shape& shape) { return full(shape, 1.0); }

Tensor randn(const Shape& shape, RngState& rng, double mean, double std) {
  if (!(std >= 0.0)) throw std::domain_error("randn: std must be >= 0");
  Tensor out(shape);
  for (double& v : out.data()) {
    const double z = rng.next_normal();
    v = std == 0.0 ? mean : mean + std * z;
  }
  return out;
}

Tensor uniform(const Shape& shape, RngState& rng, double lo, double hi) {
  if (!(hi >= lo)) throw std::domain_error("uniform: hi must be >= lo");
  Tensor out(shape);
  for (double& v : out.data()) v = lo + (hi - lo) * rng.next_uniform();
  return out;
}

Tensor ewise(EwiseOp op, const Tensor& a, const Tensor& b) {
  const bool broadcast = b.is_scalar() && a.shape() != b.shape();
  if (!broadcast) require_same_shape(a, b, "ewise");
  Tensor out(a.shape());
  const auto src = a.data();
  const auto rhs = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double x = src[i];
    const double y = broadcast ? rhs[0] : rhs[i];
    switch (op) {
      case EwiseOp::kAdd: dst[i] = x + y; break;
      case EwiseOp::kSub: dst[i] = x - y; break;
      case EwiseOp::kMul: dst[i] = x * y; break;
      case EwiseOp::kDiv:
        if (y == 0.0) throw std::domain_error("ewise: division by zero");
        dst[i] = x / y;
        break;
      case EwiseOp::kMax: dst[i] = std::max(x, y); break;
    }
  }
  return out;
}

Tensor operator+(const Tensor& a, const Tensor& b) { return ewise(EwiseOp::kAdd, a, b); }
Tensor operator-(const Tensor& a, const Tensor& b) { return ewise(EwiseOp::kSub, a, b); }
Tensor operator*(const Tensor& a, const Tensor& b) { return ewise(EwiseOp::kMul, a, b); }
Tensor operator/(const Tensor& a, const Tensor& b) { return ewise(EwiseOp::kDiv, a, b); }
Tensor operator*(const Tensor& a, double s) { return ewise(EwiseOp::kMul, a, Tensor::scalar(s)); }
Tensor operator*(double s, const Tensor& a) { return a * s; }
Tensor operator+(const Tensor& a, double s) { return ewise(EwiseOp::kAdd, a, Tensor::scalar(s)); }

void accumulate(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "accumulate");
  auto dst = a.data();
  const auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().rank() != 2 || b.shape().rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " + a.shape().str() + " and " +
                     b.shape().str());
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul inner dimension mismatch " + a.shape().str() + " x " +
                     b.shape().str());
  }
  Tensor out(Shape{m, n});
  const auto lhs = a.data();
  const auto rhs = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += lhs[i * k + p] * rhs[p * n + j];
      dst[i * n + j] = acc;
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  if (a.shape().rank() != 2) throw ShapeError("transpose expects rank 2, got " + a.shape().str());
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor out(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return out;
}

double reduce(ReduceOp op, std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("reduce over empty range");
  switch (op) {
    case ReduceOp::kSum: {
      double s = 0.0;
      for (double v : x) s += v;
      return s;
    }
    case ReduceOp::kMin: return *std::min_element(x.begin(), x.end());
    case ReduceOp::kMax: return *std::max_element(x.begin(), x.end());
    case ReduceOp::kMean:
    case ReduceOp::kVarPop: {
      RunningMoments m;
      for (double v : x) m.push(v);
      return op == ReduceOp::kMean ? m.mean : m.var_pop();
    }
  }
  return 0.0;
}

double reduce(ReduceOp op, const Tensor& x) { return reduce(op, x.data()); }

}  // namespace ashlab

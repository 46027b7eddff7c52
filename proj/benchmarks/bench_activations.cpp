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

#include <benchmark/benchmark.h>

#include "ashlab/activations.hpp"
#include "ashlab/autodiff.hpp"
#include "ashlab/stats.hpp"

using namespace ashlab;

namespace {

Tensor input(std::int64_t n) {
  RngState rng{42, 0};
  return randn(Shape{static_cast<std::size_t>(n)}, rng);
}

void BM_SmoothAshForward(benchmark::State& state) {
  const Tensor x = input(state.range(0));
  act::Activation layer(act::AshParams{}, "act");
  for (auto _ : state) {
    Tape t;
    benchmark::DoNotOptimize(layer.apply(t, t.constant(x)).value()[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SmoothAshBackward(benchmark::State& state) {
  const Tensor x = input(state.range(0));
  act::Activation layer(act::AshParams{}, "act");
  for (auto _ : state) {
    Tape t;
    const Var xv = t.leaf(x);
    t.backward(ad::sum(layer.apply(t, xv)));
    benchmark::DoNotOptimize(xv.grad()[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HardAshKernel(benchmark::State& state) {
  const Tensor x = input(state.range(0));
  for (auto _ : state) {
    const InputStats s = compute_stats(x);
    benchmark::DoNotOptimize(act::hard_ash(x, 1.28, s)[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QuickselectTopK(benchmark::State& state) {
  const Tensor x = input(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_topk_mask(x, 10.0).kept);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SortTopK(benchmark::State& state) {
  const Tensor x = input(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sorted_topk_mask(x, 10.0).kept);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SmoothAshForward)->RangeMultiplier(10)->Range(10000, 1000000);
BENCHMARK(BM_SmoothAshBackward)->RangeMultiplier(10)->Range(10000, 1000000);
BENCHMARK(BM_HardAshKernel)->RangeMultiplier(10)->Range(10000, 1000000);
BENCHMARK(BM_QuickselectTopK)->RangeMultiplier(10)->Range(10000, 1000000);
BENCHMARK(BM_SortTopK)->RangeMultiplier(10)->Range(10000, 1000000);

BENCHMARK_MAIN();

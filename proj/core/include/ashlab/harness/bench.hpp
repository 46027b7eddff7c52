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
#include <string>
#include <vector>

namespace ashlab::harness {

struct BenchRow {
  std::size_t size = 0;
  std::string method;
  double ns_per_elem = 0.0;
};

// "1e4,1e5,1000" -> sizes. ConfigError on an empty list, a zero, or a
// non-integer entry.
std::vector<std::size_t> parse_sizes(const std::string& arg);

// For each N, the median of `repeats` timings of: the activation forward on N
// Gaussian values, exact top-k (k = 10%) by quickselect, and by a full sort.
// Methods are "<activation>_forward", "quickselect_topk" and "sort_topk".
std::vector<BenchRow> run_bench(const std::string& activation, const std::vector<std::size_t>& sizes,
                                std::size_t repeats = 9);

std::string bench_csv(const std::vector<BenchRow>& rows);
// Per size: quickselect/forward and sort/forward time ratios.
std::string bench_ratios(const std::vector<BenchRow>& rows);

}  // namespace ashlab::harness

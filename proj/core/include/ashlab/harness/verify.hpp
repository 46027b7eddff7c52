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

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::vector<std::string> failures;  // first few failing cases with their inputs
  std::size_t failed = 0;
  double ms = 0.0;

  bool passed() const { return failed == 0; }
};

// Runs every property suite: stats fidelity, oracle agreement, gradients,
// equivalence and limit checks, conditional-unit gradients, Swish recovery,
// invariances and the normality diagnostic.
std::vector<SuiteResult> run_verify();

// Fixed-width pass/fail table, failing cases listed under their suite.
std::string verify_table(const std::vector<SuiteResult>& results);

}  // namespace ashlab::harness

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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ashlab/harness/datasets.hpp"
#include "ashlab/nn.hpp"

namespace ashlab::harness {

struct CompareConfig {
  std::vector<std::string> activations;
  DatasetSpec dataset = BuiltinDataset{};
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;  // run i uses seed base_seed + i
  std::vector<std::size_t> hidden{16, 16};
  nn::TrainConfig train{nn::AdamConfig{}, 32, 100, 0, nn::LossKind::kSoftmaxXent, 0.2};
  // Absolute val_loss cut for epochs-to-threshold. Unset: 110% of the best
  // ReLU val_loss for the same seed.
  std::optional<double> cut;
  std::size_t threads = 1;
};

struct RunResult {
  std::string activation;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<nn::EpochRecord> records;
  double cut = 0.0;
  // 1-based epoch count at which val_loss first dropped below `cut`.
  std::optional<std::size_t> epochs_to_threshold;
};

struct CompareResult {
  std::vector<RunResult> runs;  // sorted by (activation, seed)
};

// Trains one identical MLP per (activation, seed). A run that diverges is kept
// with failed = true; the others are unaffected.
CompareResult run_compare(const CompareConfig& config);

// curves.csv: epoch,activation,seed,train_loss,val_loss,val_acc
// mean_curves.csv: epoch,activation,runs,train_loss,val_loss,val_acc
// runs.csv: activation,seed,status,epochs,cut,epochs_to_threshold,best_val_loss,final_val_loss,final_val_acc
void write_compare_csvs(const CompareResult& result, const std::filesystem::path& out_dir);

std::string curves_csv(const CompareResult& result);
std::string mean_curves_csv(const CompareResult& result);
std::string runs_csv(const CompareResult& result);

// Activations ranked by mean final val_loss, with mean epochs-to-threshold.
std::string ordering_report(const CompareResult& result);

}  // namespace ashlab::harness

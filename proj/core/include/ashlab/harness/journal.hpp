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
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ashlab/harness/config.hpp"
#include "ashlab/nn.hpp"

namespace ashlab::harness {

// One EpochRecord as a single-line JSON object. wall_ms is included only when
// `with_wall_time` is set.
std::string record_to_json(const nn::EpochRecord& rec, bool with_wall_time);
nn::EpochRecord record_from_json(const std::string& line);

// Append-only JSON-lines file. Every append writes one complete line and
// flushes, so an interrupted run leaves only whole lines behind.
class MetricsJournal {
 public:
  MetricsJournal(const std::filesystem::path& path, bool with_wall_time);
  // std::logic_error when the epoch does not exceed the previous one.
  void append(const nn::EpochRecord& rec);
  std::size_t lines() const { return lines_; }

 private:
  std::ofstream out_;
  bool with_wall_time_;
  std::optional<std::size_t> last_epoch_;
  std::size_t lines_ = 0;
};

// FormatError on a malformed line or a non-increasing epoch.
std::vector<nn::EpochRecord> read_journal(const std::filesystem::path& path);

// Parameter dump layout, all integers little-endian:
//   "ASHDUMP1"  u32 count
//   count x { u32 name_len, name bytes (UTF-8), u32 rank, rank x u32 dim }
//   then the fp64 buffers in the same order.
struct DumpEntry {
  std::string name;
  Tensor value;
};
void write_dump(const std::filesystem::path& path, const std::vector<const Parameter*>& params);
std::vector<DumpEntry> read_dump(const std::filesystem::path& path);

struct TrainOutcome {
  std::vector<nn::EpochRecord> records;
  std::filesystem::path journal;
  std::filesystem::path dump;
};

// Builds the model, trains, writes <out>/metrics.jsonl and <out>/model.bin.
// DivergenceError propagates after the journal holds every completed epoch.
TrainOutcome run_training(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace ashlab::harness

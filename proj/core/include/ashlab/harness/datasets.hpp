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
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "ashlab/nn.hpp"

namespace ashlab::harness {

enum class BuiltinKind { kTwoMoons, kBlobs, kSpirals };

struct BuiltinDataset {
  BuiltinKind kind = BuiltinKind::kTwoMoons;
  std::size_t n = 1000;
  double noise = 0.1;
  std::uint64_t seed = 0;
};
struct IdxDataset {
  std::string images;
  std::string labels;
};
struct CsvDataset {
  std::string path;
};
using DatasetSpec = std::variant<BuiltinDataset, IdxDataset, CsvDataset>;

std::string builtin_name(BuiltinKind kind);
BuiltinKind builtin_from_name(const std::string& name);

// 2-D synthetic classification sets, deterministic per seed, classes balanced
// within one sample. two_moons and spirals have 2 classes, blobs has 3.
nn::Dataset gen_builtin(BuiltinKind kind, std::size_t n, double noise, std::uint64_t seed);

struct IdxImages {
  Tensor images;  // [count, rows, cols], bytes scaled to [0, 1]
  std::vector<std::size_t> labels;
};

// IDX reader: big-endian 32-bit magic (0x00000803 images, 0x00000801
// labels) and dims, then unsigned bytes. Throws FormatError on a wrong magic
// or a truncated file.
IdxImages ingest_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
Tensor read_idx_images(const std::filesystem::path& path);
std::vector<std::size_t> read_idx_labels(const std::filesystem::path& path);

// Numeric CSV, one sample per row, class index in the last column. A first
// row that does not parse as numbers is treated as a header.
nn::Dataset read_csv_dataset(const std::filesystem::path& path);

// Resolves a spec to data; per-sample features are reshaped to `input_shape`
// when the element counts agree. An empty `input_shape` flattens each sample.
nn::Dataset load_dataset(const DatasetSpec& spec, const std::vector<std::size_t>& input_shape);

}  // namespace ashlab::harness

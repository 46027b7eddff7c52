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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ashlab/errors.hpp"
#include "ashlab/harness/bench.hpp"
#include "ashlab/harness/compare.hpp"
#include "ashlab/harness/config.hpp"
#include "ashlab/harness/datasets.hpp"
#include "ashlab/harness/journal.hpp"
#include "ashlab/harness/verify.hpp"

using namespace ashlab;
using namespace ashlab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ashlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kConfig = R"({
  "model": {
    "input_shape": [2],
    "layers": [
      {"type": "dense", "in": 2, "out": 8},
      {"type": "activation", "activation": {"kind": "smooth_ash", "alpha": 2.0, "z_k_init": 0.1, "grad_mode": "stop-stats"}},
      {"type": "dense", "in": 8, "out": 8},
      {"type": "activation", "activation": {"kind": "leaky_ash", "leak_init": 0.05}},
      {"type": "dense", "in": 8, "out": 2}
    ]
  },
  "train": {"optimizer": {"kind": "sgd", "lr": 0.05, "momentum": 0.9}, "batch_size": 16, "epochs": 3, "seed": 5},
  "dataset": {"kind": "spirals", "n": 120, "noise": 0.05, "seed": 2},
  "output": {"dir": "somewhere"}
})";

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  const ExperimentConfig c = parse_config(kConfig);
  EXPECT_EQ(c.model.layers.size(), 5u);
  const auto& a = std::get<act::AshParams>(std::get<nn::ActivationLayerSpec>(c.model.layers[1]).activation);
  EXPECT_EQ(a.alpha, 2.0);
  EXPECT_EQ(a.grad_mode, act::GradMode::kStopStats);
  EXPECT_EQ(std::get<nn::SgdConfig>(c.train.optimizer).momentum, 0.9);
  EXPECT_EQ(c.train.batch_size, 16u);
  EXPECT_EQ(std::get<BuiltinDataset>(c.dataset).kind, BuiltinKind::kSpirals);
  EXPECT_EQ(c.output_dir, "somewhere");

  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config(once));
  EXPECT_EQ(once, twice);
}

TEST(Config, EveryActivationRoundTrips) {
  for (const char* name : {"relu", "lrelu", "prelu", "softplus", "elu", "selu", "gelu", "swish", "hard_ash",
                           "heaviside_ash", "ash", "gen_swish", "gen_swish_frozen", "l_ash", "f_ash_90"}) {
    const act::ActivationSpec spec = act::resolve_activation(name);
    const std::string j = activation_to_json(spec);
    EXPECT_EQ(activation_to_json(activation_from_json(j)), j) << name;
    EXPECT_EQ(act::kind_name(activation_from_json(j)), act::kind_name(spec));
  }
  EXPECT_EQ(activation_to_json(act::AshParams{}).rfind(R"({"kind":"smooth_ash","alpha":1.0,"z_k_init":0.0,"grad_mode":"through-stats")", 0), 0u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  const std::vector<std::string> bad = {
      R"({"model": {"layers": []}, "extra": 1})",
      R"({"model": {"layers": [{"type": "dense", "in": 2, "out": 2, "bias": false}]}})",
      R"({"model": {"layers": [{"type": "activation", "activation": {"kind": "relu", "slope": 1}}]}})",
      R"({"model": {"layers": [{"type": "activation", "activation": {"kind": "mish"}}]}})",
      R"({"model": {"layers": [{"type": "activation", "activation": {"kind": "smooth_ash", "alpha": -1}}]}})",
      R"({"model": {"layers": []}, "train": {"epochs": -1}})",
      R"({"model": {"layers": []}, "train": {"optimizer": {"kind": "rmsprop"}}})",
      R"({"model": {"layers": []}, "train": {"val_split": 1.5}})",
      R"({"model": {"layers": []}, "dataset": {"kind": "moons"}})",
      R"({"model": {"layers": []}, "output": {"dir": 3}})",
      R"({"train": {}})",
      R"({"model": )",
  };
  for (const auto& text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
}

TEST(Config, EnvSeedOverride) {
  ExperimentConfig c = parse_config(kConfig);
  ::setenv("ASHLAB_SEED", "77", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.train.seed, 77u);
  ::setenv("ASHLAB_SEED", "seven", 1);
  EXPECT_THROW(apply_env_overrides(c), ConfigError);
  ::unsetenv("ASHLAB_SEED");
  apply_env_overrides(c);
  EXPECT_EQ(c.train.seed, 77u);
}

TEST(Config, DatasetArgument) {
  const auto b = std::get<BuiltinDataset>(parse_dataset_arg("spirals:n=500,noise=0.2,seed=3"));
  EXPECT_EQ(b.kind, BuiltinKind::kSpirals);
  EXPECT_EQ(b.n, 500u);
  EXPECT_EQ(b.noise, 0.2);
  EXPECT_EQ(b.seed, 3u);
  EXPECT_EQ(std::get<BuiltinDataset>(parse_dataset_arg("two_moons")).n, 1000u);
  EXPECT_EQ(std::get<IdxDataset>(parse_dataset_arg("idx:a.idx,b.idx")).labels, "b.idx");
  EXPECT_EQ(std::get<CsvDataset>(parse_dataset_arg("csv:data.csv")).path, "data.csv");
  for (const char* s : {"circles", "two_moons:n=1", "two_moons:k=3", "idx:only", "csv:", "blobs:n=abc"}) {
    EXPECT_THROW(parse_dataset_arg(s), ConfigError) << s;
  }
}

TEST(Builtin, TwoMoonsNoiseFreeGeometry) {
  const nn::Dataset d = gen_builtin(BuiltinKind::kTwoMoons, 100, 0.0, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.features[2 * i], y = d.features[2 * i + 1];
    if (d.labels[i] == 0) {
      EXPECT_NEAR(x * x + y * y, 1.0, 1e-12);
      EXPECT_GE(y, -1e-12);
    } else {
      EXPECT_NEAR((x - 1) * (x - 1) + (y - 0.5) * (y - 0.5), 1.0, 1e-12);
      EXPECT_LE(y, 0.5 + 1e-12);
    }
  }
}

TEST(Builtin, DeterministicAndBalanced) {
  const nn::Dataset a = gen_builtin(BuiltinKind::kBlobs, 100, 0.1, 4);
  const nn::Dataset b = gen_builtin(BuiltinKind::kBlobs, 100, 0.1, 4);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.num_classes, 3u);
  std::vector<int> count(3, 0);
  for (auto l : a.labels) ++count[l];
  EXPECT_LE(*std::max_element(count.begin(), count.end()) - *std::min_element(count.begin(), count.end()), 1);
  EXPECT_NE(gen_builtin(BuiltinKind::kBlobs, 100, 0.1, 5).features, a.features);
  EXPECT_THROW(gen_builtin(BuiltinKind::kSpirals, 1, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(gen_builtin(BuiltinKind::kSpirals, 10, -0.1, 0), std::invalid_argument);
}

TEST(Builtin, SpiralsDefeatLinearModel) {
  const nn::Dataset d = gen_builtin(BuiltinKind::kSpirals, 400, 0.05, 1);
  nn::ModelSpec spec;
  spec.input_shape = {2};
  spec.layers = {nn::DenseSpec{2, 2}};
  nn::Model m(spec, 0);
  nn::TrainConfig c;
  c.epochs = 100;
  c.optimizer = nn::AdamConfig{0.01};
  const auto recs = nn::train(m, c, d);
  EXPECT_LT(recs.back().train_acc, 0.7);
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_LT(nn::evaluate(m, d, all, nn::LossKind::kSoftmaxXent).accuracy, 0.7);
}

TEST(Idx, FixtureImagesAndLabels) {
  const fs::path dir = scratch("idx");
  write_bytes(dir / "img", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2, 3, 4, 5, 6, 7});
  write_bytes(dir / "lbl", {0, 0, 8, 1, 0, 0, 0, 2, 0, 1});
  const IdxImages got = ingest_idx(dir / "img", dir / "lbl");
  EXPECT_EQ(got.images.shape(), (Shape{2, 2, 2}));
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(got.images[k], static_cast<double>(k) / 255.0);
  EXPECT_EQ(got.labels, (std::vector<std::size_t>{0, 1}));

  const nn::Dataset flat = load_dataset(IdxDataset{(dir / "img").string(), (dir / "lbl").string()}, {4});
  EXPECT_EQ(flat.features.shape(), (Shape{2, 4}));
  EXPECT_EQ(flat.num_classes, 2u);
}

TEST(Idx, FormatErrors) {
  const fs::path dir = scratch("idx_bad");
  write_bytes(dir / "magic", {0xDE, 0xAD, 0xBE, 0xEF, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0});
  try {
    read_idx_images(dir / "magic");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("0xDEADBEEF"), std::string::npos) << e.what();
  }
  write_bytes(dir / "short", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2});
  EXPECT_THROW(read_idx_images(dir / "short"), FormatError);
  write_bytes(dir / "hdr", {0, 0, 8});
  EXPECT_THROW(read_idx_labels(dir / "hdr"), FormatError);
  write_bytes(dir / "lbl", {0, 0, 8, 1, 0, 0, 0, 3, 0, 1});
  EXPECT_THROW(read_idx_labels(dir / "lbl"), FormatError);
  EXPECT_THROW(read_idx_labels(dir / "missing"), FormatError);
  write_bytes(dir / "img", {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 9});
  write_bytes(dir / "two", {0, 0, 8, 1, 0, 0, 0, 2, 0, 1});
  EXPECT_THROW(ingest_idx(dir / "img", dir / "two"), FormatError);
}

TEST(Csv, HeaderAndErrors) {
  const fs::path dir = scratch("csv");
  std::ofstream(dir / "ok.csv") << "x,y,label\n0.5,1.0,0\n-1,2,1\n3,4,2\n";
  const nn::Dataset d = read_csv_dataset(dir / "ok.csv");
  EXPECT_EQ(d.features.shape(), (Shape{3, 2}));
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(d.num_classes, 3u);
  std::ofstream(dir / "ragged.csv") << "1,2,0\n1,0\n";
  EXPECT_THROW(read_csv_dataset(dir / "ragged.csv"), FormatError);
  std::ofstream(dir / "label.csv") << "1,2,0.5\n";
  EXPECT_THROW(read_csv_dataset(dir / "label.csv"), FormatError);
  std::ofstream(dir / "empty.csv") << "a,b\n";
  EXPECT_THROW(read_csv_dataset(dir / "empty.csv"), FormatError);
  EXPECT_THROW(load_dataset(CsvDataset{(dir / "ok.csv").string()}, {3}), ShapeError);
}

TEST(Journal, LinesAreStandaloneJson) {
  const fs::path dir = scratch("journal");
  nn::EpochRecord r;
  r.train_loss = 0.5;
  r.val_loss = 0.25;
  r.val_acc = 0.75;
  r.train_acc = 0.8;
  r.zk["act1"] = {0.125, -0.5};
  r.wall_ms = 12.0;
  {
    MetricsJournal j(dir / "m.jsonl", false);
    j.append(r);
    r.epoch = 1;
    j.append(r);
    EXPECT_THROW(j.append(r), std::logic_error);
    EXPECT_EQ(j.lines(), 2u);
  }
  const std::string text = slurp(dir / "m.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.find("wall_ms"), std::string::npos);
  const auto back = read_journal(dir / "m.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].epoch, 1u);
  EXPECT_EQ(back[0].zk.at("act1"), (std::vector<double>{0.125, -0.5}));
  EXPECT_EQ(back[0].val_loss, 0.25);
  EXPECT_NE(record_to_json(r, true).find("\"wall_ms\":12.0"), std::string::npos);

  std::ofstream(dir / "bad.jsonl") << record_to_json(r, false) << "\n" << record_to_json(r, false) << "\n";
  EXPECT_THROW(read_journal(dir / "bad.jsonl"), FormatError);
  std::ofstream(dir / "junk.jsonl") << "{not json\n";
  EXPECT_THROW(read_journal(dir / "junk.jsonl"), FormatError);
}

TEST(Dump, RoundTripAndLayout) {
  const fs::path dir = scratch("dump");
  Parameter a("dense0.W", Tensor(Shape{2, 3}, {1, 2, 3, 4, 5, -6.5}));
  Parameter b("act1.z_k", Tensor::scalar(0.25));
  write_dump(dir / "m.bin", {&a, &b});
  const std::string raw = slurp(dir / "m.bin");
  EXPECT_EQ(raw.substr(0, 8), "ASHDUMP1");
  EXPECT_EQ(static_cast<unsigned char>(raw[8]), 2u);
  // header: 8 + 4 + (4 + 8 + 4 + 8) + (4 + 8 + 4 + 4), then 7 doubles
  EXPECT_EQ(raw.size(), 8u + 4 + 24 + 20 + 7 * 8);
  const auto entries = read_dump(dir / "m.bin");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].name, "dense0.W");
  EXPECT_EQ(entries[0].value, a.value);
  EXPECT_EQ(entries[1].value, b.value);
  // Little-endian 1.0 starts the buffers.
  const std::size_t data_at = raw.size() - 7 * 8;
  EXPECT_EQ(static_cast<unsigned char>(raw[data_at + 7]), 0x3Fu);
  EXPECT_EQ(static_cast<unsigned char>(raw[data_at + 6]), 0xF0u);

  std::ofstream(dir / "trunc.bin", std::ios::binary) << raw.substr(0, raw.size() - 3);
  EXPECT_THROW(read_dump(dir / "trunc.bin"), FormatError);
  std::ofstream(dir / "magic.bin", std::ios::binary) << "NOTADUMP" << raw.substr(8);
  EXPECT_THROW(read_dump(dir / "magic.bin"), FormatError);
}

TEST(RunTraining, WritesJournalAndDumpDeterministically) {
  ExperimentConfig c = parse_config(kConfig);
  const fs::path d1 = scratch("run1"), d2 = scratch("run2");
  const TrainOutcome o1 = run_training(c, d1);
  run_training(c, d2);
  EXPECT_EQ(o1.records.size(), 3u);
  EXPECT_EQ(slurp(d1 / "metrics.jsonl"), slurp(d2 / "metrics.jsonl"));
  EXPECT_EQ(slurp(d1 / "model.bin"), slurp(d2 / "model.bin"));
  EXPECT_EQ(read_journal(d1 / "metrics.jsonl").size(), 3u);
  EXPECT_EQ(read_dump(d1 / "model.bin").size(), 9u);

  c.train.epochs = 0;
  const fs::path d3 = scratch("run0");
  EXPECT_TRUE(run_training(c, d3).records.empty());
  EXPECT_EQ(slurp(d3 / "metrics.jsonl"), "");
}

TEST(Compare, RowCountAndHeaders) {
  CompareConfig c;
  c.activations = {"relu"};
  c.dataset = BuiltinDataset{BuiltinKind::kTwoMoons, 100, 0.1, 0};
  c.train.epochs = 7;
  const CompareResult r = run_compare(c);
  const std::string curves = curves_csv(r);
  EXPECT_EQ(curves.substr(0, curves.find('\n')), "epoch,activation,seed,train_loss,val_loss,val_acc");
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 8);
  const std::string mean = mean_curves_csv(r);
  EXPECT_EQ(std::count(mean.begin(), mean.end(), '\n'), 8);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_NEAR(r.runs[0].cut, 1.1 * std::min_element(r.runs[0].records.begin(), r.runs[0].records.end(),
                                                     [](const auto& a, const auto& b) { return a.val_loss < b.val_loss; })
                                        ->val_loss,
              1e-15);
  EXPECT_TRUE(r.runs[0].epochs_to_threshold.has_value());
}

TEST(Compare, SwishEqualsFrozenGenSwish) {
  CompareConfig c;
  c.activations = {"swish", "gen_swish_frozen"};
  c.dataset = BuiltinDataset{BuiltinKind::kTwoMoons, 200, 0.1, 1};
  c.seeds = 2;
  c.train.epochs = 10;
  const CompareResult r = run_compare(c);
  ASSERT_EQ(r.runs.size(), 4u);
  // Sorted: gen_swish_frozen seeds 0,1 then swish seeds 0,1.
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& g = r.runs[s];
    const auto& w = r.runs[2 + s];
    ASSERT_EQ(g.activation, "gen_swish_frozen");
    ASSERT_EQ(w.activation, "swish");
    for (std::size_t e = 0; e < 10; ++e) EXPECT_LT(std::abs(g.records[e].val_loss - w.records[e].val_loss), 1e-9);
  }
}

TEST(Compare, ThreadedMatchesSerial) {
  CompareConfig c;
  c.activations = {"ash", "relu", "f_ash_10"};
  c.dataset = BuiltinDataset{BuiltinKind::kTwoMoons, 100, 0.1, 0};
  c.seeds = 2;
  c.train.epochs = 4;
  const std::string serial = curves_csv(run_compare(c)) + runs_csv(run_compare(c));
  c.threads = 3;
  const CompareResult par = run_compare(c);
  EXPECT_EQ(curves_csv(par) + runs_csv(par), serial);
}

TEST(Compare, FailedRunIsMarked) {
  CompareResult r;
  RunResult ok;
  ok.activation = "relu";
  ok.records.resize(2);
  ok.records[1].epoch = 1;
  ok.cut = 1.0;
  RunResult bad;
  bad.activation = "swish";
  bad.failed = true;
  bad.records.resize(1);
  bad.cut = 1.0;
  r.runs = {ok, bad};
  const std::string runs = runs_csv(r);
  EXPECT_NE(runs.find("swish,0,failed,1,"), std::string::npos) << runs;
  EXPECT_NE(runs.find("relu,0,ok,2,"), std::string::npos);
  EXPECT_NE(curves_csv(r).find("1,swish,0,nan,nan,nan"), std::string::npos);
  EXPECT_NE(ordering_report(r).find("relu"), std::string::npos);
}

TEST(Compare, RejectsBadInput) {
  CompareConfig c;
  EXPECT_THROW(run_compare(c), ConfigError);
  c.activations = {"mish"};
  EXPECT_THROW(run_compare(c), ConfigError);
  c.activations = {"relu"};
  c.seeds = 0;
  EXPECT_THROW(run_compare(c), ConfigError);
}

TEST(Bench, CsvFormat) {
  const auto rows = run_bench("smooth_ash", {1, 100}, 3);
  ASSERT_EQ(rows.size(), 6u);
  const std::string csv = bench_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "size,method,ns_per_elem");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2) << line;
  }
  EXPECT_EQ(n, 6);
  EXPECT_NE(bench_ratios(rows).find("N=100"), std::string::npos);
}

TEST(Bench, ParseSizes) {
  EXPECT_EQ(parse_sizes("1e4,1e5,1000"), (std::vector<std::size_t>{10000, 100000, 1000}));
  for (const char* s : {"", "0", "1e4,0", "abc", "1.5", "-3"}) EXPECT_THROW(parse_sizes(s), ConfigError) << s;
}

TEST(Verify, CleanRunPasses) {
  const auto results = run_verify();
  EXPECT_GE(results.size(), 6u);
  for (const auto& r : results) EXPECT_TRUE(r.passed()) << verify_table(results);
  EXPECT_NE(verify_table(results).find("gradients"), std::string::npos);
}

TEST(Verify, InjectedFaultNamesGradientSuite) {
  fault::inject(fault::Fault::kFlipSwishBackward);
  const auto results = run_verify();
  fault::inject(fault::Fault::kNone);
  bool grad_failed = false;
  for (const auto& r : results) {
    if (r.name == "gradients") {
      grad_failed = !r.passed();
      ASSERT_FALSE(r.failures.empty());
      EXPECT_NE(r.failures[0].find("swish"), std::string::npos);
      EXPECT_NE(r.failures[0].find("x="), std::string::npos);
    }
  }
  EXPECT_TRUE(grad_failed);
}

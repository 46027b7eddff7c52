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
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ASHLAB_CLI_PATH + "\" " + args + " 2>&1";
  CliRun r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ashlab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string small_config(const std::string& dataset, int epochs, const fs::path& out) {
  return R"({"model": {"input_shape": [2], "layers": [
    {"type": "dense", "in": 2, "out": 4},
    {"type": "activation", "activation": {"kind": "smooth_ash"}},
    {"type": "dense", "in": 4, "out": 2}]},
  "train": {"epochs": )" +
         std::to_string(epochs) + R"(, "batch_size": 8},
  "dataset": )" + dataset +
         R"(,
  "output": {"dir": ")" + out.string() +
         R"("}})";
}

}  // namespace

TEST(Cli, Table) {
  CliRun r = cli("table --k 2.5");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.95996\n");
  EXPECT_EQ(cli("table --k 50").out, "0.00000\n");
  EXPECT_EQ(cli("table --k 0").code, 2);
  EXPECT_EQ(cli("table --k 100").code, 2);
  EXPECT_EQ(cli("table --k abc").code, 2);
  EXPECT_EQ(cli("table").code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("verify --inject-fault nothing").code, 2);
  EXPECT_EQ(cli("compare --activations mish --epochs 1").code, 2);
  EXPECT_EQ(cli("bench --sizes 0").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, VerifyAndInjectedFault) {
  const CliRun ok = cli("verify");
  EXPECT_EQ(ok.code, 0) << ok.out;
  const CliRun bad = cli("verify --inject-fault swish_backward");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("suite gradients failed"), std::string::npos) << bad.out;
}

TEST(Cli, TrainWritesArtifacts) {
  const fs::path dir = scratch("train");
  std::ofstream(dir / "c.json") << small_config(R"({"kind": "two_moons", "n": 80})", 3, dir / "out");
  const CliRun r = cli("train --config " + (dir / "c.json").string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "model.bin"));

  std::ofstream(dir / "zero.json") << small_config(R"({"kind": "two_moons", "n": 80})", 0, dir / "zero");
  EXPECT_EQ(cli("train --config " + (dir / "zero.json").string()).code, 0);
  EXPECT_EQ(fs::file_size(dir / "zero" / "metrics.jsonl"), 0u);
}

TEST(Cli, TrainExitCodes) {
  const fs::path dir = scratch("train_codes");
  std::ofstream(dir / "unknown.json") << R"({"model": {"layers": []}, "bogus": true})";
  EXPECT_EQ(cli("train --config " + (dir / "unknown.json").string()).code, 2);
  EXPECT_EQ(cli("train --config " + (dir / "missing.json").string()).code, 2);

  std::ofstream(dir / "nan.csv") << "0,1,0\nnan,1,1\n1,0,0\n0,0,1\n";
  std::ofstream(dir / "nan.json") << small_config(R"({"kind": "csv", "path": ")" + (dir / "nan.csv").string() + R"("})",
                                                  2, dir / "out");
  const CliRun r = cli("train --config " + (dir / "nan.json").string());
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("epoch"), std::string::npos);
}

TEST(Cli, CompareAndBench) {
  const fs::path dir = scratch("compare");
  const CliRun c = cli("compare --activations relu,ash --dataset two_moons:n=80 --epochs 3 --out " + dir.string());
  EXPECT_EQ(c.code, 0) << c.out;
  for (const char* f : {"curves.csv", "mean_curves.csv", "runs.csv"}) EXPECT_TRUE(fs::exists(dir / f)) << f;

  const CliRun b = cli("bench --sizes 1 --out " + (dir / "bench.csv").string());
  EXPECT_EQ(b.code, 0) << b.out;
  EXPECT_NE(b.out.find("size,method,ns_per_elem"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "bench.csv"));
}

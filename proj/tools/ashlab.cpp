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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ashlab/activations.hpp"
#include "ashlab/errors.hpp"
#include "ashlab/harness/bench.hpp"
#include "ashlab/harness/compare.hpp"
#include "ashlab/harness/config.hpp"
#include "ashlab/harness/journal.hpp"
#include "ashlab/harness/verify.hpp"
#include "ashlab/stats.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kDiverged = 3 };

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_verify(const std::string& fault) {
  if (fault == "swish_backward") {
    ashlab::fault::inject(ashlab::fault::Fault::kFlipSwishBackward);
  } else if (!fault.empty()) {
    std::cerr << "unknown fault '" << fault << "'\n";
    return kUsage;
  }
  const auto results = ashlab::harness::run_verify();
  std::cout << ashlab::harness::verify_table(results);
  bool ok = true;
  for (const auto& r : results) {
    if (!r.passed()) {
      ok = false;
      std::cerr << "suite " << r.name << " failed\n";
    }
  }
  return ok ? kOk : kVerifyFailed;
}

int cmd_table(double k) {
  if (!(k > 0.0 && k < 100.0)) {
    std::cerr << "k must be a percentage in (0, 100)\n";
    return kUsage;
  }
  std::printf("%.5f\n", ashlab::z_from_percentile(k));
  return kOk;
}

int cmd_train(const std::string& config_path, const std::string& out) {
  auto config = ashlab::harness::load_config(config_path);
  ashlab::harness::apply_env_overrides(config);
  const std::string dir = out.empty() ? config.output_dir : out;
  const auto outcome = ashlab::harness::run_training(config, dir);
  if (!outcome.records.empty()) {
    const auto& last = outcome.records.back();
    std::printf("epochs %zu  train_loss %.6f  train_acc %.4f  val_loss %.6f  val_acc %.4f\n",
                outcome.records.size(), last.train_loss, last.train_acc, last.val_loss, last.val_acc);
  } else {
    std::printf("epochs 0\n");
  }
  std::printf("wrote %s and %s\n", outcome.journal.string().c_str(), outcome.dump.string().c_str());
  return kOk;
}

struct CompareArgs {
  std::string activations;
  std::string dataset = "two_moons";
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;
  std::size_t epochs = 100;
  std::size_t batch = 32;
  double lr = 1e-3;
  double cut = -1.0;
  std::size_t threads = 1;
  std::string out = "compare_out";
};

int cmd_compare(const CompareArgs& a) {
  ashlab::harness::CompareConfig c;
  c.activations = split_list(a.activations);
  c.dataset = ashlab::harness::parse_dataset_arg(a.dataset);
  c.seeds = a.seeds;
  c.base_seed = a.base_seed;
  c.train.epochs = a.epochs;
  c.train.batch_size = a.batch;
  c.train.optimizer = ashlab::nn::AdamConfig{a.lr};
  if (a.cut > 0.0) c.cut = a.cut;
  c.threads = a.threads;
  const auto result = ashlab::harness::run_compare(c);
  ashlab::harness::write_compare_csvs(result, a.out);
  std::cout << ashlab::harness::ordering_report(result);
  for (const auto& run : result.runs) {
    if (run.failed) std::cerr << run.activation << " seed " << run.seed << " failed: " << run.error << '\n';
  }
  return kOk;
}

int cmd_bench(const std::string& activation, const std::string& sizes, const std::string& out) {
  const auto rows = ashlab::harness::run_bench(activation, ashlab::harness::parse_sizes(sizes));
  const std::string csv = ashlab::harness::bench_csv(rows);
  std::cout << csv;
  std::cerr << ashlab::harness::bench_ratios(rows);
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << csv;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ashlab: adaptive Swish activation workbench"};
  app.require_subcommand(1);

  std::string fault;
  auto* verify = app.add_subcommand("verify", "run every property suite");
  verify->add_option("--inject-fault", fault, "deliberately break a backward rule (swish_backward)");

  double k = 0.0;
  auto* table = app.add_subcommand("table", "print the z value for the top k percent");
  table->add_option("--k", k, "percentage in (0, 100)")->required();

  std::string config_path, train_out;
  auto* train = app.add_subcommand("train", "train from an experiment config");
  train->add_option("--config", config_path, "experiment config JSON")->required();
  train->add_option("--out", train_out, "output directory (default: the config's)");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "train one model per activation and seed");
  compare->add_option("--activations", ca.activations, "comma-separated activation names")->required();
  compare->add_option("--dataset", ca.dataset, "two_moons|blobs|spirals[:n=,noise=,seed=] | idx:<img>,<lbl> | csv:<path>");
  compare->add_option("--seeds", ca.seeds, "number of seeds")->check(CLI::PositiveNumber);
  compare->add_option("--base-seed", ca.base_seed, "first seed");
  compare->add_option("--epochs", ca.epochs, "epochs per run");
  compare->add_option("--batch-size", ca.batch, "mini-batch size")->check(CLI::PositiveNumber);
  compare->add_option("--lr", ca.lr, "Adam learning rate");
  compare->add_option("--cut", ca.cut, "absolute val_loss cut for epochs-to-threshold");
  compare->add_option("--threads", ca.threads, "parallel runs")->check(CLI::PositiveNumber);
  compare->add_option("--out", ca.out, "output directory");

  std::string bench_act = "smooth_ash", bench_sizes = "1e4,1e5,1e6", bench_out;
  auto* bench = app.add_subcommand("bench", "activation forward vs exact top-k throughput");
  bench->add_option("--activation", bench_act, "activation name");
  bench->add_option("--sizes", bench_sizes, "comma-separated element counts");
  bench->add_option("--out", bench_out, "also write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*verify) return cmd_verify(fault);
    if (*table) return cmd_table(k);
    if (*train) return cmd_train(config_path, train_out);
    if (*compare) return cmd_compare(ca);
    if (*bench) return cmd_bench(bench_act, bench_sizes, bench_out);
  } catch (const ashlab::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const ashlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ashlab::FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

// Copyright 2026 The mrc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mrc: generate synthetic multi-rater data, train the three-branch model,
// evaluate it, and run the ablation grid.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mrc/error.hpp"
#include "mrc/experiment.hpp"
#include "mrc/report.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> ablation;
  std::optional<long long> n;
  std::optional<int> epochs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Flat key = value config file");
  cmd->add_option("--seed", f.seed, "Run seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--ablation", f.ablation, "baseline | multibr | conloss | uncerty | full");
  cmd->add_option("--n", f.n, "Number of samples to generate");
  cmd->add_option("--epochs", f.epochs, "Maximum training epochs");
}

// Defaults < config file < command-line flags.
mrc::ExperimentConfig resolve(const CommonFlags& f) {
  mrc::ExperimentConfig c;
  if (!f.config_path.empty()) c = mrc::load_config_file(f.config_path, c);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out_dir = *f.out;
  if (f.ablation) c.train.ablation = mrc::AblationFlags::from_name(*f.ablation);
  if (f.n) {
    if (*f.n < 1) throw mrc::ParameterError("--n must be >= 1");
    c.n_samples = static_cast<std::size_t>(*f.n);
  }
  if (f.epochs) {
    if (*f.epochs < 0) throw mrc::ParameterError("--epochs must be >= 0");
    c.train.max_epochs = *f.epochs;
  }
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-rater consensus classifier toolkit"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, eval_flags, abl_flags;
  auto* gen = app.add_subcommand("generate", "Simulate, grade and split a dataset");
  add_common(gen, gen_flags);

  auto* train = app.add_subcommand("train", "Train a model on generated data");
  add_common(train, train_flags);
  std::string data_dir;
  train->add_option("--data", data_dir, "Directory holding train.csv and val.csv")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset CSV");
  add_common(eval, eval_flags);
  std::string checkpoint, dataset;
  eval->add_option("--checkpoint", checkpoint, "checkpoint.json from `mrc train`")->required();
  eval->add_option("--dataset", dataset, "Dataset CSV, e.g. test.csv")->required();

  auto* abl = app.add_subcommand("ablation", "Run all five ablation arms over several seeds");
  add_common(abl, abl_flags);
  std::optional<std::size_t> seeds;
  abl->add_option("--seeds", seeds, "Number of seeds (default 5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const auto cfg = resolve(gen_flags);
      const auto manifest = mrc::cmd_generate(cfg);
      const auto& p = manifest["counts"]["all"]["proportions"];
      std::cout << "wrote " << cfg.out_dir.string() << "/{train,val,test}.csv\n"
                << "consensus+ " << p["consensus_positive"] << "  consensus- "
                << p["consensus_negative"] << "  non-consensus+ " << p["non_consensus_positive"]
                << "  non-consensus- " << p["non_consensus_negative"] << '\n';
      for (const auto& w : manifest["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    } else if (train->parsed()) {
      const auto cfg = resolve(train_flags);
      const auto result = mrc::cmd_train(cfg, data_dir);
      if (result.diverged) {
        std::cerr << "training diverged: " << result.message << '\n';
        return kExitRuntime;
      }
      std::cout << "trained " << cfg.train.ablation.name() << " for " << result.log.size()
                << " epochs; best val AUC " << result.best_val_auc << " at epoch "
                << result.best_epoch << "\nwrote " << cfg.out_dir.string() << "/checkpoint.json\n";
    } else if (eval->parsed()) {
      const auto cfg = resolve(eval_flags);
      const auto report = mrc::cmd_eval(cfg, checkpoint, dataset);
      std::cout << mrc::format_report_table(report);
    } else if (abl->parsed()) {
      auto cfg = resolve(abl_flags);
      if (seeds) {
        if (*seeds < 1) throw mrc::ParameterError("--seeds must be >= 1");
        cfg.ablation_seeds = *seeds;
      }
      const auto grid = mrc::cmd_ablation(cfg);
      std::cout << mrc::format_ablation_table(grid);
      for (const auto& arm : grid.arms) {
        if (arm.failed) return kExitRuntime;
      }
    }
  } catch (const mrc::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return EXIT_SUCCESS;
}

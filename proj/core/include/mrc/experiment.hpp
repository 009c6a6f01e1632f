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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrc/label_engine.hpp"
#include "mrc/metrics.hpp"
#include "mrc/model.hpp"
#include "mrc/rater_sim.hpp"
#include "mrc/trainer.hpp"

namespace mrc {

// Everything a run needs. Defaults reproduce the reference setup: 6,318
// samples, 60/15/25 split, batch 32, 50 epochs, lr 2e-4 halved every 15
// epochs, alpha 0.5, margin 1.
struct ExperimentConfig {
  std::size_t n_samples = 6318;
  std::size_t feature_dim = 64;
  double class_balance = 0.45;
  double difficulty_mix = 0.35;
  FeatureModel features;
  Panel panel = Panel::default_panel();
  SplitRatios split;

  std::vector<std::size_t> trunk_dims{64, 64, 64};
  std::size_t branch_dim = 32;
  TrainConfig train;
  double threshold = 0.5;

  std::uint64_t seed = 0;
  std::size_t ablation_seeds = 5;
  std::filesystem::path out_dir = "runs";

  void validate() const;
  ModelConfig model_config() const;
  nlohmann::json to_json() const;
};

// Sets one `key = value` entry (keys as in to_json, flattened with dots, e.g.
// `train.lr`, `panel.rater1.sensitivity`). Throws ParameterError on an
// unknown key or a malformed value.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

// Flat `key = value` text; `#` starts a comment.
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  ExperimentConfig base = {});

struct GeneratedData {
  DatasetSplit split;
  RaterWeights weights;
};

// Simulate, grade, split, weight and attach soft labels. Pure given config.
GeneratedData generate_data(const ExperimentConfig& config);

// Writes train.csv, val.csv, test.csv and manifest.json to config.out_dir.
nlohmann::json cmd_generate(const ExperimentConfig& config);

// Reads train.csv/val.csv from `data_dir`; writes checkpoint.json,
// train_log.jsonl and config.json to config.out_dir. The log is appended
// and flushed one epoch at a time.
FitResult cmd_train(const ExperimentConfig& config, const std::filesystem::path& data_dir);

// Writes report.json and report.txt to config.out_dir.
EvalReport cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                    const std::filesystem::path& dataset);

struct ArmResult {
  AblationFlags arm;
  std::vector<EvalReport> per_seed;
  bool failed = false;
  std::string error;
};

struct AblationGrid {
  std::vector<std::uint64_t> seeds;
  std::vector<ArmResult> arms;
};

// The five arms in table order.
std::vector<AblationFlags> ablation_arms();

// Trains and evaluates every arm on seeds config.seed, config.seed + 1, ...;
// each seed regenerates its own dataset.
AblationGrid run_ablation(const ExperimentConfig& config,
                          const std::vector<AblationFlags>& arms = ablation_arms());

// Table-layout label of an arm, e.g. "MultiBr + ConLoss".
std::string arm_label(const AblationFlags& arm);

nlohmann::json ablation_to_json(const AblationGrid& grid, const ExperimentConfig& config);
// Rows in table order; columns Acc, Sen, Spec, F1, AUC as mean ± sd (%) of
// the fusion branch on all test data.
std::string format_ablation_table(const AblationGrid& grid);

// Writes ablation.json and ablation.txt to config.out_dir.
AblationGrid cmd_ablation(const ExperimentConfig& config);

}  // namespace mrc

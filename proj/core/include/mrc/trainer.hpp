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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrc/label_engine.hpp"
#include "mrc/losses.hpp"
#include "mrc/model.hpp"
#include "mrc/rater_sim.hpp"

namespace mrc {

// Which parts of the multi-rater objective are active. With multi_branch off
// the other two flags have no effect and training is plain cross-entropy on
// the adjudicated labels.
struct AblationFlags {
  bool multi_branch = true;
  bool consensus_loss = true;
  bool uncertainty_weighting = true;

  // "baseline", "multibr", "conloss", "uncerty" or "full".
  static AblationFlags from_name(const std::string& name);
  std::string name() const;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  int max_epochs = 50;
  double lr = 2e-4;
  int lr_halving_period = 15;
  double alpha = 0.5;
  double margin = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  AblationFlags ablation;

  void validate() const;
  LossConfig loss_config() const { return {margin, alpha}; }
};

// Learning rate for a 1-based epoch: lr * 0.5^floor((epoch - 1) / period).
double learning_rate(const TrainConfig& config, int epoch);

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::int64_t step = 0;
};

struct TrainState {
  ModelParams params;
  AdamState adam;
  int epoch = 1;  // 1-based epoch currently being trained
  ModelParams best_params;
  double best_val_auc = -1.0;
  int best_epoch = 0;

  static TrainState initial(ModelParams params);
};

// Batch-mean loss terms of one step. `consensus` is the unweighted mean
// consensus loss; `total` is what the optimizer minimizes.
struct StepLosses {
  double sen = 0.0;
  double spec = 0.0;
  double fusion = 0.0;
  double consensus = 0.0;
  double total = 0.0;
};

// Per-batch gradient of the combined objective, without applying it.
struct BatchGradient {
  ModelParams grads;
  StepLosses losses;
};

BatchGradient compute_batch_gradient(const ModelParams& params, std::span<const Example* const> batch,
                                     const RaterWeights& weights, const TrainConfig& config,
                                     int epoch);

void adam_update(ModelParams& params, AdamState& adam, const ModelParams& grads, double lr,
                 const TrainConfig& config);

// One optimizer step on `batch` at the state's current epoch. Throws
// TrainingDiverged on a non-finite loss; the message includes a state dump.
StepLosses train_step(TrainState& state, std::span<const Example* const> batch,
                      const RaterWeights& weights, const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss_sen = 0.0;
  double loss_spec = 0.0;
  double loss_fusion = 0.0;
  double loss_consensus = 0.0;
  double val_auc = 0.0;  // NaN when undefined

  nlohmann::json to_json() const;
};

struct FitResult {
  ModelParams params;  // best by validation fusion AUC
  int best_epoch = 0;
  double best_val_auc = 0.0;
  std::vector<EpochLog> log;
  bool diverged = false;
  std::string message;
};

// Full training run. Rater weights come from the training split. `on_epoch`
// is called after each epoch's log record is complete.
FitResult fit(const Dataset& train, const Dataset& val, const ModelConfig& model_config,
              const TrainConfig& config,
              const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace mrc

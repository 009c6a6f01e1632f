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

#include <benchmark/benchmark.h>

#include <vector>

#include "mrc/label_engine.hpp"
#include "mrc/losses.hpp"
#include "mrc/metrics.hpp"
#include "mrc/model.hpp"
#include "mrc/rng.hpp"
#include "mrc/trainer.hpp"

namespace {

using namespace mrc;

Eigen::MatrixXd random_batch(std::size_t d, std::size_t n) {
  Rng rng(1);
  Eigen::MatrixXd x(d, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  return x;
}

void BM_ConsensusLoss(benchmark::State& state) {
  const ClassProbs a{0.3, 0.7}, b{0.6, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(consensus_loss(a, b, 0, 1.0));
}
BENCHMARK(BM_ConsensusLoss);

void BM_FusionLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<ClassProbs> pred(n), soft(n);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = 0.05 + 0.9 * rng.uniform(), q = 0.05 + 0.9 * rng.uniform();
    pred[i] = {1 - p, p};
    soft[i] = {1 - q, q};
    u[i] = 0.5 * rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(fusion_loss(pred, soft, u));
}
BENCHMARK(BM_FusionLoss)->Arg(32)->Arg(1024);

void BM_Forward(benchmark::State& state) {
  ModelConfig c;
  c.multi_branch = state.range(1) != 0;
  const auto params = init_params(c);
  const auto x = random_batch(c.input_dim, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(params, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Args({32, 1})->Args({32, 0})->Args({1024, 1});

void BM_ForwardBackward(benchmark::State& state) {
  ModelConfig c;
  const auto params = init_params(c);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_batch(c.input_dim, n);
  auto grads = OutputGrads::zeros(n);
  grads.sen.setConstant(0.1);
  grads.spec.setConstant(-0.1);
  grads.fusion.setConstant(0.05);
  for (auto _ : state) {
    const auto cache = forward_batch(params, x);
    benchmark::DoNotOptimize(backward(params, cache, grads));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  auto data = grade_dataset(generate_dataset(32, 64, 0.45, 0.35, 3), Panel::default_panel(), 3);
  const auto weights = compute_rater_weights(std::span<const Example>(data));
  assign_soft_labels(data, weights);
  std::vector<const Example*> batch;
  for (const auto& ex : data) batch.push_back(&ex);
  TrainConfig cfg;
  cfg.ablation = AblationFlags::from_name(state.range(0) ? "full" : "baseline");
  ModelConfig mc;
  mc.multi_branch = cfg.ablation.multi_branch;
  auto train = TrainState::initial(init_params(mc));
  for (auto _ : state) benchmark::DoNotOptimize(train_step(train, batch, weights, cfg));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<int>(i % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(scores, labels));
}
BENCHMARK(BM_RocAuc)->Arg(1580)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();

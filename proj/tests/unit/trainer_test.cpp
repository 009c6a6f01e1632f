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

#include "mrc/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "mrc/error.hpp"
#include "mrc/metrics.hpp"
#include "mrc/rng.hpp"

namespace mrc {
namespace {

Panel perfect_panel() {
  Panel p;
  p.stage1 = {{1, 1.0, 1.0}, {2, 1.0, 1.0}};
  p.adjudicator = {3, 1.0, 1.0};
  return p;
}

Dataset make_data(std::size_t n, std::size_t d, double mix, std::uint64_t seed,
                  const Panel& panel = Panel::default_panel()) {
  auto data = grade_dataset(generate_dataset(n, d, 0.45, mix, seed), panel, seed);
  assign_soft_labels(data, compute_rater_weights(std::span<const Example>(data)));
  return data;
}

std::vector<const Example*> pointers(const Dataset& data, std::size_t n) {
  std::vector<const Example*> out;
  for (std::size_t i = 0; i < std::min(n, data.size()); ++i) out.push_back(&data[i]);
  return out;
}

std::vector<double> flatten(const ModelParams& p) {
  std::vector<double> out;
  p.for_each_tensor([&](const std::string&, std::span<const double> v, std::size_t, std::size_t) {
    out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

ModelConfig small_model(std::size_t d, bool multi_branch, std::uint64_t seed) {
  ModelConfig c;
  c.input_dim = d;
  c.trunk_dims = {16, 16};
  c.branch_dim = 8;
  c.multi_branch = multi_branch;
  c.seed = seed;
  return c;
}

TEST(Ablation, NamesRoundTrip) {
  for (const char* name : {"baseline", "multibr", "conloss", "uncerty", "full"}) {
    EXPECT_EQ(AblationFlags::from_name(name).name(), name);
  }
  EXPECT_EQ(AblationFlags::from_name("baseline"), (AblationFlags{false, false, false}));
  EXPECT_EQ(AblationFlags::from_name("multibr"), (AblationFlags{true, false, false}));
  EXPECT_EQ(AblationFlags::from_name("full"), (AblationFlags{true, true, true}));
  EXPECT_THROW(AblationFlags::from_name("bogus"), ParameterError);
}

TEST(Schedule, HalvesEveryFifteenEpochs) {
  const TrainConfig cfg;
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 1), 2e-4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 15), 2e-4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 16), 1e-4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 30), 1e-4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 31), 2e-4 / 4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 31), 5e-5);
}

TEST(TrainConfig, RejectsBadValues) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.lr = -1;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.beta2 = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Fit, ZeroEpochsReturnsInitialParams) {
  const auto data = make_data(60, 4, 0.3, 1);
  TrainConfig cfg;
  cfg.max_epochs = 0;
  const auto mc = small_model(4, true, 5);
  const auto r = fit(data, data, mc, cfg);
  EXPECT_EQ(flatten(r.params), flatten(init_params(mc)));
  EXPECT_TRUE(r.log.empty());
}

TEST(Fit, DeterministicForFixedSeed) {
  const auto train = make_data(200, 6, 0.4, 2);
  const auto val = make_data(80, 6, 0.4, 3);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 11;
  const auto mc = small_model(6, true, 11);
  const auto a = fit(train, val, mc, cfg);
  const auto b = fit(train, val, mc, cfg);
  EXPECT_EQ(flatten(a.params), flatten(b.params));
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].loss_fusion, b.log[i].loss_fusion);
    EXPECT_EQ(a.log[i].val_auc, b.log[i].val_auc);
  }
}

TEST(TrainStep, IdenticalBatchGivesIdenticalParams) {
  const auto data = make_data(64, 6, 0.5, 4);
  const auto batch = pointers(data, 32);
  const auto weights = compute_rater_weights(std::span<const Example>(data));
  TrainConfig cfg;
  auto a = TrainState::initial(init_params(small_model(6, true, 3)));
  auto b = TrainState::initial(init_params(small_model(6, true, 3)));
  train_step(a, batch, weights, cfg);
  train_step(b, batch, weights, cfg);
  EXPECT_EQ(flatten(a.params), flatten(b.params));
  EXPECT_EQ(a.adam.step, 1);
}

TEST(TrainStep, LossDecreasesOnAFixedBatch) {
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = make_data(64, 8, 0.35, 100 + seed);
    const auto batch = pointers(data, 32);
    const auto weights = compute_rater_weights(std::span<const Example>(data));
    TrainConfig cfg;
    cfg.seed = seed;
    ModelConfig mc;
    mc.input_dim = 8;
    mc.seed = seed;
    auto state = TrainState::initial(init_params(mc));
    const double first = train_step(state, batch, weights, cfg).total;
    double last = first;
    for (int step = 1; step < 10; ++step) last = train_step(state, batch, weights, cfg).total;
    const double after = compute_batch_gradient(state.params, batch, weights, cfg, 1).losses.total;
    passed += after < first && last < first;
  }
  EXPECT_GE(passed, 4);
}

TEST(TrainStep, AblationSwitchesChangeTheLoss) {
  const auto data = make_data(64, 6, 0.6, 5);
  const auto batch = pointers(data, 64);
  const auto weights = compute_rater_weights(std::span<const Example>(data));
  auto params = init_params(small_model(6, true, 8));
  TrainConfig cfg;
  cfg.ablation = AblationFlags::from_name("multibr");
  const auto plain = compute_batch_gradient(params, batch, weights, cfg, 1).losses;
  cfg.ablation = AblationFlags::from_name("conloss");
  const auto con = compute_batch_gradient(params, batch, weights, cfg, 1).losses;
  EXPECT_EQ(plain.fusion, con.fusion);
  EXPECT_GT(con.sen, plain.sen);
  EXPECT_NEAR(con.sen - plain.sen, cfg.alpha * con.consensus, 1e-12);
  cfg.ablation = AblationFlags::from_name("uncerty");
  const auto unc = compute_batch_gradient(params, batch, weights, cfg, 1).losses;
  EXPECT_EQ(unc.sen, plain.sen);
  EXPECT_NE(unc.fusion, plain.fusion);
}

// A separately written single-head network: tanh layers, a linear classifier,
// softmax, mean cross-entropy on the final label and a scalar Adam.
class SingleHeadOracle {
 public:
  struct Layer {
    std::vector<std::vector<double>> w;  // out x in
    std::vector<double> b;
  };

  explicit SingleHeadOracle(const ModelParams& init) {
    auto copy = [](const DenseLayer& l) {
      Layer out;
      out.w.assign(l.out_dim(), std::vector<double>(l.in_dim()));
      for (std::size_t r = 0; r < l.out_dim(); ++r) {
        for (std::size_t c = 0; c < l.in_dim(); ++c) out.w[r][c] = l.weight(r, c);
      }
      out.b.assign(l.bias.data(), l.bias.data() + l.bias.size());
      return out;
    };
    for (const auto& l : init.trunk) layers_.push_back(copy(l));
    layers_.push_back(copy(init.fusion_features));
    layers_.push_back(copy(init.fusion_head));
    for (const auto& l : layers_) {
      m_.push_back(zeros(l));
      v_.push_back(zeros(l));
    }
  }

  void step(const std::vector<const Example*>& batch, double lr) {
    std::vector<Layer> grad;
    for (const auto& l : layers_) grad.push_back(zeros(l));
    const double n = static_cast<double>(batch.size());
    for (const auto* ex : batch) {
      std::vector<std::vector<double>> acts{ex->sample.features};
      for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& l = layers_[k];
        std::vector<double> z(l.b);
        for (std::size_t r = 0; r < z.size(); ++r) {
          for (std::size_t c = 0; c < acts.back().size(); ++c) z[r] += l.w[r][c] * acts.back()[c];
        }
        if (k + 1 < layers_.size()) {
          for (double& x : z) x = std::tanh(x);
        }
        acts.push_back(z);
      }
      const auto& logits = acts.back();
      const double mx = std::max(logits[0], logits[1]);
      const double e0 = std::exp(logits[0] - mx), e1 = std::exp(logits[1] - mx);
      std::vector<double> delta{e0 / (e0 + e1), e1 / (e0 + e1)};
      delta[ex->record.final_label] -= 1.0;
      for (double& d : delta) d /= n;

      for (std::size_t k = layers_.size(); k-- > 0;) {
        const auto& in = acts[k];
        for (std::size_t r = 0; r < delta.size(); ++r) {
          grad[k].b[r] += delta[r];
          for (std::size_t c = 0; c < in.size(); ++c) grad[k].w[r][c] += delta[r] * in[c];
        }
        if (k == 0) break;
        std::vector<double> prev(in.size(), 0.0);
        for (std::size_t c = 0; c < in.size(); ++c) {
          for (std::size_t r = 0; r < delta.size(); ++r) prev[c] += layers_[k].w[r][c] * delta[r];
          prev[c] *= 1.0 - in[c] * in[c];
        }
        delta = prev;
      }
    }

    ++t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
    auto adam = [&](double& p, double& m, double& v, double g) {
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      p -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
    };
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      for (std::size_t r = 0; r < layers_[k].w.size(); ++r) {
        for (std::size_t c = 0; c < layers_[k].w[r].size(); ++c) {
          adam(layers_[k].w[r][c], m_[k].w[r][c], v_[k].w[r][c], grad[k].w[r][c]);
        }
        adam(layers_[k].b[r], m_[k].b[r], v_[k].b[r], grad[k].b[r]);
      }
    }
  }

  std::vector<double> flat() const {
    std::vector<double> out;
    for (const auto& l : layers_) {
      for (const auto& row : l.w) out.insert(out.end(), row.begin(), row.end());
      out.insert(out.end(), l.b.begin(), l.b.end());
    }
    return out;
  }

 private:
  static Layer zeros(const Layer& l) {
    Layer z;
    z.w.assign(l.w.size(), std::vector<double>(l.w.front().size(), 0.0));
    z.b.assign(l.b.size(), 0.0);
    return z;
  }
  std::vector<Layer> layers_, m_, v_;
  int t_ = 0;
};

TEST(Baseline, MatchesSingleHeadOracleTrajectory) {
  const auto data = make_data(96, 5, 0.5, 6);
  const auto weights = compute_rater_weights(std::span<const Example>(data));
  ModelConfig mc;
  mc.input_dim = 5;
  mc.trunk_dims = {7};
  mc.branch_dim = 4;
  mc.multi_branch = false;
  mc.seed = 21;
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.ablation = AblationFlags::from_name("baseline");

  auto state = TrainState::initial(init_params(mc));
  SingleHeadOracle oracle(state.params);
  for (int step = 0; step < 30; ++step) {
    std::vector<const Example*> batch;
    for (std::size_t i = 0; i < 32; ++i) batch.push_back(&data[(step * 32 + i) % data.size()]);
    train_step(state, batch, weights, cfg);
    oracle.step(batch, cfg.lr);
    const auto got = flatten(state.params);
    const auto want = oracle.flat();
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_NEAR(got[i], want[i], 1e-10) << "step " << step << " param " << i;
    }
  }
}

TEST(Fit, SeparableToyReachesNearPerfectTrainAccuracy) {
  const auto train = make_data(400, 2, 0.0, 7, perfect_panel());
  const auto val = make_data(100, 2, 0.0, 8, perfect_panel());
  ModelConfig mc;
  mc.input_dim = 2;
  TrainConfig cfg;
  const auto r = fit(train, val, mc, cfg);
  ASSERT_FALSE(r.diverged);
  const auto report = evaluate(r.params, train);
  EXPECT_GE(report.at(BranchId::kFusion, Stratum::kAll)->confusion.acc, 0.99);
  EXPECT_NEAR(*report.at(BranchId::kFusion, Stratum::kAll)->auc, 1.0, 1e-9);
}

TEST(Fit, SelectsBestValidationEpoch) {
  const auto train = make_data(300, 6, 0.5, 9);
  const auto val = make_data(100, 6, 0.5, 10);
  TrainConfig cfg;
  cfg.max_epochs = 6;
  const auto r = fit(train, val, small_model(6, true, 0), cfg);
  ASSERT_EQ(r.log.size(), 6u);
  double best = -1;
  for (const auto& e : r.log) best = std::max(best, e.val_auc);
  EXPECT_EQ(r.best_val_auc, best);
  EXPECT_EQ(r.log[r.best_epoch - 1].val_auc, best);
}

TEST(TrainStep, NonFiniteLossRaisesWithState) {
  const auto data = make_data(8, 3, 0.5, 11);
  const auto weights = compute_rater_weights(std::span<const Example>(data));
  auto state = TrainState::initial(init_params(small_model(3, true, 1)));
  state.params.fusion_head.weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  try {
    train_step(state, pointers(data, 8), weights, cfg);
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
}

TEST(EpochLog, NonFiniteValuesSerializeAsNull) {
  EpochLog e;
  e.epoch = 2;
  e.val_auc = std::numeric_limits<double>::quiet_NaN();
  const auto j = e.to_json();
  EXPECT_TRUE(j["val_auc"].is_null());
  EXPECT_EQ(j["epoch"], 2);
}

}  // namespace
}  // namespace mrc

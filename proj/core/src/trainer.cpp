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

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mrc/error.hpp"
#include "mrc/metrics.hpp"
#include "mrc/rng.hpp"

namespace mrc {
namespace {

std::vector<std::span<double>> tensor_spans(ModelParams& p) {
  std::vector<std::span<double>> out;
  p.for_each_tensor([&](const std::string&, std::span<double> v, std::size_t, std::size_t) {
    out.push_back(v);
  });
  return out;
}

std::vector<std::span<const double>> tensor_spans(const ModelParams& p) {
  std::vector<std::span<const double>> out;
  p.for_each_tensor([&](const std::string&, std::span<const double> v, std::size_t,
                        std::size_t) { out.push_back(v); });
  return out;
}

Eigen::MatrixXd stack_features(std::span<const Example* const> batch) {
  const auto dim = static_cast<Eigen::Index>(batch.front()->sample.features.size());
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& f = batch[i]->sample.features;
    if (static_cast<Eigen::Index>(f.size()) != dim) {
      throw ParameterError("batch samples differ in feature dimension");
    }
    x.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(f.data(), dim);
  }
  return x;
}

double fusion_val_auc(const ModelParams& params, const Dataset& val) {
  if (val.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<const Example*> ptrs;
  for (const auto& ex : val) ptrs.push_back(&ex);
  const auto cache = forward_batch(params, stack_features(ptrs));
  std::vector<double> scores(val.size());
  std::vector<int> labels(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) {
    scores[i] = cache.fusion_probs(1, static_cast<Eigen::Index>(i));
    labels[i] = val[i].record.final_label;
  }
  try {
    return roc_auc(scores, labels);
  } catch (const UndefinedMetric&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::string dump_state(const TrainState& state, const StepLosses& l) {
  std::ostringstream os;
  os << "non-finite loss at epoch " << state.epoch << ", adam step " << state.adam.step
     << ": sen=" << l.sen << " spec=" << l.spec << " fusion=" << l.fusion
     << " consensus=" << l.consensus << " total=" << l.total
     << "; params finite=" << (all_finite(state.params) ? "yes" : "no")
     << "; best val auc=" << state.best_val_auc << " (epoch " << state.best_epoch << ")";
  return os.str();
}

}  // namespace

AblationFlags AblationFlags::from_name(const std::string& name) {
  if (name == "baseline") return {false, false, false};
  if (name == "multibr") return {true, false, false};
  if (name == "conloss") return {true, true, false};
  if (name == "uncerty") return {true, false, true};
  if (name == "full") return {true, true, true};
  throw ParameterError("unknown ablation '" + name +
                       "' (expected baseline, multibr, conloss, uncerty or full)");
}

std::string AblationFlags::name() const {
  if (!multi_branch) return "baseline";
  if (consensus_loss && uncertainty_weighting) return "full";
  if (consensus_loss) return "conloss";
  if (uncertainty_weighting) return "uncerty";
  return "multibr";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (max_epochs < 0) throw ParameterError("max_epochs must be >= 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ParameterError("lr must be > 0");
  if (lr_halving_period < 1) throw ParameterError("lr_halving_period must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw ParameterError("Adam betas must lie in [0, 1) and epsilon be > 0");
  }
  loss_config().validate();
}

double learning_rate(const TrainConfig& config, int epoch) {
  const int halvings = epoch < 1 ? 0 : (epoch - 1) / config.lr_halving_period;
  return std::ldexp(config.lr, -halvings);
}

TrainState TrainState::initial(ModelParams params) {
  TrainState s;
  s.adam.first_moment = params.zeros_like();
  s.adam.second_moment = params.zeros_like();
  s.best_params = params;
  s.params = std::move(params);
  return s;
}

BatchGradient compute_batch_gradient(const ModelParams& params,
                                     std::span<const Example* const> batch,
                                     const RaterWeights& weights, const TrainConfig& config,
                                     int epoch) {
  if (batch.empty()) throw ParameterError("train_step needs a non-empty batch");
  const auto cache = forward_batch(params, stack_features(batch));
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  auto grads = OutputGrads::zeros(n);
  StepLosses losses;
  if (!cache.fusion_probs.allFinite() || !cache.sen_probs.allFinite() ||
      !cache.spec_probs.allFinite()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    losses = {nan, nan, nan, nan, nan};
    return {params.zeros_like(), losses};
  }

  if (!config.ablation.multi_branch) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      const int label = batch[i]->record.final_label;
      const double p = cache.fusion_probs(label, c);
      losses.fusion += -std::log(std::max(p, kLogClamp)) * inv_n;
      if (p > kLogClamp) grads.fusion(label, c) = -inv_n / p;
    }
    losses.total = losses.fusion;
    return {backward(params, cache, grads), losses};
  }

  LossConfig branch_cfg = config.loss_config();
  if (!config.ablation.consensus_loss) branch_cfg.alpha = 0.0;

  std::vector<ClassProbs> fusion_preds(n);
  std::vector<ClassProbs> soft(n);
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = batch[i]->record;
    const auto out = cache.outputs(i);
    const auto labels = make_branch_labels(rec, weights, config.seed, epoch);

    const auto sen = branch_loss(out.y_sen, labels.sen_label, out.y_spec, rec.consensus, branch_cfg);
    const auto spec =
        branch_loss(out.y_spec, labels.spec_label, out.y_sen, rec.consensus, branch_cfg);
    const auto c = static_cast<Eigen::Index>(i);
    for (int j = 0; j < 2; ++j) {
      grads.sen(j, c) = (sen.grad_pred[j] + spec.grad_partner[j]) * inv_n;
      grads.spec(j, c) = (spec.grad_pred[j] + sen.grad_partner[j]) * inv_n;
    }
    losses.sen += sen.loss * inv_n;
    losses.spec += spec.loss * inv_n;
    losses.consensus +=
        consensus_loss(out.y_sen, out.y_spec, rec.consensus, config.margin).loss * inv_n;

    fusion_preds[i] = out.y_fusion;
    soft[i] = labels.fusion_soft;
    if (config.ablation.uncertainty_weighting) u[i] = out.uncertainty;
  }

  const auto fusion = fusion_loss(fusion_preds, soft, u);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 2; ++j) grads.fusion(j, static_cast<Eigen::Index>(i)) = fusion.grads[i][j];
  }
  losses.fusion = fusion.loss;
  losses.total = losses.sen + losses.spec + losses.fusion;
  return {backward(params, cache, grads), losses};
}

void adam_update(ModelParams& params, AdamState& adam, const ModelParams& grads, double lr,
                 const TrainConfig& config) {
  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);

  auto p = tensor_spans(params);
  auto m = tensor_spans(adam.first_moment);
  auto v = tensor_spans(adam.second_moment);
  const auto g = tensor_spans(grads);
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ContractViolation("adam_update: parameter, moment and gradient layouts differ");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size() != g[k].size()) throw ContractViolation("adam_update: tensor size mismatch");
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      m[k][i] = config.beta1 * m[k][i] + (1.0 - config.beta1) * g[k][i];
      v[k][i] = config.beta2 * v[k][i] + (1.0 - config.beta2) * g[k][i] * g[k][i];
      const double m_hat = m[k][i] / bias1;
      const double v_hat = v[k][i] / bias2;
      p[k][i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
  ++params.version;
}

StepLosses train_step(TrainState& state, std::span<const Example* const> batch,
                      const RaterWeights& weights, const TrainConfig& config) {
  auto step = compute_batch_gradient(state.params, batch, weights, config, state.epoch);
  if (!std::isfinite(step.losses.total)) throw TrainingDiverged(dump_state(state, step.losses));
  adam_update(state.params, state.adam, step.grads, learning_rate(config, state.epoch), config);
  return step.losses;
}

nlohmann::json EpochLog::to_json() const {
  const auto num = [](double x) -> nlohmann::json {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
  };
  return {{"epoch", epoch},
          {"lr", lr},
          {"loss_sen", num(loss_sen)},
          {"loss_spec", num(loss_spec)},
          {"loss_fusion", num(loss_fusion)},
          {"loss_consensus", num(loss_consensus)},
          {"val_auc", num(val_auc)}};
}

FitResult fit(const Dataset& train, const Dataset& val, const ModelConfig& model_config,
              const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  ModelConfig mc = model_config;
  mc.multi_branch = config.ablation.multi_branch;

  FitResult result;
  auto state = TrainState::initial(init_params(mc));
  if (config.max_epochs == 0 || train.empty()) {
    result.params = state.params;
    return result;
  }
  const auto weights = compute_rater_weights(std::span<const Example>(train));

  std::vector<const Example*> order;
  order.reserve(train.size());
  for (const auto& ex : train) order.push_back(&ex);

  bool selected = false;
  try {
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      state.epoch = epoch;
      Rng shuffle_rng(derive_seed(config.seed, {0x73687566ULL, static_cast<std::uint64_t>(epoch)}));
      shuffle_rng.shuffle(std::span(order));

      EpochLog rec;
      rec.epoch = epoch;
      rec.lr = learning_rate(config, epoch);
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t len = std::min(config.batch_size, order.size() - start);
        const std::span<const Example* const> batch(order.data() + start, len);
        const auto l = train_step(state, batch, weights, config);
        const double share = static_cast<double>(len) / static_cast<double>(order.size());
        rec.loss_sen += l.sen * share;
        rec.loss_spec += l.spec * share;
        rec.loss_fusion += l.fusion * share;
        rec.loss_consensus += l.consensus * share;
      }
      rec.val_auc = fusion_val_auc(state.params, val);
      if (std::isfinite(rec.val_auc) && rec.val_auc > state.best_val_auc) {
        state.best_val_auc = rec.val_auc;
        state.best_epoch = epoch;
        state.best_params = state.params;
        selected = true;
      }
      result.log.push_back(rec);
      if (on_epoch) on_epoch(rec);
    }
  } catch (const TrainingDiverged& e) {
    result.diverged = true;
    result.message = e.what();
  }

  result.params = selected ? state.best_params : state.params;
  result.best_epoch = selected ? state.best_epoch : static_cast<int>(result.log.size());
  result.best_val_auc = selected ? state.best_val_auc : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace mrc

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

#include "mrc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrc/error.hpp"

namespace mrc {

void LossConfig::validate() const {
  if (!(margin > 0.0) || !std::isfinite(margin)) throw ParameterError("margin must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be >= 0");
}

void require_probability_vector(const ClassProbs& p, const char* what) {
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ContractViolation(std::string(what) + ": probabilities must be finite and >= 0");
    }
  }
  if (std::abs(p[0] + p[1] - 1.0) > 1e-6) {
    throw ContractViolation(std::string(what) + ": probabilities must sum to 1");
  }
}

namespace {

void require_agreement_flag(int agree) {
  if (agree != 0 && agree != 1) throw ContractViolation("consensus flag must be 0 or 1");
}

}  // namespace

namespace raw {

ConsensusLoss consensus_loss(const ClassProbs& y_sen, const ClassProbs& y_spec, int agree,
                             double margin) {
  const ClassProbs delta{y_sen[0] - y_spec[0], y_sen[1] - y_spec[1]};
  const double dist_sq = delta[0] * delta[0] + delta[1] * delta[1];

  ConsensusLoss out;
  if (agree == 1) {
    out.loss = 0.5 * dist_sq;
    out.grad_sen = delta;
    out.grad_spec = {-delta[0], -delta[1]};
    return out;
  }
  const double dist = std::sqrt(dist_sq);
  const double hinge = margin - dist;
  if (hinge <= 0.0) return out;
  out.loss = 0.5 * hinge * hinge;
  if (dist > 0.0) {
    const double scale = -hinge / dist;
    out.grad_sen = {scale * delta[0], scale * delta[1]};
    out.grad_spec = {-scale * delta[0], -scale * delta[1]};
  }
  return out;
}

BranchLoss branch_loss(const ClassProbs& pred, int label, const ClassProbs& partner, int agree,
                       const LossConfig& config) {
  BranchLoss out;
  const double p = pred[label];
  out.cross_entropy = -std::log(std::max(p, kLogClamp));
  if (p > kLogClamp) out.grad_pred[label] = -1.0 / p;

  if (config.alpha != 0.0) {
    const auto con = consensus_loss(pred, partner, agree, config.margin);
    out.consensus = con.loss;
    for (int j = 0; j < 2; ++j) {
      out.grad_pred[j] += config.alpha * con.grad_sen[j];
      out.grad_partner[j] = config.alpha * con.grad_spec[j];
    }
  }
  out.loss = out.cross_entropy + config.alpha * out.consensus;
  return out;
}

FusionLoss fusion_loss(std::span<const ClassProbs> preds, std::span<const ClassProbs> soft,
                       std::span<const double> u) {
  const std::size_t n = preds.size();
  if (n == 0) throw ParameterError("fusion_loss needs at least one sample");
  if (soft.size() != n || u.size() != n) {
    throw ParameterError("fusion_loss: predictions, soft labels and uncertainties differ in length");
  }
  double weight_sum = 0.0;
  for (double ui : u) weight_sum += 1.0 + ui;

  FusionLoss out;
  out.grads.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (1.0 + u[i]) / weight_sum;
    for (int j = 0; j < 2; ++j) {
      const double y = soft[i][j];
      const double p = preds[i][j];
      if (y > 0.0) out.loss += w * y * (std::log(y) - std::log(std::max(p, kLogClamp)));
      if (p > kLogClamp) out.grads[i][j] = -w * y / p;
    }
  }
  return out;
}

}  // namespace raw

ConsensusLoss consensus_loss(const ClassProbs& y_sen, const ClassProbs& y_spec, int agree,
                             double margin) {
  require_probability_vector(y_sen, "consensus_loss y_sen");
  require_probability_vector(y_spec, "consensus_loss y_spec");
  require_agreement_flag(agree);
  if (!(margin > 0.0)) throw ParameterError("margin must be > 0");
  return raw::consensus_loss(y_sen, y_spec, agree, margin);
}

double uncertainty(const ClassProbs& y_sen, const ClassProbs& y_spec) {
  const double na = std::hypot(y_sen[0], y_sen[1]);
  const double nb = std::hypot(y_spec[0], y_spec[1]);
  if (!(na > 0.0) || !(nb > 0.0)) throw ContractViolation("uncertainty of a zero vector");
  if (y_sen == y_spec) return 0.0;
  const double cosine = (y_sen[0] * y_spec[0] + y_sen[1] * y_spec[1]) / (na * nb);
  return 0.5 * (1.0 - std::clamp(cosine, -1.0, 1.0));
}

BranchLoss branch_loss(const ClassProbs& pred, int label, const ClassProbs& partner, int agree,
                       const LossConfig& config) {
  require_probability_vector(pred, "branch_loss prediction");
  require_probability_vector(partner, "branch_loss partner");
  if (!is_binary(label)) throw ContractViolation("branch_loss label must be 0 or 1");
  require_agreement_flag(agree);
  config.validate();
  return raw::branch_loss(pred, label, partner, agree, config);
}

FusionLoss fusion_loss(std::span<const ClassProbs> preds, std::span<const ClassProbs> soft,
                       std::span<const double> u) {
  if (preds.size() != soft.size() || preds.size() != u.size()) {
    throw ParameterError("fusion_loss: predictions, soft labels and uncertainties differ in length");
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require_probability_vector(preds[i], "fusion_loss prediction");
    require_probability_vector(soft[i], "fusion_loss soft label");
    if (!(u[i] >= 0.0 && u[i] <= 0.5)) throw ContractViolation("fusion_loss: u must lie in [0, 0.5]");
  }
  return raw::fusion_loss(preds, soft, u);
}

}  // namespace mrc

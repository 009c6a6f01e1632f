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

#include <span>
#include <vector>

#include "mrc/types.hpp"

namespace mrc {

inline constexpr double kLogClamp = 1e-12;

struct LossConfig {
  double margin = 1.0;
  double alpha = 0.5;

  void validate() const;
};

struct ConsensusLoss {
  double loss = 0.0;
  ClassProbs grad_sen{};
  ClassProbs grad_spec{};
};

// Contrastive agreement penalty between the sensitivity and specificity
// outputs:
//   agree=1:  0.5 * |d|^2
//   agree=0:  0.5 * max(0, margin - |d|)^2,     d = y_sen - y_spec.
// The gradient is zero on the hinge's flat region, at |d| = margin and at
// d = 0 (where the direction is undefined).
ConsensusLoss consensus_loss(const ClassProbs& y_sen, const ClassProbs& y_spec, int agree,
                             double margin);

// 0.5 * (1 - cos(y_sen, y_spec)); in [0, 0.5] for probability vectors. Used
// as a constant sample weight, so no gradient is provided.
double uncertainty(const ClassProbs& y_sen, const ClassProbs& y_spec);

struct BranchLoss {
  double loss = 0.0;
  double cross_entropy = 0.0;
  double consensus = 0.0;  // unweighted consensus term
  ClassProbs grad_pred{};
  ClassProbs grad_partner{};
};

// -log(pred[label]) + alpha * consensus_loss(pred, partner, agree, margin).
// `pred` takes the role of y_sen and `partner` of y_spec; the loss is
// symmetric in the two so the same call serves the specificity branch.
BranchLoss branch_loss(const ClassProbs& pred, int label, const ClassProbs& partner, int agree,
                       const LossConfig& config);

struct FusionLoss {
  double loss = 0.0;
  std::vector<ClassProbs> grads;  // d loss / d pred_i
};

// Uncertainty-weighted KL(soft || pred):
//   sum_i (1 + u_i) * sum_j soft_ij * (log soft_ij - log pred_ij) / sum_i (1 + u_i)
FusionLoss fusion_loss(std::span<const ClassProbs> preds, std::span<const ClassProbs> soft,
                       std::span<const double> u);

// Unchecked formulas. They accept any strictly positive vectors, which the
// finite-difference tests need because perturbed inputs leave the simplex.
namespace raw {

ConsensusLoss consensus_loss(const ClassProbs& y_sen, const ClassProbs& y_spec, int agree,
                             double margin);
BranchLoss branch_loss(const ClassProbs& pred, int label, const ClassProbs& partner, int agree,
                       const LossConfig& config);
FusionLoss fusion_loss(std::span<const ClassProbs> preds, std::span<const ClassProbs> soft,
                       std::span<const double> u);

}  // namespace raw

// Throws ContractViolation unless `p` is nonnegative and sums to one within
// 1e-6.
void require_probability_vector(const ClassProbs& p, const char* what);

}  // namespace mrc

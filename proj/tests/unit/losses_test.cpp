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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mrc/error.hpp"
#include "mrc/rng.hpp"
#include "oracles.hpp"

namespace mrc {
namespace {

using testing::random_probs;
using testing::relative_error;

constexpr double kStep = 1e-5;
constexpr double kRelTol = 1e-4;

TEST(ConsensusLoss, AgreeingIdenticalOutputsCostNothing) {
  const auto r = consensus_loss({0.3, 0.7}, {0.3, 0.7}, 1, 1.0);
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.grad_sen[0], 0.0);
  EXPECT_EQ(r.grad_spec[1], 0.0);
}

TEST(ConsensusLoss, DisagreeingIdenticalOutputsCostHalfMarginSquared) {
  const ClassProbs y{0.4, 0.6};
  EXPECT_DOUBLE_EQ(testing::consensus_loss_oracle(y, y, 0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(consensus_loss(y, y, 0, 1.0).loss, 0.5);
}

TEST(ConsensusLoss, DistanceBeyondMarginCostsNothing) {
  EXPECT_EQ(testing::consensus_loss_oracle({1, 0}, {0, 1}, 0, 1.0), 0.0);
  EXPECT_EQ(consensus_loss({1, 0}, {0, 1}, 0, 1.0).loss, 0.0);
}

TEST(ConsensusLoss, RejectsInvalidInputs) {
  EXPECT_THROW(consensus_loss({0.5, 0.6}, {0.5, 0.5}, 1, 1.0), ContractViolation);
  EXPECT_THROW(consensus_loss({0.5, 0.5}, {0.5, 0.5}, 2, 1.0), ContractViolation);
  EXPECT_THROW(consensus_loss({0.5, 0.5}, {0.5, 0.5}, 1, 0.0), ParameterError);
}

TEST(ConsensusLoss, MatchesOracleAndIsNonNegative) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_probs(rng, 0.0);
    const auto b = random_probs(rng, 0.0);
    const int agree = static_cast<int>(rng.index(2));
    const double margin = 0.25 + 1.5 * rng.uniform();
    const double got = consensus_loss(a, b, agree, margin).loss;
    EXPECT_NEAR(got, testing::consensus_loss_oracle(a, b, agree, margin), 1e-9);
    EXPECT_GE(got, 0.0);
  }
}

TEST(ConsensusLoss, ZeroOnlyInDocumentedCases) {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_probs(rng, 0.0);
    const auto b = random_probs(rng, 0.0);
    const double dist = std::hypot(a[0] - b[0], a[1] - b[1]);
    if (dist > 0) {
      EXPECT_GT(consensus_loss(a, b, 1, 1.0).loss, 0.0);
    }
    const double margin = 0.5;
    EXPECT_EQ(consensus_loss(a, b, 0, margin).loss == 0.0, dist >= margin);
  }
}

TEST(ConsensusLoss, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  int checked = 0;
  while (checked < 100) {
    const auto a = random_probs(rng);
    const auto b = random_probs(rng);
    const int agree = static_cast<int>(rng.index(2));
    const double margin = 1.0;
    const double dist = std::hypot(a[0] - b[0], a[1] - b[1]);
    if (std::abs(dist - margin) < 1e-3 || dist < 1e-3) continue;
    const auto r = raw::consensus_loss(a, b, agree, margin);
    for (int j = 0; j < 2; ++j) {
      const double ns = testing::central_difference(
          [&](double x) {
            ClassProbs p = a;
            p[j] = x;
            return raw::consensus_loss(p, b, agree, margin).loss;
          },
          a[j], kStep);
      const double np = testing::central_difference(
          [&](double x) {
            ClassProbs p = b;
            p[j] = x;
            return raw::consensus_loss(a, p, agree, margin).loss;
          },
          b[j], kStep);
      EXPECT_LT(relative_error(r.grad_sen[j], ns), kRelTol);
      EXPECT_LT(relative_error(r.grad_spec[j], np), kRelTol);
    }
    ++checked;
  }
}

TEST(Uncertainty, KnownValues) {
  EXPECT_NEAR(uncertainty({0.3, 0.7}, {0.3, 0.7}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(uncertainty({1, 0}, {0, 1}), 0.5);
  const double expected = 0.5 * (1.0 - 1.0 / std::sqrt(2.0));
  EXPECT_NEAR(testing::uncertainty_oracle({0.5, 0.5}, {1, 0}), 0.14645, 5e-6);
  EXPECT_NEAR(uncertainty({0.5, 0.5}, {1, 0}), expected, 1e-12);
}

TEST(Uncertainty, BoundedAndMatchesOracle) {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_probs(rng, 0.0);
    const auto b = random_probs(rng, 0.0);
    const double u = uncertainty(a, b);
    EXPECT_GE(u, 0.0);
    EXPECT_LE(u, 0.5);
    EXPECT_NEAR(u, testing::uncertainty_oracle(a, b), 1e-9);
  }
}

TEST(BranchLoss, WorkedExample) {
  const ClassProbs pred{0.2, 0.8};
  const auto r = branch_loss(pred, 1, pred, 0, {1.0, 0.5});
  const double oracle = testing::cross_entropy_oracle(pred, 1) +
                        0.5 * testing::consensus_loss_oracle(pred, pred, 0, 1.0);
  EXPECT_NEAR(oracle, 0.47314, 5e-6);
  EXPECT_NEAR(r.loss, oracle, 1e-12);
  EXPECT_NEAR(r.cross_entropy, -std::log(0.8), 1e-15);
  EXPECT_DOUBLE_EQ(r.consensus, 0.5);
}

TEST(BranchLoss, PerfectAgreeingPredictionIsNearZero) {
  const ClassProbs pred{0.0, 1.0};
  EXPECT_NEAR(branch_loss(pred, 1, pred, 1, {}).loss, 0.0, 1e-12);
}

TEST(BranchLoss, ZeroAlphaIsCrossEntropy) {
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_probs(rng, 0.0);
    const auto q = random_probs(rng, 0.0);
    const int label = static_cast<int>(rng.index(2));
    const auto r = branch_loss(p, label, q, static_cast<int>(rng.index(2)), {1.0, 0.0});
    EXPECT_EQ(r.loss, r.cross_entropy);
    EXPECT_NEAR(r.loss, testing::cross_entropy_oracle(p, label), 1e-12);
    EXPECT_EQ(r.grad_partner[0], 0.0);
    EXPECT_EQ(r.grad_partner[1], 0.0);
  }
}

TEST(BranchLoss, GradientMatchesFiniteDifferences) {
  Rng rng(16);
  int checked = 0;
  while (checked < 100) {
    const auto p = random_probs(rng);
    const auto q = random_probs(rng);
    const int label = static_cast<int>(rng.index(2));
    const int agree = static_cast<int>(rng.index(2));
    const LossConfig cfg{1.0, 0.5};
    const double dist = std::hypot(p[0] - q[0], p[1] - q[1]);
    if (std::abs(dist - cfg.margin) < 1e-3 || dist < 1e-3) continue;
    const auto r = raw::branch_loss(p, label, q, agree, cfg);
    for (int j = 0; j < 2; ++j) {
      const double np = testing::central_difference(
          [&](double x) {
            ClassProbs v = p;
            v[j] = x;
            return raw::branch_loss(v, label, q, agree, cfg).loss;
          },
          p[j], kStep);
      const double nq = testing::central_difference(
          [&](double x) {
            ClassProbs v = q;
            v[j] = x;
            return raw::branch_loss(p, label, v, agree, cfg).loss;
          },
          q[j], kStep);
      EXPECT_LT(relative_error(r.grad_pred[j], np), kRelTol);
      EXPECT_LT(relative_error(r.grad_partner[j], nq), kRelTol);
    }
    ++checked;
  }
}

TEST(FusionLoss, WorkedExample) {
  const std::vector<ClassProbs> soft{{0.99, 0.01}, {0.5, 0.5}};
  const std::vector<ClassProbs> pred{{0.9, 0.1}, {0.5, 0.5}};
  const std::vector<double> u{0.5, 0.0};
  const double kl1 = 0.99 * std::log(0.99 / 0.9) + 0.01 * std::log(0.01 / 0.1);
  const double oracle = testing::fusion_loss_oracle(pred, soft, u);
  EXPECT_NEAR(oracle, 1.5 * kl1 / 2.5, 1e-15);
  EXPECT_NEAR(oracle, 0.042799, 1e-6);
  EXPECT_NEAR(fusion_loss(pred, soft, u).loss, oracle, 1e-12);
}

TEST(FusionLoss, ZeroUncertaintyIsMeanKl) {
  Rng rng(17);
  std::vector<ClassProbs> pred, soft;
  std::vector<double> u(8, 0.0);
  double mean_kl = 0;
  for (int i = 0; i < 8; ++i) {
    pred.push_back(random_probs(rng));
    soft.push_back(random_probs(rng));
    mean_kl += testing::fusion_loss_oracle({pred.back()}, {soft.back()}, {0.0}) / 8.0;
  }
  EXPECT_NEAR(fusion_loss(pred, soft, u).loss, mean_kl, 1e-12);
}

TEST(FusionLoss, ZeroIffPredictionsMatchTargets) {
  Rng rng(18);
  std::vector<ClassProbs> soft;
  std::vector<double> u;
  for (int i = 0; i < 6; ++i) {
    soft.push_back(random_probs(rng));
    u.push_back(0.5 * rng.uniform());
  }
  EXPECT_NEAR(fusion_loss(soft, soft, u).loss, 0.0, 1e-15);
  auto pred = soft;
  pred[3] = {pred[3][0] - 0.01, pred[3][1] + 0.01};
  EXPECT_GT(fusion_loss(pred, soft, u).loss, 0.0);
}

TEST(FusionLoss, MatchesOracleAndIsNonNegative) {
  Rng rng(19);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(12);
    std::vector<ClassProbs> pred, soft;
    std::vector<double> u;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(random_probs(rng, 1e-4));
      soft.push_back(random_probs(rng, 0.01));
      u.push_back(0.5 * rng.uniform());
    }
    const double got = fusion_loss(pred, soft, u).loss;
    EXPECT_NEAR(got, testing::fusion_loss_oracle(pred, soft, u), 1e-9);
    EXPECT_GE(got, 0.0);
  }
}

TEST(FusionLoss, GradientMatchesFiniteDifferences) {
  Rng rng(20);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(6);
    std::vector<ClassProbs> pred, soft;
    std::vector<double> u;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(random_probs(rng));
      soft.push_back(random_probs(rng, 0.01));
      u.push_back(0.5 * rng.uniform());
    }
    const auto r = raw::fusion_loss(pred, soft, u);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double num = testing::central_difference(
            [&](double x) {
              auto p = pred;
              p[i][j] = x;
              return raw::fusion_loss(p, soft, u).loss;
            },
            pred[i][j], kStep);
        EXPECT_LT(relative_error(r.grads[i][j], num), kRelTol);
      }
    }
  }
}

TEST(FusionLoss, RaisingUncertaintyRaisesShareOfGradient) {
  const std::vector<ClassProbs> soft{{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}};
  const std::vector<ClassProbs> pred{{0.3, 0.7}, {0.4, 0.6}, {0.5, 0.5}};
  auto share = [&](double u0) {
    const std::vector<double> u{u0, 0.1, 0.2};
    const auto r = fusion_loss(pred, soft, u);
    double total = 0;
    for (const auto& g : r.grads) total += std::hypot(g[0], g[1]);
    return std::hypot(r.grads[0][0], r.grads[0][1]) / total;
  };
  double prev = share(0.0);
  for (double u0 = 0.05; u0 <= 0.5; u0 += 0.05) {
    const double cur = share(u0);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(FusionLoss, RejectsMismatchedInputs) {
  const std::vector<ClassProbs> two{{0.5, 0.5}, {0.5, 0.5}};
  const std::vector<ClassProbs> one{{0.5, 0.5}};
  const std::vector<double> u{0.0, 0.0};
  EXPECT_THROW(fusion_loss(two, one, u), ParameterError);
  EXPECT_THROW(fusion_loss({}, {}, {}), ParameterError);
  const std::vector<double> bad_u{0.0, 0.7};
  EXPECT_THROW(fusion_loss(two, two, bad_u), ContractViolation);
}

}  // namespace
}  // namespace mrc

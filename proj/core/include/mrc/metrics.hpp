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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "mrc/model.hpp"
#include "mrc/rater_sim.hpp"

namespace mrc {

// Acc/Sen/Spec/F1 from a confusion matrix. A ratio whose denominator is zero
// is reported as 0 with its `*_defined` flag cleared.
struct ConfusionMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double acc = 0.0;
  double sen = 0.0;
  double spec = 0.0;
  double f1 = 0.0;
  bool sen_defined = true;
  bool spec_defined = true;
  bool f1_defined = true;
};

ConfusionMetrics confusion_metrics(std::span<const int> predictions, std::span<const int> labels);

// Mann-Whitney AUC: P(score+ > score-) + 0.5 * P(tie). Throws UndefinedMetric
// unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

enum class BranchId { kSen = 0, kSpec = 1, kFusion = 2 };
enum class Stratum { kConsensus = 0, kNonConsensus = 1, kAll = 2 };

inline constexpr std::array<BranchId, 3> kBranches{BranchId::kSen, BranchId::kSpec,
                                                   BranchId::kFusion};
inline constexpr std::array<Stratum, 3> kStrata{Stratum::kConsensus, Stratum::kNonConsensus,
                                                Stratum::kAll};

std::string to_string(BranchId branch);
std::string to_string(Stratum stratum);

struct BranchStratumMetrics {
  ConfusionMetrics confusion;
  std::optional<double> auc;  // absent when the stratum lacks a class
};

struct StratumSummary {
  std::size_t count = 0;
  std::optional<double> mean_uncertainty;
  // Absent when the stratum is empty.
  std::array<std::optional<BranchStratumMetrics>, 3> branches;
};

struct EvalReport {
  double threshold = 0.5;
  bool multi_branch = true;
  std::array<StratumSummary, 3> strata;

  const StratumSummary& stratum(Stratum s) const { return strata[static_cast<int>(s)]; }
  const std::optional<BranchStratumMetrics>& at(BranchId b, Stratum s) const {
    return stratum(s).branches[static_cast<int>(b)];
  }
};

// Metrics are computed against final_label. Each branch's positive-class
// probability is thresholded at `threshold`.
EvalReport evaluate(const ModelParams& params, std::span<const Example> data,
                    double threshold = 0.5);

}  // namespace mrc

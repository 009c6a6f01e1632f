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

#include "mrc/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "mrc/error.hpp"
#include "mrc/types.hpp"

namespace mrc {
namespace {

double ratio(std::size_t num, std::size_t den, bool& defined) {
  defined = den > 0;
  return defined ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

ConfusionMetrics confusion_metrics(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ParameterError("confusion_metrics: predictions and labels differ in length");
  }
  if (labels.empty()) throw ParameterError("confusion_metrics needs at least one sample");
  ConfusionMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!is_binary(predictions[i]) || !is_binary(labels[i])) {
      throw ParameterError("confusion_metrics: labels must be 0 or 1");
    }
    if (labels[i] == 1) {
      (predictions[i] == 1 ? m.tp : m.fn)++;
    } else {
      (predictions[i] == 1 ? m.fp : m.tn)++;
    }
  }
  m.acc = static_cast<double>(m.tp + m.tn) / static_cast<double>(labels.size());
  m.sen = ratio(m.tp, m.tp + m.fn, m.sen_defined);
  m.spec = ratio(m.tn, m.tn + m.fp, m.spec_defined);
  m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn, m.f1_defined);
  return m;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ParameterError("roc_auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives; tied groups share their average rank.
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (!is_binary(labels[order[k]])) throw ParameterError("roc_auc: labels must be 0 or 1");
      if (labels[order[k]] == 1) {
        positive_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("roc_auc needs both classes");
  const double p = static_cast<double>(n_pos);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(n_neg));
}

std::string to_string(BranchId branch) {
  switch (branch) {
    case BranchId::kSen: return "sen";
    case BranchId::kSpec: return "spec";
    case BranchId::kFusion: return "fusion";
  }
  return "?";
}

std::string to_string(Stratum stratum) {
  switch (stratum) {
    case Stratum::kConsensus: return "consensus";
    case Stratum::kNonConsensus: return "non_consensus";
    case Stratum::kAll: return "all";
  }
  return "?";
}

EvalReport evaluate(const ModelParams& params, std::span<const Example> data, double threshold) {
  EvalReport report;
  report.threshold = threshold;
  report.multi_branch = params.multi_branch;
  if (data.empty()) return report;

  const auto dim = static_cast<Eigen::Index>(params.input_dim());
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& f = data[i].sample.features;
    if (static_cast<Eigen::Index>(f.size()) != dim) {
      throw ParameterError("evaluate: sample feature dimension does not match the model");
    }
    x.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(f.data(), dim);
  }
  const auto cache = forward_batch(params, x);

  for (Stratum stratum : kStrata) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int a = data[i].record.consensus;
      if (stratum == Stratum::kAll || (stratum == Stratum::kConsensus) == (a == 1)) {
        rows.push_back(i);
      }
    }
    auto& summary = report.strata[static_cast<int>(stratum)];
    summary.count = rows.size();
    if (rows.empty()) continue;

    std::vector<int> labels;
    double u_sum = 0.0;
    for (std::size_t i : rows) {
      labels.push_back(data[i].record.final_label);
      u_sum += cache.outputs(i).uncertainty;
    }
    summary.mean_uncertainty = u_sum / static_cast<double>(rows.size());

    for (BranchId branch : kBranches) {
      const Eigen::MatrixXd& probs = branch == BranchId::kSen    ? cache.sen_probs
                                     : branch == BranchId::kSpec ? cache.spec_probs
                                                                 : cache.fusion_probs;
      std::vector<double> scores;
      std::vector<int> predictions;
      for (std::size_t i : rows) {
        const double p = probs(1, static_cast<Eigen::Index>(i));
        scores.push_back(p);
        predictions.push_back(p >= threshold ? 1 : 0);
      }
      BranchStratumMetrics m;
      m.confusion = confusion_metrics(predictions, labels);
      try {
        m.auc = roc_auc(scores, labels);
      } catch (const UndefinedMetric&) {
        m.auc.reset();
      }
      summary.branches[static_cast<int>(branch)] = m;
    }
  }
  return report;
}

}  // namespace mrc

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

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mrc/rater_sim.hpp"
#include "mrc/types.hpp"

namespace mrc {

inline constexpr double kSoftLabelMin = 0.01;
inline constexpr double kSoftLabelMax = 0.99;
inline constexpr double kRaterWeightFloor = 1e-6;

// Per-rater fusion weight: accuracy of the rater against the adjudicated
// label on the training split.
struct RaterWeights {
  std::map<int, double> weights;
  // Roster ids that graded nothing and therefore received no weight.
  std::vector<int> excluded;

  bool contains(int rater_id) const { return weights.contains(rater_id); }
  // Throws DataError for unknown ids.
  double at(int rater_id) const;
};

// w_i = (#labels of rater i equal to final_label) / (#labels of rater i),
// floored at kRaterWeightFloor. Ids listed in `roster` that never appear are
// reported in `excluded`.
RaterWeights compute_rater_weights(std::span<const GradingRecord> records,
                                   std::span<const int> roster = {});
RaterWeights compute_rater_weights(std::span<const Example> data, std::span<const int> roster = {});

// Accuracy-weighted mean of all raw labels (adjudicator included), clipped to
// [0.01, 0.99], returned as (1 - y, y).
ClassProbs soft_label(const GradingRecord& record, const RaterWeights& weights);

// Rewrites record.soft_label for every example.
void assign_soft_labels(std::span<Example> data, const RaterWeights& weights);

enum class Branch { kSen, kSpec };

// Exact probability that sample_branch_label returns 1: positives are doubled
// in the SEN pool, negatives in the SPEC pool.
double branch_positive_probability(const GradingRecord& record, Branch branch);

// Uniform draw from the branch's label pool, seeded by (seed, sample_id,
// epoch, branch).
int sample_branch_label(const GradingRecord& record, Branch branch, std::uint64_t seed,
                        std::int64_t epoch);

struct BranchLabels {
  int sen_label = 0;
  int spec_label = 0;
  ClassProbs fusion_soft{0.5, 0.5};
  int consensus = 1;
};

BranchLabels make_branch_labels(const GradingRecord& record, const RaterWeights& weights,
                                std::uint64_t seed, std::int64_t epoch);

}  // namespace mrc

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

#include "mrc/label_engine.hpp"

#include <algorithm>
#include <vector>

#include "mrc/error.hpp"
#include "mrc/rng.hpp"

namespace mrc {

double RaterWeights::at(int rater_id) const {
  const auto it = weights.find(rater_id);
  if (it == weights.end()) {
    throw DataError("no fusion weight for rater " + std::to_string(rater_id));
  }
  return it->second;
}

RaterWeights compute_rater_weights(std::span<const GradingRecord> records,
                                   std::span<const int> roster) {
  struct Tally {
    std::size_t correct = 0;
    std::size_t total = 0;
  };
  std::map<int, Tally> tallies;
  for (const auto& rec : records) {
    for (const auto& r : rec.raw_labels()) {
      auto& t = tallies[r.rater_id];
      ++t.total;
      if (r.label == rec.final_label) ++t.correct;
    }
  }

  RaterWeights out;
  for (const auto& [id, t] : tallies) {
    const double acc = static_cast<double>(t.correct) / static_cast<double>(t.total);
    out.weights[id] = std::max(acc, kRaterWeightFloor);
  }
  for (int id : roster) {
    if (!tallies.contains(id)) out.excluded.push_back(id);
  }
  return out;
}

RaterWeights compute_rater_weights(std::span<const Example> data, std::span<const int> roster) {
  std::vector<GradingRecord> records;
  records.reserve(data.size());
  for (const auto& ex : data) records.push_back(ex.record);
  return compute_rater_weights(std::span<const GradingRecord>(records), roster);
}

ClassProbs soft_label(const GradingRecord& record, const RaterWeights& weights) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& r : record.raw_labels()) {
    const double w = weights.at(r.rater_id);
    num += w * r.label;
    den += w;
  }
  if (!(den > 0.0)) throw DataError("record " + std::to_string(record.sample_id) + " has no labels");
  const double y = std::clamp(num / den, kSoftLabelMin, kSoftLabelMax);
  return {1.0 - y, y};
}

void assign_soft_labels(std::span<Example> data, const RaterWeights& weights) {
  for (auto& ex : data) ex.record.soft_label = soft_label(ex.record, weights)[1];
}

namespace {

// Pool sizes: the favoured class appears twice per rating.
struct Pool {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Pool branch_pool(const GradingRecord& record, Branch branch) {
  Pool pool;
  for (const auto& r : record.raw_labels()) {
    const bool doubled = (r.label == 1) == (branch == Branch::kSen);
    (r.label == 1 ? pool.positives : pool.negatives) += doubled ? 2 : 1;
  }
  if (pool.positives + pool.negatives == 0) {
    throw ParameterError("record " + std::to_string(record.sample_id) + " has no raw labels");
  }
  return pool;
}

}  // namespace

double branch_positive_probability(const GradingRecord& record, Branch branch) {
  const auto pool = branch_pool(record, branch);
  return static_cast<double>(pool.positives) /
         static_cast<double>(pool.positives + pool.negatives);
}

int sample_branch_label(const GradingRecord& record, Branch branch, std::uint64_t seed,
                        std::int64_t epoch) {
  const auto pool = branch_pool(record, branch);
  Rng rng(derive_seed(seed, {0x706f6f6cULL, static_cast<std::uint64_t>(record.sample_id),
                             static_cast<std::uint64_t>(epoch),
                             branch == Branch::kSen ? 1ULL : 2ULL}));
  return rng.index(pool.positives + pool.negatives) < pool.positives ? 1 : 0;
}

BranchLabels make_branch_labels(const GradingRecord& record, const RaterWeights& weights,
                                std::uint64_t seed, std::int64_t epoch) {
  BranchLabels out;
  out.sen_label = sample_branch_label(record, Branch::kSen, seed, epoch);
  out.spec_label = sample_branch_label(record, Branch::kSpec, seed, epoch);
  out.fusion_soft = soft_label(record, weights);
  out.consensus = record.consensus;
  return out;
}

}  // namespace mrc

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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mrc {

// A simulated grader. Accuracy is class-conditional: the probability of
// reporting the true label is `sensitivity` on positives and `specificity` on
// negatives, before difficulty degradation.
struct RaterProfile {
  int rater_id = 0;
  double sensitivity = 1.0;
  double specificity = 1.0;

  void validate() const;
};

// Two stage-1 graders plus the adjudicating specialist.
struct Panel {
  std::vector<RaterProfile> stage1;
  RaterProfile adjudicator;
  // Error inflation per unit difficulty: err = base * (1 + kappa * difficulty).
  double kappa = 2.0;

  // Throws ParameterError unless there are exactly two stage-1 raters, all ids
  // are distinct and every probability lies in [0, 1].
  void validate() const;

  static Panel default_panel();
};

// Probability that `rater` reports the wrong label for a sample with the given
// true label and difficulty. Clipped to [0, 0.5].
double rater_error_probability(const RaterProfile& rater, int true_label, double difficulty,
                               double kappa);

// Shape of the class-conditional feature distributions. Each class draws its
// samples from an isotropic Gaussian whose centre lies `easy_offset` (easy
// samples) or `hard_offset` (hard samples) from the decision hyperplane along
// the unit diagonal; a sample is hard with probability `difficulty_mix`.
struct FeatureModel {
  double easy_offset = 5.0;
  double hard_offset = 1.0;
  double noise_sd = 1.0;
  // difficulty = exp(-margin^2 / tau) for samples on their own side.
  double tau = 1.0;

  void validate() const;
};

struct SyntheticSample {
  std::int64_t sample_id = 0;
  std::vector<double> features;
  int true_label = 0;
  // In [0, 1]; 1 = on or beyond the class boundary. NaN when unknown (e.g.
  // after a CSV round trip, which does not store it).
  double difficulty = 0.0;
};

std::vector<SyntheticSample> generate_dataset(std::size_t n_samples, std::size_t feature_dim,
                                              double class_balance, double difficulty_mix,
                                              std::uint64_t seed,
                                              const FeatureModel& model = {});

struct RaterLabel {
  int rater_id = 0;
  int label = 0;

  friend bool operator==(const RaterLabel&, const RaterLabel&) = default;
};

struct GradingRecord {
  std::int64_t sample_id = 0;
  std::vector<RaterLabel> stage1;
  // Present iff the stage-1 raters disagreed.
  std::optional<RaterLabel> adjudicator;
  int consensus = 1;
  int final_label = 0;
  // Positive-class mass of the fused soft label, in [0.01, 0.99].
  double soft_label = 0.5;

  // All raw labels: stage-1 entries followed by the adjudicator, if any.
  std::vector<RaterLabel> raw_labels() const;

  // Throws DataError if any record invariant is broken.
  void validate() const;
};

// Grades one sample with the two-stage protocol. The returned soft label is
// the clipped unweighted mean of the raw labels; label_engine::soft_label
// replaces it once rater weights are known.
GradingRecord grade_sample(const SyntheticSample& sample, const Panel& panel,
                           std::uint64_t seed);

struct Example {
  SyntheticSample sample;
  GradingRecord record;
};

using Dataset = std::vector<Example>;

// Grades every sample; each sample's draws are seeded from (seed, sample_id).
Dataset grade_dataset(std::span<const SyntheticSample> samples, const Panel& panel,
                      std::uint64_t seed);

struct SplitRatios {
  double train = 0.6;
  double val = 0.15;
  double test = 0.25;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::string> warnings;
};

// Stratified by (final_label, consensus). Every stratum's share of each split
// is within one record of the exact ratio, and split totals are the rounded
// ratios of the full dataset.
DatasetSplit split_dataset(const Dataset& records, const SplitRatios& ratios,
                           std::uint64_t seed);

// Counts per consensus category, keyed as in the adjudication protocol.
struct ConsensusCounts {
  std::size_t consensus_positive = 0;
  std::size_t consensus_negative = 0;
  std::size_t non_consensus_positive = 0;
  std::size_t non_consensus_negative = 0;

  std::size_t total() const {
    return consensus_positive + consensus_negative + non_consensus_positive +
           non_consensus_negative;
  }
};

ConsensusCounts count_consensus(std::span<const Example> data);

}  // namespace mrc

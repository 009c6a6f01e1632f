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

#include "mrc/rater_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "mrc/error.hpp"
#include "mrc/label_engine.hpp"
#include "mrc/rng.hpp"
#include "mrc/types.hpp"

namespace mrc {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

int draw_label(Rng& rng, const RaterProfile& rater, int true_label, double difficulty,
               double kappa) {
  const double err = rater_error_probability(rater, true_label, difficulty, kappa);
  return rng.bernoulli(err) ? 1 - true_label : true_label;
}

}  // namespace

void RaterProfile::validate() const {
  if (!is_probability(sensitivity) || !is_probability(specificity)) {
    throw ParameterError("rater " + std::to_string(rater_id) +
                         ": sensitivity and specificity must lie in [0, 1]");
  }
}

void Panel::validate() const {
  if (stage1.size() != 2) {
    throw ParameterError("panel needs exactly two stage-1 raters, got " +
                         std::to_string(stage1.size()));
  }
  std::set<int> ids;
  for (const auto& r : stage1) {
    r.validate();
    ids.insert(r.rater_id);
  }
  adjudicator.validate();
  ids.insert(adjudicator.rater_id);
  if (ids.size() != 3) throw ParameterError("panel rater ids must be distinct");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ParameterError("panel kappa must be >= 0");
}

Panel Panel::default_panel() {
  Panel panel;
  panel.stage1 = {RaterProfile{1, 0.88, 0.88}, RaterProfile{2, 0.90, 0.85}};
  panel.adjudicator = RaterProfile{3, 0.95, 0.95};
  panel.kappa = 2.0;
  return panel;
}

double rater_error_probability(const RaterProfile& rater, int true_label, double difficulty,
                               double kappa) {
  const double base = true_label == kPositive ? 1.0 - rater.sensitivity : 1.0 - rater.specificity;
  const double inflated = base * (1.0 + kappa * difficulty);
  // Difficulty pushes a rater toward chance, never past it. A profile that is
  // already worse than chance keeps its base rate.
  return std::clamp(inflated, 0.0, std::max(base, 0.5));
}

void FeatureModel::validate() const {
  if (!std::isfinite(easy_offset) || !std::isfinite(hard_offset) || !(noise_sd > 0.0) ||
      !(tau > 0.0)) {
    throw ParameterError("feature model: offsets must be finite, noise_sd and tau positive");
  }
}

std::vector<SyntheticSample> generate_dataset(std::size_t n_samples, std::size_t feature_dim,
                                              double class_balance, double difficulty_mix,
                                              std::uint64_t seed, const FeatureModel& model) {
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  if (feature_dim < 1) throw ParameterError("feature_dim must be >= 1");
  if (!(class_balance > 0.0 && class_balance < 1.0)) {
    throw ParameterError("class_balance must lie strictly between 0 and 1");
  }
  if (!is_probability(difficulty_mix)) throw ParameterError("difficulty_mix must lie in [0, 1]");
  model.validate();

  Rng rng(derive_seed(seed, {0x67656e65726174ULL}));
  const double axis = 1.0 / std::sqrt(static_cast<double>(feature_dim));

  std::vector<SyntheticSample> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    SyntheticSample s;
    s.sample_id = static_cast<std::int64_t>(i);
    s.true_label = rng.bernoulli(class_balance) ? kPositive : kNegative;
    const bool hard = rng.bernoulli(difficulty_mix);
    const double side = s.true_label == kPositive ? 1.0 : -1.0;
    const double centre = side * (hard ? model.hard_offset : model.easy_offset) * axis;

    s.features.resize(feature_dim);
    double projection = 0.0;
    for (auto& f : s.features) {
      f = centre + model.noise_sd * rng.normal();
      projection += f * axis;
    }
    const double margin = side * projection;
    s.difficulty = margin <= 0.0 ? 1.0 : std::exp(-margin * margin / model.tau);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RaterLabel> GradingRecord::raw_labels() const {
  std::vector<RaterLabel> all = stage1;
  if (adjudicator) all.push_back(*adjudicator);
  return all;
}

void GradingRecord::validate() const {
  const auto fail = [&](const std::string& why) {
    throw DataError("record " + std::to_string(sample_id) + ": " + why);
  };
  if (stage1.empty()) fail("no stage-1 labels");
  for (const auto& r : raw_labels()) {
    if (!is_binary(r.label)) fail("non-binary rater label");
  }
  if (consensus != 0 && consensus != 1) fail("consensus flag must be 0 or 1");
  if (!is_binary(final_label)) fail("non-binary final label");
  const bool agree = std::all_of(stage1.begin(), stage1.end(),
                                 [&](const RaterLabel& r) { return r.label == stage1[0].label; });
  if (agree != (consensus == 1)) fail("consensus flag does not match stage-1 agreement");
  if (consensus == 1) {
    if (adjudicator) fail("adjudicator label present on a consensus record");
    if (final_label != stage1[0].label) fail("final label differs from the agreed label");
  } else {
    if (!adjudicator) fail("adjudicator label missing on a non-consensus record");
    if (final_label != adjudicator->label) fail("final label differs from the adjudicator");
  }
  if (!(soft_label >= kSoftLabelMin && soft_label <= kSoftLabelMax)) {
    fail("soft label outside [0.01, 0.99]");
  }
}

GradingRecord grade_sample(const SyntheticSample& sample, const Panel& panel,
                           std::uint64_t seed) {
  panel.validate();
  if (!is_binary(sample.true_label)) throw ParameterError("sample true_label must be 0 or 1");
  if (!is_probability(sample.difficulty)) {
    throw ParameterError("sample difficulty must lie in [0, 1]");
  }

  Rng rng(seed);
  GradingRecord rec;
  rec.sample_id = sample.sample_id;
  for (const auto& rater : panel.stage1) {
    rec.stage1.push_back(
        {rater.rater_id, draw_label(rng, rater, sample.true_label, sample.difficulty, panel.kappa)});
  }
  if (rec.stage1[0].label == rec.stage1[1].label) {
    rec.consensus = 1;
    rec.final_label = rec.stage1[0].label;
  } else {
    rec.consensus = 0;
    rec.adjudicator = RaterLabel{
        panel.adjudicator.rater_id,
        draw_label(rng, panel.adjudicator, sample.true_label, sample.difficulty, panel.kappa)};
    rec.final_label = rec.adjudicator->label;
  }

  const auto raw = rec.raw_labels();
  const double positives = static_cast<double>(
      std::count_if(raw.begin(), raw.end(), [](const RaterLabel& r) { return r.label == 1; }));
  rec.soft_label =
      std::clamp(positives / static_cast<double>(raw.size()), kSoftLabelMin, kSoftLabelMax);
  return rec;
}

Dataset grade_dataset(std::span<const SyntheticSample> samples, const Panel& panel,
                      std::uint64_t seed) {
  panel.validate();
  Dataset out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto sample_seed = derive_seed(seed, {0x6772616465ULL, static_cast<std::uint64_t>(s.sample_id)});
    out.push_back({s, grade_sample(s, panel, sample_seed)});
  }
  return out;
}

namespace {

constexpr std::size_t kSplits = 3;
constexpr std::size_t kStrataCount = 4;

// Stratum index: (final=1, a=1), (final=0, a=1), (final=1, a=0), (final=0, a=0).
std::size_t stratum_of(const GradingRecord& r) {
  return (r.consensus == 1 ? 0 : 2) + (r.final_label == 1 ? 0 : 1);
}

const char* kStratumNames[kStrataCount] = {
    "consensus positive", "consensus negative", "non-consensus positive",
    "non-consensus negative"};

// Integer counts per (stratum, split): every cell within one of its exact
// share and every split total equal to the largest-remainder rounding of the
// split's share of the whole dataset.
std::array<std::array<std::size_t, kSplits>, kStrataCount> allocate(
    const std::array<std::size_t, kStrataCount>& sizes, const std::array<double, kSplits>& r) {
  constexpr double kSlack = 1e-9;
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});

  std::array<std::size_t, kSplits> target{};
  {
    std::array<double, kSplits> frac{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < kSplits; ++k) {
      const double exact = r[k] * static_cast<double>(total);
      target[k] = static_cast<std::size_t>(std::floor(exact + kSlack));
      frac[k] = exact - static_cast<double>(target[k]);
      assigned += target[k];
    }
    std::array<std::size_t, kSplits> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++target[order[i % kSplits]];
  }

  std::array<std::array<std::size_t, kSplits>, kStrataCount> cells{};
  std::array<std::array<double, kSplits>, kStrataCount> frac{};
  std::array<std::size_t, kStrataCount> need_s{};
  std::array<long, kSplits> need_k{};
  for (std::size_t k = 0; k < kSplits; ++k) need_k[k] = static_cast<long>(target[k]);
  for (std::size_t s = 0; s < kStrataCount; ++s) {
    std::size_t used = 0;
    for (std::size_t k = 0; k < kSplits; ++k) {
      const double exact = r[k] * static_cast<double>(sizes[s]);
      cells[s][k] = std::min(sizes[s], static_cast<std::size_t>(std::floor(exact + kSlack)));
      frac[s][k] = exact - static_cast<double>(cells[s][k]);
      used += cells[s][k];
      need_k[k] -= static_cast<long>(cells[s][k]);
    }
    need_s[s] = sizes[s] - std::min(used, sizes[s]);
  }

  // Hand out the leftover units one per cell. Strata with the most leftovers
  // go first and take the splits with the largest outstanding need, which
  // always completes when a solution exists.
  std::array<std::size_t, kStrataCount> strata_order{0, 1, 2, 3};
  std::stable_sort(strata_order.begin(), strata_order.end(),
                   [&](std::size_t a, std::size_t b) { return need_s[a] > need_s[b]; });
  for (std::size_t s : strata_order) {
    std::array<std::size_t, kSplits> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (need_k[a] != need_k[b]) return need_k[a] > need_k[b];
      return frac[s][a] > frac[s][b];
    });
    for (std::size_t i = 0; i < need_s[s]; ++i) {
      ++cells[s][order[i]];
      --need_k[order[i]];
    }
  }
  return cells;
}

}  // namespace

DatasetSplit split_dataset(const Dataset& records, const SplitRatios& ratios,
                           std::uint64_t seed) {
  const std::array<double, kSplits> r{ratios.train, ratios.val, ratios.test};
  for (double x : r) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError("split ratios must be >= 0");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw ParameterError("split ratios must sum to 1");
  }

  std::array<std::vector<std::size_t>, kStrataCount> strata;
  for (std::size_t i = 0; i < records.size(); ++i) {
    strata[stratum_of(records[i].record)].push_back(i);
  }

  DatasetSplit out;
  std::array<std::size_t, kStrataCount> sizes{};
  for (std::size_t s = 0; s < kStrataCount; ++s) {
    sizes[s] = strata[s].size();
    if (strata[s].empty()) {
      out.warnings.push_back(std::string("split: stratum '") + kStratumNames[s] + "' is empty");
    }
  }
  const auto cells = allocate(sizes, r);

  std::array<std::vector<std::size_t>, kSplits> picked;
  for (std::size_t s = 0; s < kStrataCount; ++s) {
    Rng rng(derive_seed(seed, {0x73706c6974ULL, s}));
    rng.shuffle(std::span(strata[s]));
    std::size_t pos = 0;
    for (std::size_t k = 0; k < kSplits; ++k) {
      for (std::size_t n = 0; n < cells[s][k]; ++n) picked[k].push_back(strata[s][pos++]);
    }
  }

  std::array<Dataset*, kSplits> dest{&out.train, &out.val, &out.test};
  for (std::size_t k = 0; k < kSplits; ++k) {
    std::sort(picked[k].begin(), picked[k].end());
    dest[k]->reserve(picked[k].size());
    for (std::size_t i : picked[k]) dest[k]->push_back(records[i]);
  }
  return out;
}

ConsensusCounts count_consensus(std::span<const Example> data) {
  ConsensusCounts c;
  for (const auto& ex : data) {
    const auto& r = ex.record;
    if (r.consensus == 1) {
      (r.final_label == 1 ? c.consensus_positive : c.consensus_negative)++;
    } else {
      (r.final_label == 1 ? c.non_consensus_positive : c.non_consensus_negative)++;
    }
  }
  return c;
}

}  // namespace mrc

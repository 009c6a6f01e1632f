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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mrc/error.hpp"

namespace mrc {
namespace {

Panel make_panel(double sens1, double spec1, double sens2, double spec2) {
  Panel p;
  p.stage1 = {{1, sens1, spec1}, {2, sens2, spec2}};
  p.adjudicator = {3, 0.95, 0.95};
  return p;
}

struct RaterTally {
  double pos = 0, pos_hit = 0, neg = 0, neg_hit = 0;
  double sens() const { return pos_hit / pos; }
  double spec() const { return neg_hit / neg; }
};

std::array<RaterTally, 2> tally(const Dataset& data) {
  std::array<RaterTally, 2> t{};
  for (const auto& ex : data) {
    for (std::size_t k = 0; k < 2; ++k) {
      const int label = ex.record.stage1[k].label;
      if (ex.sample.true_label == 1) {
        ++t[k].pos;
        t[k].pos_hit += label == 1;
      } else {
        ++t[k].neg;
        t[k].neg_hit += label == 0;
      }
    }
  }
  return t;
}

TEST(GenerateDataset, SeparableWhenNothingIsHard) {
  const auto samples = generate_dataset(10, 2, 0.5, 0.0, 7);
  ASSERT_EQ(samples.size(), 10u);
  for (const auto& s : samples) {
    const double proj = (s.features[0] + s.features[1]) / std::sqrt(2.0);
    EXPECT_EQ(proj > 0, s.true_label == 1);
    EXPECT_LT(s.difficulty, 1e-2);
  }
}

TEST(GenerateDataset, Deterministic) {
  const auto a = generate_dataset(1000, 8, 0.45, 0.3, 5);
  const auto b = generate_dataset(1000, 8, 0.45, 0.3, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].true_label, b[i].true_label);
    EXPECT_EQ(a[i].difficulty, b[i].difficulty);
  }
  const auto c = generate_dataset(1000, 8, 0.45, 0.3, 6);
  EXPECT_NE(a[0].features, c[0].features);
}

TEST(GenerateDataset, DifficultyInUnitInterval) {
  for (const auto& s : generate_dataset(2000, 4, 0.5, 0.6, 1)) {
    EXPECT_GE(s.difficulty, 0.0);
    EXPECT_LE(s.difficulty, 1.0);
  }
}

TEST(GenerateDataset, RejectsBadParameters) {
  EXPECT_THROW(generate_dataset(0, 4, 0.5, 0.1, 1), ParameterError);
  EXPECT_THROW(generate_dataset(10, 0, 0.5, 0.1, 1), ParameterError);
  EXPECT_THROW(generate_dataset(10, 4, 1.0, 0.1, 1), ParameterError);
  EXPECT_THROW(generate_dataset(10, 4, 0.5, 1.1, 1), ParameterError);
}

TEST(Panel, ValidationCatchesBadProfiles) {
  EXPECT_NO_THROW(Panel::default_panel().validate());
  auto p = make_panel(0.9, 0.9, 0.9, 0.9);
  p.stage1[1].sensitivity = 1.2;
  EXPECT_THROW(p.validate(), ParameterError);
  p = make_panel(0.9, 0.9, 0.9, 0.9);
  p.stage1.pop_back();
  EXPECT_THROW(p.validate(), ParameterError);
  p = make_panel(0.9, 0.9, 0.9, 0.9);
  p.adjudicator.rater_id = 1;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(GradeSample, PerfectRatersAgreeWithTruth) {
  const auto panel = make_panel(1, 1, 1, 1);
  for (const auto& s : generate_dataset(200, 4, 0.5, 0.5, 3)) {
    const auto r = grade_sample(s, panel, 9);
    EXPECT_EQ(r.consensus, 1);
    EXPECT_EQ(r.final_label, s.true_label);
    EXPECT_FALSE(r.adjudicator.has_value());
  }
}

TEST(GradeSample, DisagreementTriggersAdjudication) {
  Panel panel;
  panel.stage1 = {{1, 1.0, 1.0}, {2, 0.0, 0.0}};
  panel.adjudicator = {3, 1.0, 1.0};
  SyntheticSample s{0, {0.0}, 1, 0.0};
  const auto r = grade_sample(s, panel, 1);
  EXPECT_EQ(r.stage1[0].label, 1);
  EXPECT_EQ(r.stage1[1].label, 0);
  EXPECT_EQ(r.consensus, 0);
  ASSERT_TRUE(r.adjudicator.has_value());
  EXPECT_EQ(r.adjudicator->rater_id, 3);
  EXPECT_EQ(r.final_label, 1);
  EXPECT_NO_THROW(r.validate());
}

TEST(GradeSample, EasyPositiveRateMatchesSensitivity) {
  const auto panel = make_panel(0.7, 0.9, 0.7, 0.9);
  const int n = 10000;
  double positives = 0;
  for (int i = 0; i < n; ++i) {
    SyntheticSample s{i, {0.0}, 1, 0.0};
    positives += grade_sample(s, panel, 1000 + i).stage1[0].label;
  }
  EXPECT_NEAR(positives / n, 0.7, 0.02);
}

TEST(GradeSample, ErrorRisesWithDifficulty) {
  const RaterProfile r{1, 0.9, 0.8};
  EXPECT_DOUBLE_EQ(rater_error_probability(r, 1, 0.0, 2.0), 1.0 - 0.9);
  EXPECT_DOUBLE_EQ(rater_error_probability(r, 0, 0.0, 2.0), 1.0 - 0.8);
  EXPECT_NEAR(rater_error_probability(r, 1, 0.5, 2.0), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(rater_error_probability(r, 0, 1.0, 2.0), 0.5);
  double prev = 0;
  for (double d = 0; d <= 1.0; d += 0.1) {
    const double e = rater_error_probability(r, 1, d, 2.0);
    EXPECT_GE(e, prev);
    EXPECT_LE(e, 0.5);
    prev = e;
  }
}

TEST(GradeDataset, RecordsSatisfyInvariants) {
  const auto samples = generate_dataset(3000, 8, 0.45, 0.4, 2);
  const auto data = grade_dataset(samples, Panel::default_panel(), 2);
  for (const auto& ex : data) {
    EXPECT_NO_THROW(ex.record.validate());
    EXPECT_TRUE(ex.record.consensus == 0 || ex.record.consensus == 1);
    EXPECT_EQ(ex.record.sample_id, ex.sample.sample_id);
  }
}

TEST(GradeDataset, EasyDataReproducesRaterProfiles) {
  const auto panel = make_panel(0.73, 0.92, 0.55, 0.85);
  const auto samples = generate_dataset(20000, 8, 0.5, 0.0, 4);
  const auto t = tally(grade_dataset(samples, panel, 4));
  EXPECT_NEAR(t[0].sens(), 0.73, 0.02);
  EXPECT_NEAR(t[0].spec(), 0.92, 0.02);
  EXPECT_NEAR(t[1].sens(), 0.55, 0.02);
  EXPECT_NEAR(t[1].spec(), 0.85, 0.02);
}

TEST(GradeDataset, NonConsensusRateGrowsWithDifficultyMix) {
  const auto panel = Panel::default_panel();
  double prev = -1;
  for (double mix : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double rate = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto c = count_consensus(grade_dataset(generate_dataset(4000, 8, 0.45, mix, seed),
                                                   panel, seed));
      rate += static_cast<double>(c.non_consensus_positive + c.non_consensus_negative) /
              static_cast<double>(c.total());
    }
    EXPECT_GE(rate, prev) << "mix " << mix;
    prev = rate;
  }
}

Dataset graded(std::size_t n, std::uint64_t seed) {
  return grade_dataset(generate_dataset(n, 4, 0.45, 0.5, seed), Panel::default_panel(), seed);
}

TEST(SplitDataset, DefaultRatiosGiveExactSizes) {
  const auto split = split_dataset(graded(1000, 8), {0.6, 0.15, 0.25}, 8);
  EXPECT_EQ(split.train.size(), 600u);
  EXPECT_EQ(split.val.size(), 150u);
  EXPECT_EQ(split.test.size(), 250u);
}

TEST(SplitDataset, DegenerateSplitKeepsEverythingInTrain) {
  const auto data = graded(300, 9);
  const auto split = split_dataset(data, {1.0, 0.0, 0.0}, 9);
  EXPECT_EQ(split.train.size(), 300u);
  EXPECT_TRUE(split.val.empty());
  EXPECT_TRUE(split.test.empty());
}

TEST(SplitDataset, DisjointExhaustiveStratifiedDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 50 + 37 * seed;
    const auto data = graded(n, seed);
    const auto split = split_dataset(data, {0.6, 0.15, 0.25}, seed);
    std::multiset<std::int64_t> ids;
    for (const auto* part : {&split.train, &split.val, &split.test}) {
      for (const auto& ex : *part) ids.insert(ex.sample.sample_id);
    }
    ASSERT_EQ(ids.size(), n);
    EXPECT_EQ(std::set<std::int64_t>(ids.begin(), ids.end()).size(), n);

    const auto whole = count_consensus(data);
    const std::array<double, 3> ratios{0.6, 0.15, 0.25};
    const std::array<const Dataset*, 3> parts{&split.train, &split.val, &split.test};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto c = count_consensus(*parts[k]);
      EXPECT_LE(std::abs(double(c.consensus_positive) - ratios[k] * whole.consensus_positive), 1.0);
      EXPECT_LE(std::abs(double(c.consensus_negative) - ratios[k] * whole.consensus_negative), 1.0);
      EXPECT_LE(std::abs(double(c.non_consensus_positive) - ratios[k] * whole.non_consensus_positive),
                1.0);
      EXPECT_LE(std::abs(double(c.non_consensus_negative) - ratios[k] * whole.non_consensus_negative),
                1.0);
    }

    const auto again = split_dataset(data, {0.6, 0.15, 0.25}, seed);
    ASSERT_EQ(again.test.size(), split.test.size());
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      EXPECT_EQ(again.test[i].sample.sample_id, split.test[i].sample.sample_id);
    }
  }
}

TEST(SplitDataset, RejectsBadRatios) {
  const auto data = graded(20, 1);
  EXPECT_THROW(split_dataset(data, {0.5, 0.2, 0.2}, 1), ParameterError);
  EXPECT_THROW(split_dataset(data, {1.2, -0.1, -0.1}, 1), ParameterError);
}

}  // namespace
}  // namespace mrc

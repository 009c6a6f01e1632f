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

#include <filesystem>
#include <iosfwd>
#include <span>

#include "mrc/rater_sim.hpp"

namespace mrc {

// Dataset CSV:
//
//   sample_id,f_0,...,f_{d-1},true_label,rater_labels,adjudicator_label,consensus,final_label,soft_label
//
// rater_labels holds the stage-1 gradings as semicolon-joined `rater_id:label`
// pairs; adjudicator_label is a single `rater_id:label` pair, empty when
// consensus=1. Reals are written in shortest round-trip form. Difficulty is
// not stored and reads back as NaN.
void write_dataset_csv(std::ostream& out, std::span<const Example> data);
Dataset read_dataset_csv(std::istream& in);

void write_dataset_csv(const std::filesystem::path& path, std::span<const Example> data);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace mrc

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

#include <string>

#include <nlohmann/json.hpp>

#include "mrc/metrics.hpp"

namespace mrc {

// Full branch x stratum grid. Undefined values are written as null.
nlohmann::json report_to_json(const EvalReport& report);

// Aligned text table, one row per branch, with Sen/Spec/AUC column groups for
// consensus, non-consensus and all data, followed by an Acc/F1 and
// uncertainty summary.
std::string format_report_table(const EvalReport& report);

}  // namespace mrc

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

namespace mrc {

inline constexpr int kNegative = 0;
inline constexpr int kPositive = 1;

// Two-class probability vector, always ordered (non-disease, disease).
using ClassProbs = std::array<double, 2>;

inline constexpr ClassProbs one_hot(int label) {
  return label == kPositive ? ClassProbs{0.0, 1.0} : ClassProbs{1.0, 0.0};
}

inline constexpr bool is_binary(int label) { return label == kNegative || label == kPositive; }

}  // namespace mrc

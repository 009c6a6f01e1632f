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

#include <stdexcept>
#include <string>

namespace mrc {

// Invalid argument or configuration value supplied by the caller.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An input violated a documented precondition (e.g. a probability vector that
// does not sum to one, or a backward pass against a stale forward cache).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or inconsistent data (CSV parse failures, unknown rater ids).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric that is not defined for the given input, e.g. AUC on one class.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training produced a non-finite loss. what() carries a state dump.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mrc

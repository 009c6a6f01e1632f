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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mrc/types.hpp"

namespace mrc {

struct ModelConfig {
  std::size_t input_dim = 64;
  std::vector<std::size_t> trunk_dims{64, 64, 64};
  std::size_t branch_dim = 32;
  // false builds the single-head baseline: trunk, one feature layer and one
  // classifier on that layer's output alone.
  bool multi_branch = true;
  std::uint64_t seed = 0;

  void validate() const;
};

using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// y = W x + b. Weight is (out x in), stored row-major.
struct DenseLayer {
  WeightMatrix weight;
  Eigen::VectorXd bias;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

// Shared tanh trunk feeding three tanh feature layers. The sensitivity and
// specificity heads read their own features; the fusion head reads the
// concatenation [sen, spec, fusion]. In single-branch mode the sen/spec
// layers are empty and the fusion head reads only the fusion features.
struct ModelParams {
  std::vector<DenseLayer> trunk;
  DenseLayer sen_features;
  DenseLayer spec_features;
  DenseLayer fusion_features;
  DenseLayer sen_head;
  DenseLayer spec_head;
  DenseLayer fusion_head;
  bool multi_branch = true;
  // Bumped by every in-place update; a forward cache remembers it.
  std::uint64_t version = 0;

  std::size_t input_dim() const;
  std::size_t parameter_count() const;

  // Zero-filled tensors with the same shapes.
  ModelParams zeros_like() const;

  // Visits every tensor in a fixed order as (name, row-major values, rows,
  // cols). Biases are (n x 1).
  template <typename Fn>
  void for_each_tensor(Fn&& fn);
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const;
};

ModelParams init_params(const ModelConfig& config);

// Per-sample outputs; each vector is (non-disease, disease).
struct BranchOutputs {
  ClassProbs y_sen{0.5, 0.5};
  ClassProbs y_spec{0.5, 0.5};
  ClassProbs y_fusion{0.5, 0.5};
  double uncertainty = 0.0;
};

// Activations kept for the backward pass. Columns are samples.
struct ForwardCache {
  const ModelParams* params = nullptr;
  std::uint64_t params_version = 0;
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> trunk_activations;  // post-tanh, one per layer
  Eigen::MatrixXd sen_features;
  Eigen::MatrixXd spec_features;
  Eigen::MatrixXd fusion_features;
  Eigen::MatrixXd sen_probs;  // 2 x batch
  Eigen::MatrixXd spec_probs;
  Eigen::MatrixXd fusion_probs;

  std::size_t batch_size() const { return static_cast<std::size_t>(input.cols()); }
  BranchOutputs outputs(std::size_t column) const;
};

// Batched forward; `inputs` is (input_dim x batch). In single-branch mode the
// sen/spec outputs mirror the fusion output and the uncertainty is zero.
ForwardCache forward_batch(const ModelParams& params, const Eigen::MatrixXd& inputs);

struct ForwardResult {
  BranchOutputs outputs;
  ForwardCache cache;
};

ForwardResult forward(const ModelParams& params, std::span<const double> features);

// Gradient of the total loss with respect to each branch's probability
// outputs (2 x batch each). Sen/spec grads are ignored in single-branch mode.
struct OutputGrads {
  Eigen::MatrixXd sen;
  Eigen::MatrixXd spec;
  Eigen::MatrixXd fusion;

  static OutputGrads zeros(std::size_t batch);
};

// Reverse pass. Throws ContractViolation if `params` is not the object (at
// the same version) that produced `cache`.
ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                     const OutputGrads& grads);

// Gradient of sum_k g_k * p_k through p = softmax(z), column-wise.
Eigen::MatrixXd softmax_backward(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& grad_probs);

bool all_finite(const ModelParams& params);

// -- implementation of the tensor visitors ---------------------------------

namespace detail {

template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
  auto layer = [&](const std::string& prefix, auto& l) {
    fn(prefix + ".weight", std::span(l.weight.data(), static_cast<std::size_t>(l.weight.size())),
       l.out_dim(), l.in_dim());
    fn(prefix + ".bias", std::span(l.bias.data(), static_cast<std::size_t>(l.bias.size())),
       static_cast<std::size_t>(l.bias.size()), std::size_t{1});
  };
  for (std::size_t i = 0; i < p.trunk.size(); ++i) layer("trunk." + std::to_string(i), p.trunk[i]);
  if (p.multi_branch) {
    layer("sen.features", p.sen_features);
    layer("spec.features", p.spec_features);
  }
  layer("fusion.features", p.fusion_features);
  if (p.multi_branch) {
    layer("sen.head", p.sen_head);
    layer("spec.head", p.spec_head);
  }
  layer("fusion.head", p.fusion_head);
}

}  // namespace detail

template <typename Fn>
void ModelParams::for_each_tensor(Fn&& fn) {
  detail::visit_tensors(*this, std::forward<Fn>(fn));
}

template <typename Fn>
void ModelParams::for_each_tensor(Fn&& fn) const {
  detail::visit_tensors(*this, std::forward<Fn>(fn));
}

}  // namespace mrc

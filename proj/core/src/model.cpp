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

#include "mrc/model.hpp"

#include <cmath>

#include "mrc/error.hpp"
#include "mrc/losses.hpp"
#include "mrc/rng.hpp"

namespace mrc {
namespace {

DenseLayer make_layer(Rng& rng, std::size_t in, std::size_t out, bool zero_bias) {
  DenseLayer l;
  l.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  l.bias.resize(static_cast<Eigen::Index>(out));
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
      l.weight(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
    l.bias(r) = zero_bias ? 0.0 : bound * (2.0 * rng.uniform() - 1.0);
  }
  return l;
}

DenseLayer zeros_of(const DenseLayer& l) {
  DenseLayer z;
  z.weight = WeightMatrix::Zero(l.weight.rows(), l.weight.cols());
  z.bias = Eigen::VectorXd::Zero(l.bias.size());
  return z;
}

Eigen::MatrixXd tanh_layer(const DenseLayer& l, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = l.weight * x;
  z.colwise() += l.bias;
  return z.array().tanh().matrix();
}

void softmax_columns(Eigen::MatrixXd& logits) {
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    auto col = logits.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

Eigen::MatrixXd head_probs(const DenseLayer& head, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd z = head.weight * features;
  z.colwise() += head.bias;
  softmax_columns(z);
  return z;
}

ClassProbs column(const Eigen::MatrixXd& m, std::size_t c) {
  const auto i = static_cast<Eigen::Index>(c);
  return {m(0, i), m(1, i)};
}

// Accumulates the parameter gradient of a tanh layer given the gradient at
// its output, and returns the gradient at its input.
Eigen::MatrixXd tanh_layer_backward(const DenseLayer& layer, const Eigen::MatrixXd& input,
                                    const Eigen::MatrixXd& output, const Eigen::MatrixXd& grad_out,
                                    DenseLayer& grad) {
  const Eigen::MatrixXd grad_pre =
      (grad_out.array() * (1.0 - output.array().square())).matrix();
  grad.weight.noalias() += grad_pre * input.transpose();
  grad.bias += grad_pre.rowwise().sum();
  return layer.weight.transpose() * grad_pre;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim < 1) throw ParameterError("model input_dim must be >= 1");
  if (branch_dim < 1) throw ParameterError("model branch_dim must be >= 1");
  for (auto w : trunk_dims) {
    if (w < 1) throw ParameterError("model trunk widths must be >= 1");
  }
}

std::size_t ModelParams::input_dim() const {
  return trunk.empty() ? fusion_features.in_dim() : trunk.front().in_dim();
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, std::span<const double> v, std::size_t, std::size_t) {
    n += v.size();
  });
  return n;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.multi_branch = multi_branch;
  for (const auto& l : trunk) z.trunk.push_back(zeros_of(l));
  z.sen_features = zeros_of(sen_features);
  z.spec_features = zeros_of(spec_features);
  z.fusion_features = zeros_of(fusion_features);
  z.sen_head = zeros_of(sen_head);
  z.spec_head = zeros_of(spec_head);
  z.fusion_head = zeros_of(fusion_head);
  return z;
}

ModelParams init_params(const ModelConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, {0x696e6974ULL}));
  ModelParams p;
  p.multi_branch = config.multi_branch;

  std::size_t width = config.input_dim;
  for (auto w : config.trunk_dims) {
    p.trunk.push_back(make_layer(rng, width, w, false));
    width = w;
  }
  const std::size_t k = config.branch_dim;
  if (p.multi_branch) {
    p.sen_features = make_layer(rng, width, k, false);
    p.spec_features = make_layer(rng, width, k, false);
  }
  p.fusion_features = make_layer(rng, width, k, false);
  if (p.multi_branch) {
    p.sen_head = make_layer(rng, k, 2, true);
    p.spec_head = make_layer(rng, k, 2, true);
    p.fusion_head = make_layer(rng, 3 * k, 2, true);
  } else {
    p.fusion_head = make_layer(rng, k, 2, true);
  }
  return p;
}

BranchOutputs ForwardCache::outputs(std::size_t c) const {
  BranchOutputs out;
  out.y_sen = column(sen_probs, c);
  out.y_spec = column(spec_probs, c);
  out.y_fusion = column(fusion_probs, c);
  out.uncertainty = uncertainty(out.y_sen, out.y_spec);
  return out;
}

ForwardCache forward_batch(const ModelParams& params, const Eigen::MatrixXd& inputs) {
  if (static_cast<std::size_t>(inputs.rows()) != params.input_dim()) {
    throw ParameterError("forward: expected " + std::to_string(params.input_dim()) +
                         " features, got " + std::to_string(inputs.rows()));
  }
  ForwardCache cache;
  cache.params = &params;
  cache.params_version = params.version;
  cache.input = inputs;

  const Eigen::MatrixXd* h = &cache.input;
  cache.trunk_activations.reserve(params.trunk.size());
  for (const auto& layer : params.trunk) {
    cache.trunk_activations.push_back(tanh_layer(layer, *h));
    h = &cache.trunk_activations.back();
  }

  cache.fusion_features = tanh_layer(params.fusion_features, *h);
  if (params.multi_branch) {
    cache.sen_features = tanh_layer(params.sen_features, *h);
    cache.spec_features = tanh_layer(params.spec_features, *h);
    cache.sen_probs = head_probs(params.sen_head, cache.sen_features);
    cache.spec_probs = head_probs(params.spec_head, cache.spec_features);

    const auto k = cache.fusion_features.rows();
    const auto& w = params.fusion_head.weight;
    Eigen::MatrixXd z = w.leftCols(k) * cache.sen_features;
    z.noalias() += w.middleCols(k, k) * cache.spec_features;
    z.noalias() += w.rightCols(k) * cache.fusion_features;
    z.colwise() += params.fusion_head.bias;
    softmax_columns(z);
    cache.fusion_probs = std::move(z);
  } else {
    cache.fusion_probs = head_probs(params.fusion_head, cache.fusion_features);
    cache.sen_probs = cache.fusion_probs;
    cache.spec_probs = cache.fusion_probs;
  }
  return cache;
}

ForwardResult forward(const ModelParams& params, std::span<const double> features) {
  const Eigen::MatrixXd x =
      Eigen::Map<const Eigen::VectorXd>(features.data(), static_cast<Eigen::Index>(features.size()));
  ForwardResult r;
  r.cache = forward_batch(params, x);
  r.outputs = r.cache.outputs(0);
  return r;
}

OutputGrads OutputGrads::zeros(std::size_t batch) {
  const auto b = static_cast<Eigen::Index>(batch);
  return {Eigen::MatrixXd::Zero(2, b), Eigen::MatrixXd::Zero(2, b), Eigen::MatrixXd::Zero(2, b)};
}

Eigen::MatrixXd softmax_backward(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& grad_probs) {
  // dL/dz = p * (g - <p, g>)
  const Eigen::RowVectorXd inner = (probs.array() * grad_probs.array()).colwise().sum();
  return (probs.array() * (grad_probs.rowwise() - inner).array()).matrix();
}

ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                     const OutputGrads& grads) {
  if (cache.params != &params || cache.params_version != params.version) {
    throw ContractViolation("backward: cache was produced by different or since-updated parameters");
  }
  const auto batch = static_cast<Eigen::Index>(cache.batch_size());
  if (grads.fusion.rows() != 2 || grads.fusion.cols() != batch ||
      (params.multi_branch && (grads.sen.rows() != 2 || grads.sen.cols() != batch ||
                               grads.spec.rows() != 2 || grads.spec.cols() != batch))) {
    throw ContractViolation("backward: output gradients must be 2 x batch");
  }

  ModelParams g = params.zeros_like();
  const Eigen::MatrixXd& trunk_out =
      params.trunk.empty() ? cache.input : cache.trunk_activations.back();

  const Eigen::MatrixXd dz_fusion = softmax_backward(cache.fusion_probs, grads.fusion);
  g.fusion_head.bias = dz_fusion.rowwise().sum();
  Eigen::MatrixXd d_trunk_out;

  if (params.multi_branch) {
    const auto k = cache.fusion_features.rows();
    const auto& w = params.fusion_head.weight;
    g.fusion_head.weight.leftCols(k).noalias() = dz_fusion * cache.sen_features.transpose();
    g.fusion_head.weight.middleCols(k, k).noalias() = dz_fusion * cache.spec_features.transpose();
    g.fusion_head.weight.rightCols(k).noalias() = dz_fusion * cache.fusion_features.transpose();

    const Eigen::MatrixXd dz_sen = softmax_backward(cache.sen_probs, grads.sen);
    const Eigen::MatrixXd dz_spec = softmax_backward(cache.spec_probs, grads.spec);
    g.sen_head.weight.noalias() = dz_sen * cache.sen_features.transpose();
    g.sen_head.bias = dz_sen.rowwise().sum();
    g.spec_head.weight.noalias() = dz_spec * cache.spec_features.transpose();
    g.spec_head.bias = dz_spec.rowwise().sum();

    // The fusion head feeds gradient back into all three feature layers.
    Eigen::MatrixXd d_sen = params.sen_head.weight.transpose() * dz_sen;
    d_sen.noalias() += w.leftCols(k).transpose() * dz_fusion;
    Eigen::MatrixXd d_spec = params.spec_head.weight.transpose() * dz_spec;
    d_spec.noalias() += w.middleCols(k, k).transpose() * dz_fusion;
    const Eigen::MatrixXd d_fus = w.rightCols(k).transpose() * dz_fusion;

    d_trunk_out = tanh_layer_backward(params.sen_features, trunk_out, cache.sen_features, d_sen,
                                      g.sen_features);
    d_trunk_out += tanh_layer_backward(params.spec_features, trunk_out, cache.spec_features,
                                       d_spec, g.spec_features);
    d_trunk_out += tanh_layer_backward(params.fusion_features, trunk_out, cache.fusion_features,
                                       d_fus, g.fusion_features);
  } else {
    g.fusion_head.weight.noalias() = dz_fusion * cache.fusion_features.transpose();
    const Eigen::MatrixXd d_fus = params.fusion_head.weight.transpose() * dz_fusion;
    d_trunk_out = tanh_layer_backward(params.fusion_features, trunk_out, cache.fusion_features,
                                      d_fus, g.fusion_features);
  }

  for (std::size_t i = params.trunk.size(); i-- > 0;) {
    const Eigen::MatrixXd& in = i == 0 ? cache.input : cache.trunk_activations[i - 1];
    d_trunk_out = tanh_layer_backward(params.trunk[i], in, cache.trunk_activations[i],
                                      d_trunk_out, g.trunk[i]);
  }
  return g;
}

bool all_finite(const ModelParams& params) {
  bool ok = true;
  params.for_each_tensor([&](const std::string&, std::span<const double> v, std::size_t,
                             std::size_t) {
    for (double x : v) ok = ok && std::isfinite(x);
  });
  return ok;
}

}  // namespace mrc

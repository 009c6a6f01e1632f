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

#include "mrc/checkpoint.hpp"

#include <fstream>

#include "mrc/error.hpp"

namespace mrc {
namespace {

constexpr const char* kFormat = "mrc-checkpoint";
constexpr int kFormatVersion = 1;

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& config) {
  return {{"input_dim", config.input_dim},
          {"trunk_dims", config.trunk_dims},
          {"branch_dim", config.branch_dim},
          {"multi_branch", config.multi_branch},
          {"seed", config.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& doc) {
  ModelConfig c;
  c.input_dim = doc.at("input_dim").get<std::size_t>();
  c.trunk_dims = doc.at("trunk_dims").get<std::vector<std::size_t>>();
  c.branch_dim = doc.at("branch_dim").get<std::size_t>();
  c.multi_branch = doc.at("multi_branch").get<bool>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint) {
  nlohmann::json tensors = nlohmann::json::array();
  checkpoint.params.for_each_tensor(
      [&](const std::string& name, std::span<const double> values, std::size_t rows,
          std::size_t cols) {
        tensors.push_back({{"name", name},
                           {"shape", {rows, cols}},
                           {"values", std::vector<double>(values.begin(), values.end())}});
      });
  return {{"format", kFormat},
          {"format_version", kFormatVersion},
          {"model", model_config_to_json(checkpoint.config)},
          {"metadata", checkpoint.metadata},
          {"tensors", std::move(tensors)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != kFormat) throw DataError("not an mrc checkpoint");
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw DataError("unsupported checkpoint format_version");
    }
    Checkpoint ck;
    ck.config = model_config_from_json(doc.at("model"));
    ck.params = init_params(ck.config);
    ck.metadata = doc.value("metadata", nlohmann::json::object());

    const auto& tensors = doc.at("tensors");
    std::size_t index = 0;
    ck.params.for_each_tensor([&](const std::string& name, std::span<double> values,
                                  std::size_t rows, std::size_t cols) {
      if (index >= tensors.size()) throw DataError("checkpoint is missing tensor " + name);
      const auto& t = tensors[index++];
      if (t.at("name") != name) {
        throw DataError("checkpoint tensor order mismatch at " + name);
      }
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != rows || shape[1] != cols) {
        throw DataError("checkpoint tensor " + name + " has the wrong shape");
      }
      const auto& v = t.at("values");
      if (v.size() != values.size()) throw DataError("checkpoint tensor " + name + " has the wrong size");
      for (std::size_t i = 0; i < values.size(); ++i) values[i] = v[i].get<double>();
    });
    if (index != tensors.size()) throw DataError("checkpoint has unexpected extra tensors");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << checkpoint_to_json(checkpoint).dump(1) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace mrc

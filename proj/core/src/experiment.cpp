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

#include "mrc/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mrc/checkpoint.hpp"
#include "mrc/dataset_io.hpp"
#include "mrc/error.hpp"
#include "mrc/report.hpp"

namespace mrc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ParameterError("config " + key + ": cannot parse '" + text + "'");
  }
  return value;
}

std::vector<std::size_t> parse_dims(const std::string& key, const std::string& text) {
  std::vector<std::size_t> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(parse_value<std::size_t>(key, trim(item)));
  return dims;
}

RaterProfile& panel_member(ExperimentConfig& c, const std::string& who) {
  if (who == "rater1") return c.panel.stage1.at(0);
  if (who == "rater2") return c.panel.stage1.at(1);
  return c.panel.adjudicator;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

nlohmann::json counts_json(const ConsensusCounts& c) {
  const double n = static_cast<double>(std::max<std::size_t>(c.total(), 1));
  return {{"consensus_positive", c.consensus_positive},
          {"consensus_negative", c.consensus_negative},
          {"non_consensus_positive", c.non_consensus_positive},
          {"non_consensus_negative", c.non_consensus_negative},
          {"total", c.total()},
          {"proportions",
           {{"consensus_positive", static_cast<double>(c.consensus_positive) / n},
            {"consensus_negative", static_cast<double>(c.consensus_negative) / n},
            {"non_consensus_positive", static_cast<double>(c.non_consensus_positive) / n},
            {"non_consensus_negative", static_cast<double>(c.non_consensus_negative) / n}}}};
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

constexpr const char* kMetricNames[] = {"acc", "sen", "spec", "f1", "auc"};

// Fusion-branch metric on all data, NaN when undefined.
double fusion_metric(const EvalReport& r, int which) {
  const auto& m = r.at(BranchId::kFusion, Stratum::kAll);
  if (!m) return std::nan("");
  const auto& c = m->confusion;
  switch (which) {
    case 0: return c.acc;
    case 1: return c.sen_defined ? c.sen : std::nan("");
    case 2: return c.spec_defined ? c.spec : std::nan("");
    case 3: return c.f1_defined ? c.f1 : std::nan("");
    default: return m->auc.value_or(std::nan(""));
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  if (feature_dim < 1) throw ParameterError("feature_dim must be >= 1");
  if (!(class_balance > 0.0 && class_balance < 1.0)) {
    throw ParameterError("class_balance must lie strictly between 0 and 1");
  }
  if (!(difficulty_mix >= 0.0 && difficulty_mix <= 1.0)) {
    throw ParameterError("difficulty_mix must lie in [0, 1]");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ParameterError("threshold must lie in [0, 1]");
  if (ablation_seeds < 1) throw ParameterError("ablation_seeds must be >= 1");
  features.validate();
  panel.validate();
  model_config().validate();
  train.validate();
}

ModelConfig ExperimentConfig::model_config() const {
  ModelConfig m;
  m.input_dim = feature_dim;
  m.trunk_dims = trunk_dims;
  m.branch_dim = branch_dim;
  m.multi_branch = train.ablation.multi_branch;
  m.seed = seed;
  return m;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {
      {"n_samples", n_samples},
      {"feature_dim", feature_dim},
      {"class_balance", class_balance},
      {"difficulty_mix", difficulty_mix},
      {"features.easy_offset", features.easy_offset},
      {"features.hard_offset", features.hard_offset},
      {"features.noise_sd", features.noise_sd},
      {"features.tau", features.tau},
      {"panel.kappa", panel.kappa},
      {"split.train", split.train},
      {"split.val", split.val},
      {"split.test", split.test},
      {"model.trunk_dims", trunk_dims},
      {"model.branch_dim", branch_dim},
      {"train.batch_size", train.batch_size},
      {"train.max_epochs", train.max_epochs},
      {"train.lr", train.lr},
      {"train.lr_halving_period", train.lr_halving_period},
      {"train.alpha", train.alpha},
      {"train.margin", train.margin},
      {"train.beta1", train.beta1},
      {"train.beta2", train.beta2},
      {"train.epsilon", train.epsilon},
      {"train.ablation", train.ablation.name()},
      {"threshold", threshold},
      {"seed", seed},
      {"ablation_seeds", ablation_seeds},
      {"out_dir", out_dir.string()},
  };
  const std::pair<const char*, const RaterProfile*> members[] = {
      {"rater1", &panel.stage1.at(0)}, {"rater2", &panel.stage1.at(1)},
      {"adjudicator", &panel.adjudicator}};
  for (const auto& [who, r] : members) {
    const std::string prefix = std::string("panel.") + who;
    j[prefix + ".id"] = r->rater_id;
    j[prefix + ".sensitivity"] = r->sensitivity;
    j[prefix + ".specificity"] = r->specificity;
  }
  return j;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "n_samples") c.n_samples = parse_value<std::size_t>(key, v);
  else if (key == "feature_dim") c.feature_dim = parse_value<std::size_t>(key, v);
  else if (key == "class_balance") c.class_balance = parse_value<double>(key, v);
  else if (key == "difficulty_mix") c.difficulty_mix = parse_value<double>(key, v);
  else if (key == "features.easy_offset") c.features.easy_offset = parse_value<double>(key, v);
  else if (key == "features.hard_offset") c.features.hard_offset = parse_value<double>(key, v);
  else if (key == "features.noise_sd") c.features.noise_sd = parse_value<double>(key, v);
  else if (key == "features.tau") c.features.tau = parse_value<double>(key, v);
  else if (key == "panel.kappa") c.panel.kappa = parse_value<double>(key, v);
  else if (key == "split.train") c.split.train = parse_value<double>(key, v);
  else if (key == "split.val") c.split.val = parse_value<double>(key, v);
  else if (key == "split.test") c.split.test = parse_value<double>(key, v);
  else if (key == "model.trunk_dims") c.trunk_dims = parse_dims(key, v);
  else if (key == "model.branch_dim") c.branch_dim = parse_value<std::size_t>(key, v);
  else if (key == "train.batch_size") c.train.batch_size = parse_value<std::size_t>(key, v);
  else if (key == "train.max_epochs") c.train.max_epochs = parse_value<int>(key, v);
  else if (key == "train.lr") c.train.lr = parse_value<double>(key, v);
  else if (key == "train.lr_halving_period") c.train.lr_halving_period = parse_value<int>(key, v);
  else if (key == "train.alpha") c.train.alpha = parse_value<double>(key, v);
  else if (key == "train.margin") c.train.margin = parse_value<double>(key, v);
  else if (key == "train.beta1") c.train.beta1 = parse_value<double>(key, v);
  else if (key == "train.beta2") c.train.beta2 = parse_value<double>(key, v);
  else if (key == "train.epsilon") c.train.epsilon = parse_value<double>(key, v);
  else if (key == "train.ablation") c.train.ablation = AblationFlags::from_name(v);
  else if (key == "threshold") c.threshold = parse_value<double>(key, v);
  else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, v);
  else if (key == "ablation_seeds") c.ablation_seeds = parse_value<std::size_t>(key, v);
  else if (key == "out_dir") c.out_dir = v;
  else if (key.starts_with("panel.")) {
    const auto dot = key.find('.', 6);
    const std::string who = key.substr(6, dot == std::string::npos ? std::string::npos : dot - 6);
    const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
    if (who != "rater1" && who != "rater2" && who != "adjudicator") {
      throw ParameterError("unknown config key '" + key + "'");
    }
    auto& r = panel_member(c, who);
    if (field == "id") r.rater_id = parse_value<int>(key, v);
    else if (field == "sensitivity") r.sensitivity = parse_value<double>(key, v);
    else if (field == "specificity") r.specificity = parse_value<double>(key, v);
    else throw ParameterError("unknown config key '" + key + "'");
  } else {
    throw ParameterError("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

GeneratedData generate_data(const ExperimentConfig& config) {
  config.validate();
  const auto samples = generate_dataset(config.n_samples, config.feature_dim, config.class_balance,
                                        config.difficulty_mix, config.seed, config.features);
  const auto graded = grade_dataset(samples, config.panel, config.seed);
  GeneratedData out;
  out.split = split_dataset(graded, config.split, config.seed);
  const int roster[] = {config.panel.stage1[0].rater_id, config.panel.stage1[1].rater_id,
                        config.panel.adjudicator.rater_id};
  out.weights = compute_rater_weights(std::span<const Example>(out.split.train), roster);
  for (int id : out.weights.excluded) {
    out.split.warnings.push_back("rater " + std::to_string(id) +
                                 " graded no training samples and has no fusion weight");
    // Weight-free raters still need an entry for soft labels on other splits.
    out.weights.weights[id] = kRaterWeightFloor;
  }
  assign_soft_labels(out.split.train, out.weights);
  assign_soft_labels(out.split.val, out.weights);
  assign_soft_labels(out.split.test, out.weights);
  return out;
}

nlohmann::json cmd_generate(const ExperimentConfig& config) {
  const auto data = generate_data(config);
  ensure_dir(config.out_dir);
  write_dataset_csv(config.out_dir / "train.csv", data.split.train);
  write_dataset_csv(config.out_dir / "val.csv", data.split.val);
  write_dataset_csv(config.out_dir / "test.csv", data.split.test);

  Dataset all = data.split.train;
  all.insert(all.end(), data.split.val.begin(), data.split.val.end());
  all.insert(all.end(), data.split.test.begin(), data.split.test.end());

  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [id, w] : data.weights.weights) weights[std::to_string(id)] = w;

  nlohmann::json manifest = {
      {"config", config.to_json()},
      {"seed", config.seed},
      {"files", {"train.csv", "val.csv", "test.csv"}},
      {"counts",
       {{"all", counts_json(count_consensus(all))},
        {"train", counts_json(count_consensus(data.split.train))},
        {"val", counts_json(count_consensus(data.split.val))},
        {"test", counts_json(count_consensus(data.split.test))}}},
      {"rater_weights", weights},
      {"warnings", data.split.warnings},
  };
  write_text(config.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

FitResult cmd_train(const ExperimentConfig& config, const std::filesystem::path& data_dir) {
  config.validate();
  const auto train = read_dataset_csv(data_dir / "train.csv");
  const auto val = read_dataset_csv(data_dir / "val.csv");
  if (train.empty()) throw DataError("training set " + (data_dir / "train.csv").string() + " is empty");

  ModelConfig mc = config.model_config();
  mc.input_dim = train.front().sample.features.size();
  TrainConfig tc = config.train;
  tc.seed = config.seed;

  ensure_dir(config.out_dir);
  nlohmann::json snapshot = {{"config", config.to_json()},
                             {"seed", config.seed},
                             {"data_dir", data_dir.string()},
                             {"model", model_config_to_json(mc)}};
  write_text(config.out_dir / "config.json", snapshot.dump(2) + "\n");

  std::ofstream log(config.out_dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
  if (!log) throw DataError("cannot open training log for writing");
  auto result = fit(train, val, mc, tc, [&](const EpochLog& rec) {
    auto j = rec.to_json();
    j["seed"] = config.seed;
    log << j.dump() << '\n' << std::flush;
  });

  Checkpoint ck;
  ck.config = mc;
  ck.config.multi_branch = tc.ablation.multi_branch;
  ck.params = result.params;
  ck.metadata = {{"config", config.to_json()},
                 {"seed", config.seed},
                 {"ablation", tc.ablation.name()},
                 {"best_epoch", result.best_epoch},
                 {"best_val_auc", std::isfinite(result.best_val_auc)
                                      ? nlohmann::json(result.best_val_auc)
                                      : nlohmann::json(nullptr)},
                 {"diverged", result.diverged}};
  save_checkpoint(config.out_dir / "checkpoint.json", ck);
  return result;
}

EvalReport cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                    const std::filesystem::path& dataset) {
  const auto ck = load_checkpoint(checkpoint);
  std::error_code ec;
  if (std::filesystem::file_size(dataset, ec) == 0 && !ec) {
    throw ParameterError("dataset " + dataset.string() + " is empty");
  }
  const auto data = read_dataset_csv(dataset);
  if (data.empty()) throw ParameterError("dataset " + dataset.string() + " has no records");
  if (data.front().sample.features.size() != ck.config.input_dim) {
    throw DataError("dataset has " + std::to_string(data.front().sample.features.size()) +
                    " features but the checkpoint expects " + std::to_string(ck.config.input_dim));
  }
  const auto report = evaluate(ck.params, data, config.threshold);

  ensure_dir(config.out_dir);
  nlohmann::json doc = {{"config", config.to_json()},
                        {"seed", config.seed},
                        {"checkpoint", checkpoint.string()},
                        {"checkpoint_metadata", ck.metadata},
                        {"dataset", dataset.string()},
                        {"report", report_to_json(report)}};
  write_text(config.out_dir / "report.json", doc.dump(2) + "\n");
  write_text(config.out_dir / "report.txt", format_report_table(report));
  return report;
}

std::vector<AblationFlags> ablation_arms() {
  return {AblationFlags::from_name("baseline"), AblationFlags::from_name("multibr"),
          AblationFlags::from_name("conloss"), AblationFlags::from_name("uncerty"),
          AblationFlags::from_name("full")};
}

std::string arm_label(const AblationFlags& arm) {
  if (!arm.multi_branch) return "Baseline";
  std::string label = "MultiBr";
  if (arm.consensus_loss) label += " + ConLoss";
  if (arm.uncertainty_weighting) label += " + Uncerty";
  return label;
}

AblationGrid run_ablation(const ExperimentConfig& config, const std::vector<AblationFlags>& arms) {
  config.validate();
  AblationGrid grid;
  for (const auto& arm : arms) grid.arms.push_back({arm, {}, false, {}});
  for (std::size_t k = 0; k < config.ablation_seeds; ++k) {
    ExperimentConfig run = config;
    run.seed = config.seed + k;
    grid.seeds.push_back(run.seed);
    const auto data = generate_data(run);
    for (auto& arm : grid.arms) {
      if (arm.failed) continue;
      try {
        TrainConfig tc = run.train;
        tc.ablation = arm.arm;
        tc.seed = run.seed;
        const auto result = fit(data.split.train, data.split.val, run.model_config(), tc);
        if (result.diverged) throw TrainingDiverged(result.message);
        arm.per_seed.push_back(evaluate(result.params, data.split.test, run.threshold));
      } catch (const std::exception& e) {
        arm.failed = true;
        arm.error = "seed " + std::to_string(run.seed) + ": " + e.what();
      }
    }
  }
  return grid;
}

nlohmann::json ablation_to_json(const AblationGrid& grid, const ExperimentConfig& config) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& arm : grid.arms) {
    nlohmann::json summary = nlohmann::json::object();
    for (int m = 0; m < 5; ++m) {
      std::vector<double> xs;
      for (const auto& r : arm.per_seed) xs.push_back(fusion_metric(r, m));
      const auto ms = mean_sd(xs);
      summary[kMetricNames[m]] = {{"mean", ms.mean}, {"sd", ms.sd}, {"values", xs}};
    }
    nlohmann::json per_seed = nlohmann::json::array();
    for (std::size_t i = 0; i < arm.per_seed.size(); ++i) {
      per_seed.push_back({{"seed", grid.seeds.at(i)}, {"report", report_to_json(arm.per_seed[i])}});
    }
    arms.push_back({{"arm", arm.arm.name()},
                    {"label", arm_label(arm.arm)},
                    {"failed", arm.failed},
                    {"error", arm.error},
                    {"fusion_all", summary},
                    {"per_seed", per_seed}});
  }
  return {{"config", config.to_json()}, {"seed", config.seed}, {"seeds", grid.seeds},
          {"arms", arms}};
}

std::string format_ablation_table(const AblationGrid& grid) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s|%15s%15s%15s%15s%15s\n", "Method", "Acc", "Sen", "Spec",
                "F1", "AUC");
  os << buf << std::string(28 + 1 + 75, '-') << '\n';
  for (const auto& arm : grid.arms) {
    std::snprintf(buf, sizeof buf, "%-28s|", arm_label(arm.arm).c_str());
    os << buf;
    if (arm.failed) {
      os << "  FAILED: " << arm.error << '\n';
      continue;
    }
    for (int m = 0; m < 5; ++m) {
      std::vector<double> xs;
      for (const auto& r : arm.per_seed) xs.push_back(fusion_metric(r, m));
      const auto ms = mean_sd(xs);
      std::snprintf(buf, sizeof buf, "  %7.2f ± %4.2f", 100.0 * ms.mean, 100.0 * ms.sd);
      os << buf;
    }
    os << '\n';
  }
  os << "(fusion branch, all test data, mean ± sd over " << grid.seeds.size() << " seeds, %)\n";
  return os.str();
}

AblationGrid cmd_ablation(const ExperimentConfig& config) {
  auto grid = run_ablation(config);
  ensure_dir(config.out_dir);
  write_text(config.out_dir / "ablation.json", ablation_to_json(grid, config).dump(2) + "\n");
  write_text(config.out_dir / "ablation.txt", format_ablation_table(grid));
  return grid;
}

}  // namespace mrc

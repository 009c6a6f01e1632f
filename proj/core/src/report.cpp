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

#include "mrc/report.hpp"

#include <cstdio>
#include <sstream>

namespace mrc {
namespace {

nlohmann::json value_or_null(double v, bool defined) {
  return defined ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json metrics_json(const BranchStratumMetrics& m) {
  const auto& c = m.confusion;
  return {{"acc", c.acc},
          {"sen", value_or_null(c.sen, c.sen_defined)},
          {"spec", value_or_null(c.spec, c.spec_defined)},
          {"f1", value_or_null(c.f1, c.f1_defined)},
          {"auc", m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr)},
          {"tp", c.tp},
          {"fp", c.fp},
          {"tn", c.tn},
          {"fn", c.fn}};
}

// Percentage with two decimals, or "-" when undefined.
std::string pct(double v, bool defined) {
  if (!defined) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json strata = nlohmann::json::object();
  for (Stratum s : kStrata) {
    const auto& sum = report.stratum(s);
    nlohmann::json branches = nlohmann::json::object();
    for (BranchId b : kBranches) {
      const auto& m = report.at(b, s);
      branches[to_string(b)] = m ? metrics_json(*m) : nlohmann::json(nullptr);
    }
    strata[to_string(s)] = {
        {"count", sum.count},
        {"mean_uncertainty",
         sum.mean_uncertainty ? nlohmann::json(*sum.mean_uncertainty) : nlohmann::json(nullptr)},
        {"branches", std::move(branches)}};
  }
  return {{"threshold", report.threshold},
          {"multi_branch", report.multi_branch},
          {"strata", std::move(strata)}};
}

std::string format_report_table(const EvalReport& report) {
  constexpr std::size_t kName = 8;
  constexpr std::size_t kCell = 8;
  std::ostringstream os;

  os << pad("Branch", kName) << " |" << pad("Consensus Data", 3 * kCell) << " |"
     << pad("Non-Consensus Data", 3 * kCell) << " |" << pad("All Data", 3 * kCell) << '\n';
  os << pad("", kName) << " |";
  for (int g = 0; g < 3; ++g) {
    os << pad("Sen", kCell) << pad("Spec", kCell) << pad("AUC", kCell) << (g < 2 ? " |" : "");
  }
  os << '\n' << std::string(kName + 3 * (3 * kCell + 2), '-') << '\n';

  for (BranchId b : kBranches) {
    os << pad(to_string(b), kName) << " |";
    for (Stratum s : kStrata) {
      const auto& m = report.at(b, s);
      if (m) {
        os << pad(pct(m->confusion.sen, m->confusion.sen_defined), kCell)
           << pad(pct(m->confusion.spec, m->confusion.spec_defined), kCell)
           << pad(pct(m->auc.value_or(0.0), m->auc.has_value()), kCell);
      } else {
        os << pad("-", kCell) << pad("-", kCell) << pad("-", kCell);
      }
      if (s != Stratum::kAll) os << " |";
    }
    os << '\n';
  }

  os << '\n' << pad("Branch", kName) << " |" << pad("Acc", kCell) << pad("F1", kCell)
     << "   (all data, threshold " << report.threshold << ")\n";
  for (BranchId b : kBranches) {
    const auto& m = report.at(b, Stratum::kAll);
    os << pad(to_string(b), kName) << " |"
       << pad(m ? pct(m->confusion.acc, true) : "-", kCell)
       << pad(m ? pct(m->confusion.f1, m->confusion.f1_defined) : "-", kCell) << '\n';
  }

  os << '\n';
  for (Stratum s : kStrata) {
    const auto& sum = report.stratum(s);
    char buf[96];
    if (sum.mean_uncertainty) {
      std::snprintf(buf, sizeof buf, "%-14s n=%-6zu mean u=%.4f\n", to_string(s).c_str(),
                    sum.count, *sum.mean_uncertainty);
    } else {
      std::snprintf(buf, sizeof buf, "%-14s n=%-6zu mean u=-\n", to_string(s).c_str(), sum.count);
    }
    os << buf;
  }
  return os.str();
}

}  // namespace mrc

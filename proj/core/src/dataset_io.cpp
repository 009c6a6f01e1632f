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

#include "mrc/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/error.hpp"

namespace mrc {
namespace {

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_pair(const RaterLabel& r) {
  return std::to_string(r.rater_id) + ":" + std::to_string(r.label);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no, const char* field) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + field + " '" +
                    std::string(text) + "'");
  }
  return value;
}

RaterLabel parse_pair(std::string_view text, std::size_t line_no) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DataError("line " + std::to_string(line_no) + ": rater label '" + std::string(text) +
                    "' is not rater_id:label");
  }
  return {parse_number<int>(text.substr(0, colon), line_no, "rater id"),
          parse_number<int>(text.substr(colon + 1), line_no, "rater label")};
}

}  // namespace

void write_dataset_csv(std::ostream& out, std::span<const Example> data) {
  const std::size_t dim = data.empty() ? 0 : data.front().sample.features.size();
  out << "sample_id";
  for (std::size_t j = 0; j < dim; ++j) out << ",f_" << j;
  out << ",true_label,rater_labels,adjudicator_label,consensus,final_label,soft_label\n";

  for (const auto& ex : data) {
    if (ex.sample.features.size() != dim) {
      throw DataError("feature dimension differs between samples");
    }
    out << ex.sample.sample_id;
    for (double f : ex.sample.features) out << ',' << format_real(f);
    out << ',' << ex.sample.true_label << ',';
    for (std::size_t i = 0; i < ex.record.stage1.size(); ++i) {
      if (i) out << ';';
      out << format_pair(ex.record.stage1[i]);
    }
    out << ',';
    if (ex.record.adjudicator) out << format_pair(*ex.record.adjudicator);
    out << ',' << ex.record.consensus << ',' << ex.record.final_label << ','
        << format_real(ex.record.soft_label) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset CSV is empty");
  const auto header = split(line, ',');
  constexpr std::size_t kFixed = 7;
  if (header.size() < kFixed || header.front() != "sample_id") {
    throw DataError("dataset CSV header must start with sample_id");
  }
  const std::size_t dim = header.size() - kFixed;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[1 + j] != "f_" + std::to_string(j)) {
      throw DataError("dataset CSV header: expected f_" + std::to_string(j));
    }
  }
  static constexpr std::string_view kTail[] = {"true_label", "rater_labels", "adjudicator_label",
                                               "consensus", "final_label", "soft_label"};
  for (std::size_t i = 0; i < 6; ++i) {
    if (header[1 + dim + i] != kTail[i]) {
      throw DataError("dataset CSV header: expected " + std::string(kTail[i]));
    }
  }

  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(cols.size()));
    }
    Example ex;
    ex.sample.sample_id = parse_number<std::int64_t>(cols[0], line_no, "sample_id");
    ex.sample.features.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      ex.sample.features.push_back(parse_number<double>(cols[1 + j], line_no, "feature"));
    }
    ex.sample.true_label = parse_number<int>(cols[1 + dim], line_no, "true_label");
    ex.sample.difficulty = std::numeric_limits<double>::quiet_NaN();

    auto& rec = ex.record;
    rec.sample_id = ex.sample.sample_id;
    if (!cols[2 + dim].empty()) {
      for (auto pair : split(cols[2 + dim], ';')) rec.stage1.push_back(parse_pair(pair, line_no));
    }
    if (!cols[3 + dim].empty()) rec.adjudicator = parse_pair(cols[3 + dim], line_no);
    rec.consensus = parse_number<int>(cols[4 + dim], line_no, "consensus");
    rec.final_label = parse_number<int>(cols[5 + dim], line_no, "final_label");
    rec.soft_label = parse_number<double>(cols[6 + dim], line_no, "soft_label");
    rec.validate();
    data.push_back(std::move(ex));
  }
  return data;
}

void write_dataset_csv(const std::filesystem::path& path, std::span<const Example> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_dataset_csv(out, data);
  if (!out) throw DataError("failed writing " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_dataset_csv(in);
}

}  // namespace mrc

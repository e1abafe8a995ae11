/*
 * Copyright 2026 The drltr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "drltr/dataset.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "drltr/errors.h"
#include "drltr/random.h"

namespace drltr {

double RelevanceProb(int label) {
  if (label < 0 || label > kMaxLabel) {
    throw DomainError("label " + std::to_string(label) + " outside {0..4}");
  }
  return 0.25 * label;
}

Query::Query(int query_id, const std::vector<int>& labels,
             const std::vector<std::vector<double>>& features)
    : id_(query_id) {
  if (labels.empty()) {
    throw std::invalid_argument("query " + std::to_string(query_id) + " has no items");
  }
  if (labels.size() != features.size()) {
    throw std::invalid_argument("labels and feature rows differ in length");
  }
  const int n = static_cast<int>(labels.size());
  const int dim = static_cast<int>(features[0].size());
  features_.resize(n, dim);
  items_.reserve(n);
  relevance_.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(features[i].size()) != dim) {
      throw std::invalid_argument("ragged feature rows in query " +
                                  std::to_string(query_id));
    }
    Item item;
    item.item_id = i;
    item.features = features[i];
    item.label = labels[i];
    item.relevance_prob = RelevanceProb(labels[i]);
    for (int j = 0; j < dim; ++j) features_(i, j) = features[i][j];
    relevance_.push_back(item.relevance_prob);
    items_.push_back(std::move(item));
  }
}

Query Query::WithFeatures(const Eigen::MatrixXd& features) const {
  if (features.rows() != features_.rows()) {
    throw std::invalid_argument("feature matrix row count mismatch");
  }
  Query copy = *this;
  copy.features_ = features;
  for (int i = 0; i < size(); ++i) {
    copy.items_[i].features.resize(features.cols());
    for (int j = 0; j < features.cols(); ++j) copy.items_[i].features[j] = features(i, j);
  }
  return copy;
}

std::string_view PartitionName(Partition p) {
  switch (p) {
    case Partition::kTrain:
      return "train";
    case Partition::kValidation:
      return "validation";
    case Partition::kTest:
      return "test";
  }
  return "unknown";
}

Partition ParsePartition(std::string_view name) {
  if (name == "train") return Partition::kTrain;
  if (name == "validation") return Partition::kValidation;
  if (name == "test") return Partition::kTest;
  throw std::invalid_argument("unknown partition '" + std::string(name) + "'");
}

const std::vector<Query>& Dataset::partition(Partition p) const {
  switch (p) {
    case Partition::kTrain:
      return train;
    case Partition::kValidation:
      return validation;
    case Partition::kTest:
      return test;
  }
  throw std::invalid_argument("bad partition");
}

int Dataset::MaxQuerySize() const {
  int m = 0;
  for (const auto* part : {&train, &validation, &test}) {
    for (const Query& q : *part) m = std::max(m, q.size());
  }
  return m;
}

void Dataset::Validate() const {
  if (feature_dim <= 0) throw std::invalid_argument("feature_dim must be positive");
  std::set<int> seen;
  for (const auto* part : {&train, &validation, &test}) {
    std::set<int> local;
    for (const Query& q : *part) {
      if (q.feature_dim() != feature_dim) {
        throw std::invalid_argument("query " + std::to_string(q.id()) +
                                    " has feature dimension " +
                                    std::to_string(q.feature_dim()));
      }
      local.insert(q.id());
    }
    for (int id : local) {
      if (!seen.insert(id).second) {
        throw std::invalid_argument("query id " + std::to_string(id) +
                                    " appears in more than one partition");
      }
    }
  }
}

namespace {

std::string ReadMaybeGzipped(const std::string& path) {
  // gzread passes non-gzip input through unchanged, so this covers both.
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw std::runtime_error("cannot open " + path);
  std::string out;
  char buffer[1 << 16];
  int n = 0;
  while ((n = gzread(file, buffer, sizeof(buffer))) > 0) out.append(buffer, n);
  const bool failed = n < 0;
  gzclose(file);
  if (failed) throw std::runtime_error("read error in " + path);
  return out;
}

template <typename T>
bool ParseNumber(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

struct PendingQuery {
  int qid;
  std::vector<int> labels;
  std::vector<std::map<int, double>> features;
};

}  // namespace

Dataset ParseLetor(std::string_view text) {
  std::vector<PendingQuery> pending;
  std::unordered_map<int, size_t> index_of_qid;
  int max_fid = 0;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::vector<std::string_view> tokens;
    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) continue;

    int label = 0;
    if (!ParseNumber(tokens[0], label)) {
      double real_label = 0;
      if (!ParseNumber(tokens[0], real_label) || std::floor(real_label) != real_label) {
        throw ParseError("expected integer label, got '" + std::string(tokens[0]) + "'",
                         line_no);
      }
      label = static_cast<int>(real_label);
    }
    if (label < 0 || label > kMaxLabel) {
      const int clamped = std::clamp(label, 0, kMaxLabel);
      std::cerr << "warning: line " << line_no << ": label " << label
                << " clamped to " << clamped << "\n";
      label = clamped;
    }
    if (tokens.size() < 2 || tokens[1].substr(0, 4) != "qid:") {
      throw ParseError("expected 'qid:<id>' after the label", line_no);
    }
    int qid = 0;
    if (!ParseNumber(tokens[1].substr(4), qid)) {
      throw ParseError("bad query id '" + std::string(tokens[1]) + "'", line_no);
    }
    std::map<int, double> feats;
    for (size_t t = 2; t < tokens.size(); ++t) {
      const size_t colon = tokens[t].find(':');
      int fid = 0;
      double value = 0;
      if (colon == std::string_view::npos || !ParseNumber(tokens[t].substr(0, colon), fid) ||
          !ParseNumber(tokens[t].substr(colon + 1), value) || fid < 1) {
        throw ParseError("bad feature '" + std::string(tokens[t]) + "'", line_no);
      }
      feats[fid] = value;
      max_fid = std::max(max_fid, fid);
    }
    auto [it, inserted] = index_of_qid.try_emplace(qid, pending.size());
    if (inserted) pending.push_back(PendingQuery{qid, {}, {}});
    PendingQuery& q = pending[it->second];
    q.labels.push_back(label);
    q.features.push_back(std::move(feats));
  }
  if (pending.empty()) throw ParseError("empty dataset", 0);

  Dataset dataset;
  dataset.feature_dim = std::max(max_fid, 1);
  for (const PendingQuery& p : pending) {
    std::vector<std::vector<double>> rows;
    rows.reserve(p.features.size());
    for (const auto& sparse : p.features) {
      std::vector<double> row(dataset.feature_dim, 0.0);
      for (const auto& [fid, value] : sparse) row[fid - 1] = value;
      rows.push_back(std::move(row));
    }
    dataset.train.emplace_back(p.qid, p.labels, rows);
  }
  return dataset;
}

Dataset LoadLetor(const std::string& path) { return ParseLetor(ReadMaybeGzipped(path)); }

std::string FormatLetor(const std::vector<Query>& queries) {
  std::string out;
  char buf[64];
  for (const Query& q : queries) {
    for (const Item& item : q.items()) {
      out += std::to_string(item.label);
      out += " qid:";
      out += std::to_string(q.id());
      for (size_t j = 0; j < item.features.size(); ++j) {
        std::snprintf(buf, sizeof(buf), " %zu:%.17g", j + 1, item.features[j]);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

void SaveLetor(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << FormatLetor(dataset.train) << FormatLetor(dataset.validation)
      << FormatLetor(dataset.test);
}

Dataset SplitQueries(std::vector<Query> queries, int feature_dim) {
  const int n = static_cast<int>(queries.size());
  const int n_valid = n / 5;
  const int n_test = n / 5;
  const int n_train = n - n_valid - n_test;
  Dataset d;
  d.feature_dim = feature_dim;
  for (int i = 0; i < n; ++i) {
    auto& target = i < n_train ? d.train : (i < n_train + n_valid ? d.validation : d.test);
    target.push_back(std::move(queries[i]));
  }
  return d;
}

Dataset GenerateSynthetic(int n_queries, int items_per_query, int feature_dim,
                          uint64_t seed) {
  SyntheticOptions options;
  options.n_queries = n_queries;
  options.items_per_query = items_per_query;
  options.feature_dim = feature_dim;
  options.seed = seed;
  return GenerateSynthetic(options);
}

Dataset GenerateSynthetic(const SyntheticOptions& o) {
  if (o.n_queries < 1 || o.items_per_query < 1 || o.feature_dim < 1) {
    throw std::invalid_argument("synthetic dataset sizes must be >= 1");
  }
  const bool explicit_split = o.n_train || o.n_validation || o.n_test;
  const int total = explicit_split
                        ? o.n_train.value_or(0) + o.n_validation.value_or(0) +
                              o.n_test.value_or(0)
                        : o.n_queries;
  if (total < 1) throw std::invalid_argument("synthetic split sizes sum to zero");

  // Grade distribution skewed towards non-relevant items, as in web search.
  constexpr double kGradeMass[kMaxLabel + 1] = {0.40, 0.25, 0.17, 0.11, 0.07};

  Rng rng(DeriveSeed(o.seed, {0x5157}));
  // Cluster centres: grade g sits at g * separation along a random unit
  // direction, plus a small grade-specific offset so the label is not a purely
  // linear function of the features.
  std::vector<double> direction(o.feature_dim);
  double norm = 0;
  for (double& v : direction) {
    v = rng.Normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  std::vector<std::vector<double>> centres(kMaxLabel + 1,
                                           std::vector<double>(o.feature_dim));
  for (int g = 0; g <= kMaxLabel; ++g) {
    for (int j = 0; j < o.feature_dim; ++j) {
      centres[g][j] = g * o.grade_separation * std::sqrt(o.feature_dim) * direction[j] / norm +
                      0.25 * rng.Normal();
    }
  }

  std::vector<Query> queries;
  queries.reserve(total);
  for (int q = 0; q < total; ++q) {
    std::vector<int> labels(o.items_per_query);
    std::vector<std::vector<double>> rows(o.items_per_query,
                                          std::vector<double>(o.feature_dim));
    for (int i = 0; i < o.items_per_query; ++i) {
      double u = rng.Uniform();
      int g = 0;
      while (g < kMaxLabel && u >= kGradeMass[g]) u -= kGradeMass[g++];
      labels[i] = g;
      for (int j = 0; j < o.feature_dim; ++j) rows[i][j] = centres[g][j] + rng.Normal();
    }
    queries.emplace_back(q, labels, rows);
  }

  if (!explicit_split) return SplitQueries(std::move(queries), o.feature_dim);
  Dataset d;
  d.feature_dim = o.feature_dim;
  const int n_train = o.n_train.value_or(0);
  const int n_valid = o.n_validation.value_or(0);
  for (int i = 0; i < total; ++i) {
    auto& target = i < n_train ? d.train : (i < n_train + n_valid ? d.validation : d.test);
    target.push_back(std::move(queries[i]));
  }
  return d;
}

MinMaxScaler MinMaxScaler::Fit(const std::vector<Query>& queries) {
  if (queries.empty()) throw std::invalid_argument("cannot fit scaler on no queries");
  MinMaxScaler s;
  const int dim = queries[0].feature_dim();
  s.min_ = Eigen::RowVectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  Eigen::RowVectorXd max = Eigen::RowVectorXd::Constant(dim, -std::numeric_limits<double>::infinity());
  for (const Query& q : queries) {
    s.min_ = s.min_.cwiseMin(q.features().colwise().minCoeff());
    max = max.cwiseMax(q.features().colwise().maxCoeff());
  }
  s.range_ = max - s.min_;
  return s;
}

Query MinMaxScaler::Apply(const Query& query) const {
  Eigen::MatrixXd scaled = query.features();
  for (int j = 0; j < scaled.cols(); ++j) {
    if (range_[j] > 0) {
      scaled.col(j) = (scaled.col(j).array() - min_[j]) / range_[j];
    } else {
      scaled.col(j).setZero();
    }
  }
  return query.WithFeatures(scaled);
}

Dataset MinMaxScaler::Apply(const Dataset& dataset) const {
  Dataset out;
  out.feature_dim = dataset.feature_dim;
  for (const Query& q : dataset.train) out.train.push_back(Apply(q));
  for (const Query& q : dataset.validation) out.validation.push_back(Apply(q));
  for (const Query& q : dataset.test) out.test.push_back(Apply(q));
  return out;
}

}  // namespace drltr

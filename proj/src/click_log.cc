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

#include "drltr/click_log.h"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "drltr/errors.h"
#include "json.hpp"

namespace drltr {

using nlohmann::json;

ClickLog ClickLog::Filter(Partition partition) const {
  ClickLog out;
  for (const Impression& imp : impressions) {
    if (imp.partition == partition) out.impressions.push_back(imp);
  }
  return out;
}

std::string FormatClickLog(const ClickLog& log) {
  std::string out;
  for (const Impression& imp : log.impressions) {
    json j;
    j["query_id"] = imp.query_id;
    j["partition"] = std::string(PartitionName(imp.partition));
    j["ranking"] = imp.ranking;
    j["clicks"] = imp.clicks;
    out += j.dump();
    out += '\n';
  }
  return out;
}

ClickLog ParseClickLog(const std::string& text) {
  ClickLog log;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Impression imp;
      imp.query_id = j.at("query_id").get<int>();
      imp.partition = ParsePartition(j.at("partition").get<std::string>());
      imp.ranking = j.at("ranking").get<std::vector<int>>();
      imp.clicks = j.at("clicks").get<std::vector<int>>();
      if (imp.ranking.size() != imp.clicks.size()) {
        throw ParseError("ranking and clicks differ in length", line_no);
      }
      log.impressions.push_back(std::move(imp));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return log;
}

void WriteClickLog(const ClickLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << FormatClickLog(log);
}

ClickLog ReadClickLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseClickLog(buffer.str());
}

QueryClickStats QueryClickStats::Empty(int query_id, int n_items) {
  QueryClickStats s;
  s.query_id = query_id;
  s.displays = Eigen::MatrixXd::Zero(n_items, n_items);
  s.clicks = Eigen::MatrixXd::Zero(n_items, n_items);
  return s;
}

void QueryClickStats::Add(const std::vector<int>& ranking, const std::vector<int>& c) {
  const int n = num_items();
  if (ranking.size() != c.size() || static_cast<int>(ranking.size()) > n) {
    throw std::invalid_argument("impression does not fit query " + std::to_string(query_id));
  }
  std::vector<char> seen(n, 0);
  for (size_t k = 0; k < ranking.size(); ++k) {
    const int d = ranking[k];
    if (d < 0 || d >= n || seen[d]) {
      throw std::invalid_argument("bad or repeated item in ranking of query " +
                                  std::to_string(query_id));
    }
    seen[d] = 1;
    displays(d, k) += 1;
    clicks(d, k) += c[k] != 0 ? 1 : 0;
  }
  ++n_impressions;
}

Eigen::VectorXd QueryClickStats::ClickTotals() const { return clicks.rowwise().sum(); }

Eigen::VectorXd QueryClickStats::WeightedDisplays(const std::vector<double>& per_position) const {
  if (static_cast<int>(per_position.size()) != num_positions()) {
    throw std::invalid_argument("per-position vector has wrong length");
  }
  return displays * Eigen::Map<const Eigen::VectorXd>(per_position.data(),
                                                      per_position.size());
}

std::vector<double> AlphaVector(const BiasParams& params, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = params.Alpha(k);
  return v;
}

std::vector<double> BetaVector(const BiasParams& params, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = params.Beta(k);
  return v;
}

namespace {

std::unordered_map<int, const Query*> IndexQueries(const Dataset& dataset) {
  std::unordered_map<int, const Query*> index;
  for (const auto* part : {&dataset.train, &dataset.validation, &dataset.test}) {
    for (const Query& q : *part) index[q.id()] = &q;
  }
  return index;
}

}  // namespace

std::map<int, QueryClickStats> AggregateLog(const ClickLog& log, const Dataset& dataset) {
  const auto index = IndexQueries(dataset);
  std::map<int, QueryClickStats> stats;
  for (const Impression& imp : log.impressions) {
    auto it = stats.find(imp.query_id);
    if (it == stats.end()) {
      auto q = index.find(imp.query_id);
      if (q == index.end()) {
        throw std::invalid_argument("log names unknown query " + std::to_string(imp.query_id));
      }
      it = stats.emplace(imp.query_id, QueryClickStats::Empty(imp.query_id, q->second->size()))
               .first;
    }
    it->second.Add(imp.ranking, imp.clicks);
  }
  return stats;
}

ClickLog CollectLog(const RankingSampler& sampler, const Dataset& dataset, int n,
                    const BiasParams& params, Rng& rng) {
  if (n < 1) throw std::invalid_argument("log size must be >= 1 (empty log)");
  const int n_train = static_cast<int>(dataset.train.size());
  const int n_pool = n_train + static_cast<int>(dataset.validation.size());
  if (n_pool == 0) throw std::invalid_argument("no train or validation queries to log");
  ClickLog log;
  log.impressions.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int pick = rng.UniformInt(n_pool);
    const bool is_train = pick < n_train;
    const Query& q = is_train ? dataset.train[pick] : dataset.validation[pick - n_train];
    Impression imp;
    imp.query_id = q.id();
    imp.partition = is_train ? Partition::kTrain : Partition::kValidation;
    imp.ranking = sampler(q, rng);
    imp.clicks = SimulateSession(imp.ranking, q.relevance(), params, rng);
    log.impressions.push_back(std::move(imp));
  }
  return log;
}

}  // namespace drltr

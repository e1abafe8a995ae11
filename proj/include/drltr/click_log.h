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
// Logged impressions, their JSON-lines serialization, per-query sufficient
// statistics and log collection.
//
// JSON-lines layout, one impression per line:
//   {"query_id": 3, "partition": "train", "ranking": [4, 0, 2], "clicks": [0, 1, 0]}
// `ranking` lists item ids from the top position down; `clicks[k]` belongs to
// `ranking[k]`.

#ifndef DRLTR_CLICK_LOG_H_
#define DRLTR_CLICK_LOG_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drltr/click_model.h"
#include "drltr/dataset.h"
#include "drltr/random.h"

namespace drltr {

struct Impression {
  int query_id = 0;
  Partition partition = Partition::kTrain;
  std::vector<int> ranking;
  std::vector<int> clicks;

  bool operator==(const Impression& other) const = default;
};

struct ClickLog {
  std::vector<Impression> impressions;

  int size() const { return static_cast<int>(impressions.size()); }
  // Impressions carrying the given partition tag, in log order.
  ClickLog Filter(Partition partition) const;
};

void WriteClickLog(const ClickLog& log, const std::string& path);
ClickLog ReadClickLog(const std::string& path);
std::string FormatClickLog(const ClickLog& log);
ClickLog ParseClickLog(const std::string& text);

// Counts for one query: displays(d, k) and clicks(d, k) over that query's
// impressions, with k covering every position of the query (0..size-1).
struct QueryClickStats {
  int query_id = 0;
  int n_impressions = 0;
  Eigen::MatrixXd displays;
  Eigen::MatrixXd clicks;

  int num_items() const { return static_cast<int>(displays.rows()); }
  int num_positions() const { return static_cast<int>(displays.cols()); }

  // Empty counts for a query with `n_items` items.
  static QueryClickStats Empty(int query_id, int n_items);
  // Adds one impression. Throws std::invalid_argument on repeated or
  // out-of-range items.
  void Add(const std::vector<int>& ranking, const std::vector<int>& clicks);

  // Per-item totals: clicks C_d, sum_k n(d,k) alpha_k and sum_k n(d,k) beta_k.
  Eigen::VectorXd ClickTotals() const;
  Eigen::VectorXd WeightedDisplays(const std::vector<double>& per_position) const;
};

// Per-position vector of length `n` read from bias parameters (zero beyond
// the cutoff).
std::vector<double> AlphaVector(const BiasParams& params, int n);
std::vector<double> BetaVector(const BiasParams& params, int n);

// Stats for every query with at least one impression, ordered by query id.
// Throws std::invalid_argument for impressions naming unknown queries.
std::map<int, QueryClickStats> AggregateLog(const ClickLog& log, const Dataset& dataset);

// Produces the ranking shown for a query.
using RankingSampler = std::function<std::vector<int>(const Query&, Rng&)>;

// N impressions: a query drawn uniformly over train + validation, a ranking
// from `sampler`, clicks from `params`. Each impression is tagged with the
// partition of its query. Throws std::invalid_argument if n < 1.
ClickLog CollectLog(const RankingSampler& sampler, const Dataset& dataset, int n,
                    const BiasParams& params, Rng& rng);

}  // namespace drltr

#endif  // DRLTR_CLICK_LOG_H_

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
// Learning-to-rank datasets: queries with graded items, LETOR/SVMlight I/O and
// a synthetic generator whose features are noisy functions of the label.

#ifndef DRLTR_DATASET_H_
#define DRLTR_DATASET_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace drltr {

inline constexpr int kMaxLabel = 4;

// P(R = 1 | d) = 0.25 * label. Throws DomainError outside {0, ..., 4}.
double RelevanceProb(int label);

struct Item {
  int item_id = 0;
  std::vector<double> features;
  int label = 0;
  double relevance_prob = 0.0;
};

// One ranking context. Items are numbered 0..size()-1 in storage order and the
// feature matrix (one row per item) is built once at construction.
class Query {
 public:
  // Builds items from labels and feature rows; item ids are assigned 0..n-1.
  Query(int query_id, const std::vector<int>& labels,
        const std::vector<std::vector<double>>& features);

  int id() const { return id_; }
  int size() const { return static_cast<int>(items_.size()); }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  const std::vector<Item>& items() const { return items_; }
  const Item& item(int i) const { return items_[i]; }
  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<double>& relevance() const { return relevance_; }

  // Copy with the feature matrix replaced (same shape).
  Query WithFeatures(const Eigen::MatrixXd& features) const;

 private:
  int id_;
  std::vector<Item> items_;
  Eigen::MatrixXd features_;
  std::vector<double> relevance_;
};

enum class Partition { kTrain = 0, kValidation = 1, kTest = 2 };

std::string_view PartitionName(Partition p);
Partition ParsePartition(std::string_view name);

struct Dataset {
  std::vector<Query> train;
  std::vector<Query> validation;
  std::vector<Query> test;
  int feature_dim = 0;

  const std::vector<Query>& partition(Partition p) const;
  int TotalQueries() const {
    return static_cast<int>(train.size() + validation.size() + test.size());
  }
  int MaxQuerySize() const;

  // Throws std::invalid_argument on feature_dim <= 0, mismatched dimensions or
  // a query id shared between partitions.
  void Validate() const;
};

// Reads "<label> qid:<q> <fid>:<val> ... [# comment]" lines. Queries are
// grouped by qid in order of first appearance; missing feature ids read as 0;
// labels outside {0..4} are clamped with a warning on stderr. Gzip input is
// detected by magic bytes. Everything lands in `train`; use SplitQueries to
// partition.
Dataset LoadLetor(const std::string& path);

// Parses LETOR text already in memory. Same contract as LoadLetor.
Dataset ParseLetor(std::string_view text);

// Writes every partition in LETOR text format (train, validation, test order)
// with 1-based feature ids and full float round-trip precision.
void SaveLetor(const Dataset& dataset, const std::string& path);
std::string FormatLetor(const std::vector<Query>& queries);

// Assigns queries to train/validation/test in order: the last
// floor(0.2 n) go to test, the floor(0.2 n) before them to validation.
Dataset SplitQueries(std::vector<Query> queries, int feature_dim);

struct SyntheticOptions {
  int n_queries = 1;
  int items_per_query = 1;
  int feature_dim = 1;
  uint64_t seed = 0;
  // Separation between the cluster centres of adjacent grades, in units of
  // the per-feature noise standard deviation.
  double grade_separation = 0.35;
  // Explicit split sizes; when unset the 60/20/20 rule of SplitQueries holds.
  std::optional<int> n_train, n_validation, n_test;
};

// Labels follow a fixed skewed grade distribution with mass on every grade;
// features are a label-dependent Gaussian cluster centre plus standard-normal
// noise. Pure function of its arguments.
Dataset GenerateSynthetic(int n_queries, int items_per_query, int feature_dim,
                          uint64_t seed);
Dataset GenerateSynthetic(const SyntheticOptions& options);

// Per-feature min-max scaling fitted on the training partition and applied to
// all partitions. Constant features map to 0.
class MinMaxScaler {
 public:
  static MinMaxScaler Fit(const std::vector<Query>& queries);
  Dataset Apply(const Dataset& dataset) const;
  Query Apply(const Query& query) const;

 private:
  Eigen::RowVectorXd min_, range_;
};

}  // namespace drltr

#endif  // DRLTR_DATASET_H_

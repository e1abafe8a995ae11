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
// Plackett-Luce ranking policies over MLP scores: sampling, deterministic
// ranking, rank marginals pi(k | d), and the supervised logging policy.

#ifndef DRLTR_POLICY_H_
#define DRLTR_POLICY_H_

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "drltr/dataset.h"
#include "drltr/mlp.h"
#include "drltr/random.h"

namespace drltr {

// Largest query for which exact marginals are enumerated (8! rankings).
inline constexpr int kExactMarginalThreshold = 8;

// Gumbel top-k: the first `length` items of a PL ranking with weights
// exp(score). Same distribution as sequential sampling without replacement.
std::vector<int> SampleRanking(const Eigen::VectorXd& scores, int length, Rng& rng);

// Items by descending score; ties go to the smaller index.
std::vector<int> DeterministicRanking(const Eigen::VectorXd& scores);

// log P(ranking) under PL for a (possibly partial) ranking.
double PlLogProb(const Eigen::VectorXd& scores, const std::vector<int>& ranking);
// Gradient of PlLogProb with respect to the scores.
Eigen::VectorXd PlLogProbGrad(const Eigen::VectorXd& scores, const std::vector<int>& ranking);

// Calls visit(ranking, probability) for every length-`length` PL prefix.
// Throws std::invalid_argument above kExactMarginalThreshold items.
void EnumerateRankings(const Eigen::VectorXd& scores, int length,
                       const std::function<void(const std::vector<int>&, double)>& visit);

// prob(d, k) = P(item d at position k). The matrix is n x n so it lines up
// with click statistics; columns at or beyond the ranking length are zero.
struct RankMarginals {
  Eigen::MatrixXd prob;
  bool exact = true;
  int samples = 0;  // Monte Carlo sample count, 0 for exact

  int num_items() const { return static_cast<int>(prob.rows()); }
};

RankMarginals ExactRankMarginals(const Eigen::VectorXd& scores, int length);
RankMarginals MonteCarloRankMarginals(const Eigen::VectorXd& scores, int length, int samples,
                                      Rng& rng);
// Marginals of a single fixed ranking over `n_items` items.
RankMarginals RankingMarginals(const std::vector<int>& ranking, int n_items);
// Average of indicator marginals over the given rankings.
RankMarginals EmpiricalMarginals(const std::vector<std::vector<int>>& rankings, int n_items);

enum class PolicyMode { kStochastic, kDeterministic };

struct MarginalMode {
  bool exact = true;
  int samples = 1000;
};

// Displayed ranking length for a query: min(cutoff, |D|).
inline int DisplayLength(const Query& query, int cutoff) {
  return cutoff < query.size() ? cutoff : query.size();
}

class PlPolicy {
 public:
  PlPolicy() = default;
  PlPolicy(Mlp model, PolicyMode mode) : model_(std::move(model)), mode_(mode) {}

  const Mlp& model() const { return model_; }
  Mlp& mutable_model() { return model_; }
  PolicyMode mode() const { return mode_; }

  Eigen::VectorXd Scores(const Query& query) const { return model_.Score(query.features()); }
  // PL sample in stochastic mode, the sorted ranking otherwise; truncated to
  // `length` items.
  std::vector<int> Rank(const Query& query, int length, Rng& rng) const;
  // Exact when requested and the query fits the threshold, Monte Carlo
  // otherwise. Deterministic policies always get exact indicator marginals.
  RankMarginals Marginals(const Query& query, int length, const MarginalMode& mode,
                          Rng& rng) const;

 private:
  Mlp model_;
  PolicyMode mode_ = PolicyMode::kStochastic;
};

struct LoggingPolicyConfig {
  double fraction = 0.01;  // share of training queries used
  int epochs = 100;
  double learning_rate = 0.05;
  // Multiplies the fitted scores (inverse PL temperature); larger values make
  // the logging policy closer to deterministic.
  double score_scale = 1.0;
  uint64_t seed = 0;
};

// Least-squares regression of relevance_prob on features over a random
// `fraction` of the training queries (at least one query), by full-batch
// gradient descent, then scaled by `score_scale`.
Mlp TrainLoggingModel(const Dataset& dataset, const LoggingPolicyConfig& config);

}  // namespace drltr

#endif  // DRLTR_POLICY_H_

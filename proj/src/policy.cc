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

#include "drltr/policy.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace drltr {

std::vector<int> SampleRanking(const Eigen::VectorXd& scores, int length, Rng& rng) {
  const int n = static_cast<int>(scores.size());
  length = std::clamp(length, 0, n);
  std::vector<std::pair<double, int>> keys(n);
  for (int i = 0; i < n; ++i) keys[i] = {scores[i] + rng.Gumbel(), i};
  std::partial_sort(keys.begin(), keys.begin() + length, keys.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> ranking(length);
  for (int k = 0; k < length; ++k) ranking[k] = keys[k].second;
  return ranking;
}

std::vector<int> DeterministicRanking(const Eigen::VectorXd& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

namespace {

// log sum_{i in remaining} exp(s_i), stable.
double LogSumExp(const Eigen::VectorXd& scores, const std::vector<char>& used) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scores.size(); ++i) {
    if (!used[i]) m = std::max(m, scores[i]);
  }
  double s = 0;
  for (int i = 0; i < scores.size(); ++i) {
    if (!used[i]) s += std::exp(scores[i] - m);
  }
  return m + std::log(s);
}

}  // namespace

double PlLogProb(const Eigen::VectorXd& scores, const std::vector<int>& ranking) {
  std::vector<char> used(scores.size(), 0);
  double lp = 0;
  for (int d : ranking) {
    lp += scores[d] - LogSumExp(scores, used);
    used[d] = 1;
  }
  return lp;
}

Eigen::VectorXd PlLogProbGrad(const Eigen::VectorXd& scores, const std::vector<int>& ranking) {
  const int n = static_cast<int>(scores.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  std::vector<char> used(n, 0);
  for (int d : ranking) {
    const double lse = LogSumExp(scores, used);
    for (int i = 0; i < n; ++i) {
      if (!used[i]) grad[i] -= std::exp(scores[i] - lse);
    }
    grad[d] += 1.0;
    used[d] = 1;
  }
  return grad;
}

void EnumerateRankings(const Eigen::VectorXd& scores, int length,
                       const std::function<void(const std::vector<int>&, double)>& visit) {
  const int n = static_cast<int>(scores.size());
  if (n > kExactMarginalThreshold) {
    throw std::invalid_argument("exact enumeration refused for " + std::to_string(n) +
                                " items (limit " + std::to_string(kExactMarginalThreshold) +
                                "); use Monte Carlo marginals");
  }
  length = std::clamp(length, 0, n);
  std::vector<int> prefix;
  std::vector<char> used(n, 0);
  std::function<void(double)> recurse = [&](double prob) {
    if (static_cast<int>(prefix.size()) == length) {
      visit(prefix, prob);
      return;
    }
    const double lse = LogSumExp(scores, used);
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      prefix.push_back(i);
      recurse(prob * std::exp(scores[i] - lse));
      prefix.pop_back();
      used[i] = 0;
    }
  };
  recurse(1.0);
}

RankMarginals ExactRankMarginals(const Eigen::VectorXd& scores, int length) {
  const int n = static_cast<int>(scores.size());
  RankMarginals m;
  m.prob = Eigen::MatrixXd::Zero(n, n);
  EnumerateRankings(scores, length, [&](const std::vector<int>& ranking, double p) {
    for (size_t k = 0; k < ranking.size(); ++k) m.prob(ranking[k], k) += p;
  });
  return m;
}

RankMarginals MonteCarloRankMarginals(const Eigen::VectorXd& scores, int length, int samples,
                                      Rng& rng) {
  if (samples < 1) throw std::invalid_argument("Monte Carlo marginals need >= 1 sample");
  const int n = static_cast<int>(scores.size());
  RankMarginals m;
  m.prob = Eigen::MatrixXd::Zero(n, n);
  m.exact = false;
  m.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const auto ranking = SampleRanking(scores, length, rng);
    for (size_t k = 0; k < ranking.size(); ++k) m.prob(ranking[k], k) += 1.0;
  }
  m.prob /= samples;
  return m;
}

RankMarginals RankingMarginals(const std::vector<int>& ranking, int n_items) {
  RankMarginals m;
  m.prob = Eigen::MatrixXd::Zero(n_items, n_items);
  for (size_t k = 0; k < ranking.size(); ++k) m.prob(ranking[k], k) = 1.0;
  return m;
}

RankMarginals EmpiricalMarginals(const std::vector<std::vector<int>>& rankings, int n_items) {
  if (rankings.empty()) throw std::invalid_argument("no rankings to average");
  RankMarginals m;
  m.prob = Eigen::MatrixXd::Zero(n_items, n_items);
  m.exact = false;
  m.samples = static_cast<int>(rankings.size());
  for (const auto& r : rankings) {
    for (size_t k = 0; k < r.size(); ++k) m.prob(r[k], k) += 1.0;
  }
  m.prob /= static_cast<double>(rankings.size());
  return m;
}

std::vector<int> PlPolicy::Rank(const Query& query, int length, Rng& rng) const {
  const Eigen::VectorXd scores = Scores(query);
  if (mode_ == PolicyMode::kDeterministic) {
    auto r = DeterministicRanking(scores);
    r.resize(std::clamp(length, 0, query.size()));
    return r;
  }
  return SampleRanking(scores, length, rng);
}

RankMarginals PlPolicy::Marginals(const Query& query, int length, const MarginalMode& mode,
                                  Rng& rng) const {
  const Eigen::VectorXd scores = Scores(query);
  if (mode_ == PolicyMode::kDeterministic) {
    auto r = DeterministicRanking(scores);
    r.resize(std::clamp(length, 0, query.size()));
    return RankingMarginals(r, query.size());
  }
  if (mode.exact && query.size() <= kExactMarginalThreshold) {
    return ExactRankMarginals(scores, length);
  }
  return MonteCarloRankMarginals(scores, length, mode.samples, rng);
}

Mlp TrainLoggingModel(const Dataset& dataset, const LoggingPolicyConfig& config) {
  if (dataset.train.empty()) throw std::invalid_argument("no training queries");
  if (!(config.score_scale > 0)) throw std::invalid_argument("logging score scale must be positive");
  Rng rng(DeriveSeed(config.seed, {0x109}));
  const int n_train = static_cast<int>(dataset.train.size());
  const int n_use = std::max(1, static_cast<int>(std::floor(config.fraction * n_train)));
  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n_use);

  int rows = 0;
  for (int i : order) rows += dataset.train[i].size();
  Eigen::MatrixXd x(rows, dataset.feature_dim);
  Eigen::VectorXd y(rows);
  int r = 0;
  for (int i : order) {
    const Query& q = dataset.train[i];
    x.middleRows(r, q.size()) = q.features();
    for (int d = 0; d < q.size(); ++d) y[r + d] = q.item(d).relevance_prob;
    r += q.size();
  }

  Mlp model(dataset.feature_dim);
  model.InitXavier(rng);
  SgdOptimizer opt(config.learning_rate);
  Mlp::Trace trace;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Eigen::VectorXd pred = model.Forward(x, &trace);
    const Eigen::VectorXd upstream = (pred - y) * (2.0 / rows);
    Eigen::VectorXd grad = model.Backward(trace, upstream);
    opt.Step(model.mutable_params(), grad);
  }
  // Output layer weights and bias sit at the end of the flat vector.
  const int out_params = model.layer_sizes()[model.layer_sizes().size() - 2] + 1;
  model.mutable_params().tail(out_params) *= config.score_scale;
  return model;
}

}  // namespace drltr

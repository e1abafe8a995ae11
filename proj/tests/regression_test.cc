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

#include "drltr/regression.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "drltr/errors.h"
#include "drltr/policy.h"
#include "drltr/propensity.h"

namespace drltr {
namespace {

// Items with one-hot features so the model can fit each relevance separately.
Query OneHotQuery(int id, const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) rows[i][i] = 1.0;
  return Query(id, labels, rows);
}

TEST(RegressionTest, PredictionsStayInsideClampBounds) {
  Mlp model(2, {3});
  model.mutable_params().setConstant(50.0);
  const Query q(0, {0, 4}, {{1.0, 1.0}, {-1.0, -1.0}});
  const Eigen::VectorXd r = PredictRelevance(model, q, 1e-6);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GE(r[i], 1e-6);
    EXPECT_LE(r[i], 1 - 1e-6);
  }
}

TEST(RegressionTest, LossGradientMatchesFiniteDifferences) {
  Rng rng(1);
  const Query q(0, {0, 2, 4}, {{0.3, -0.2}, {1.0, 0.4}, {-0.5, 0.9}});
  QueryClickStats s = QueryClickStats::Empty(0, 3);
  for (int i = 0; i < 20; ++i) {
    const auto y = SampleRanking(Eigen::VectorXd::Zero(3), 2, rng);
    s.Add(y, SimulateSession(y, q.relevance(), Top5Params(), rng));
  }
  const std::vector<RegressionQuery> queries = {
      {&q, &s, RhoHat(EstimateLoggingMarginals(s), Top5Params(), 0.1)}};
  Mlp model(2, {4, 3});
  model.InitXavier(rng);
  for (CeLossKind kind : {CeLossKind::kNew, CeLossKind::kPrev}) {
    RegressionConfig c;
    c.loss = kind;
    const Eigen::VectorXd g = RegressionLossGrad(model, queries, Top5Params(), c);
    const double h = 1e-6;
    for (int p = 0; p < model.num_params(); ++p) {
      Mlp plus = model, minus = model;
      plus.mutable_params()[p] += h;
      minus.mutable_params()[p] -= h;
      const double fd = (RegressionLoss(plus, queries, Top5Params(), c) -
                         RegressionLoss(minus, queries, Top5Params(), c)) /
                        (2 * h);
      EXPECT_LE(std::abs(g[p] - fd), 1e-4 * std::max(1.0, std::abs(fd))) << "param " << p;
    }
  }
}

TEST(RegressionTest, RecoversRelevanceWithoutBias) {
  const Query q = OneHotQuery(0, {0, 1, 3, 4});
  const BiasParams identity({1, 1, 1, 1}, {0, 0, 0, 0});
  QueryClickStats s = QueryClickStats::Empty(0, 4);
  Rng rng(2);
  for (int i = 0; i < 100000; ++i) {
    const std::vector<int> y = {0, 1, 2, 3};
    s.Add(y, SimulateSession(y, q.relevance(), identity, rng));
  }
  const std::vector<RegressionQuery> queries = {{&q, &s, Eigen::VectorXd::Ones(4)}};
  RegressionConfig c;
  c.epochs = 3000;
  c.learning_rate = 0.05;
  const RegressionResult r = TrainRegression(queries, identity, 4, c);
  const Eigen::VectorXd pred = r.Predict(q);
  for (int d = 0; d < 4; ++d) EXPECT_NEAR(pred[d], q.relevance()[d], 0.05) << "item " << d;
}

TEST(RegressionTest, NeverDisplayedItemGetsNoGradient) {
  const Query q = OneHotQuery(0, {0, 4, 2});
  QueryClickStats s = QueryClickStats::Empty(0, 3);
  s.Add({0, 1}, {0, 1});
  const std::vector<RegressionQuery> queries = {
      {&q, &s, RhoHat(EstimateLoggingMarginals(s), Top5Params(), 0.1)}};
  // A linear model on one-hot features: the weight of item 2's feature only
  // affects item 2.
  Mlp model(3, {});
  Rng rng(3);
  model.InitXavier(rng);
  RegressionConfig c;
  c.loss = CeLossKind::kNew;
  EXPECT_EQ(RegressionLossGrad(model, queries, Top5Params(), c)[2], 0.0);
  c.loss = CeLossKind::kPrev;
  EXPECT_NE(RegressionLossGrad(model, queries, Top5Params(), c)[2], 0.0);
}

TEST(RegressionTest, LossTraceDecreasesOnAverage) {
  SyntheticOptions o;
  o.n_queries = 40;
  o.items_per_query = 8;
  o.feature_dim = 5;
  o.seed = 4;
  const Dataset d = GenerateSynthetic(o);
  Rng rng(5);
  std::vector<QueryClickStats> stats;
  stats.reserve(d.train.size());
  for (const Query& q : d.train) {
    QueryClickStats s = QueryClickStats::Empty(q.id(), q.size());
    for (int i = 0; i < 200; ++i) {
      const auto y = SampleRanking(Eigen::VectorXd::Zero(q.size()), 5, rng);
      s.Add(y, SimulateSession(y, q.relevance(), Top5Params(), rng));
    }
    stats.push_back(s);
  }
  std::vector<RegressionQuery> queries;
  for (size_t i = 0; i < d.train.size(); ++i) {
    queries.push_back({&d.train[i], &stats[i],
                       RhoHat(EstimateLoggingMarginals(stats[i]), Top5Params(), 0.05)});
  }
  RegressionConfig c;
  c.epochs = 30;
  const RegressionResult r = TrainRegression(queries, Top5Params(), o.feature_dim, c);
  ASSERT_EQ(r.loss_trace.size(), 30u);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  // Momentum SGD jitters; the 3-epoch running mean may not rise by over 1%.
  const auto& t = r.loss_trace;
  for (size_t e = 3; e < t.size(); ++e) {
    const double prev = (t[e - 3] + t[e - 2] + t[e - 1]) / 3;
    const double cur = (t[e - 2] + t[e - 1] + t[e]) / 3;
    EXPECT_LE(cur, prev * 1.01) << "epoch " << e;
  }
  const RegressionResult again = TrainRegression(queries, Top5Params(), o.feature_dim, c);
  EXPECT_TRUE(again.model == r.model);
}

TEST(RegressionTest, DivergenceIsReported) {
  const Query q = OneHotQuery(0, {0, 4});
  QueryClickStats s = QueryClickStats::Empty(0, 2);
  s.Add({0, 1}, {1, 1});
  const std::vector<RegressionQuery> queries = {{&q, &s, Eigen::VectorXd::Constant(2, 1e-3)}};
  RegressionConfig c;
  c.learning_rate = std::numeric_limits<double>::infinity();
  c.epochs = 5;
  EXPECT_THROW(TrainRegression(queries, Top5Params(), 2, c), DivergenceError);
}

TEST(RegressionTest, RejectsEmptyInputAndBadConfig) {
  RegressionConfig c;
  EXPECT_THROW(TrainRegression({}, Top5Params(), 2, c), std::invalid_argument);
  c.clamp_eps = 0.7;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace drltr

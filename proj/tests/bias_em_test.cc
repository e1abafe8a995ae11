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

#include "drltr/bias_em.h"

#include <cmath>

#include <gtest/gtest.h>

#include "drltr/policy.h"

namespace drltr {
namespace {

struct Fixture {
  Dataset data;
  std::map<int, QueryClickStats> stats;
  std::map<int, Eigen::VectorXd> truth;
};

// Uniformly shuffled top-5 rankings clicked under `params`.
Fixture MakeLog(int impressions, const BiasParams& params, uint64_t seed) {
  SyntheticOptions o;
  o.n_train = 20;
  o.n_validation = 0;
  o.n_test = 0;
  o.items_per_query = 8;
  o.feature_dim = 4;
  o.seed = seed;
  Fixture f;
  f.data = GenerateSynthetic(o);
  Rng rng(seed);
  for (const Query& q : f.data.train) {
    f.stats.emplace(q.id(), QueryClickStats::Empty(q.id(), q.size()));
    f.truth[q.id()] = Eigen::Map<const Eigen::VectorXd>(q.relevance().data(), q.size());
  }
  for (int i = 0; i < impressions; ++i) {
    const Query& q = f.data.train[rng.UniformInt(static_cast<int>(f.data.train.size()))];
    const std::vector<int> y = SampleRanking(Eigen::VectorXd::Zero(q.size()), 5, rng);
    f.stats.at(q.id()).Add(y, SimulateSession(y, q.relevance(), params, rng));
  }
  return f;
}

void ExpectValid(const BiasParams& b) {
  for (size_t k = 0; k < b.alpha.size(); ++k) {
    EXPECT_GE(b.alpha[k], 0.0);
    EXPECT_GE(b.beta[k], 0.0);
    EXPECT_LE(b.alpha[k] + b.beta[k], 1.0 + 1e-15);
  }
}

TEST(ProjectBiasParamsTest, Examples) {
  const BiasParams a = ProjectBiasParams({1.2}, {0.3});
  EXPECT_NEAR(a.alpha[0], 0.8, 1e-15);
  EXPECT_NEAR(a.beta[0], 0.2, 1e-15);
  const BiasParams b = ProjectBiasParams({0.5}, {0.4});
  EXPECT_EQ(b.alpha[0], 0.5);
  EXPECT_EQ(b.beta[0], 0.4);
  const BiasParams c = ProjectBiasParams({-0.1}, {0.5});
  EXPECT_EQ(c.alpha[0], 0.0);
  EXPECT_EQ(c.beta[0], 0.5);
}

TEST(BiasEmTest, TruthIsAFixedPoint) {
  const Fixture f = MakeLog(1000000, Top5Params(), 1);
  EmConfig c;
  c.iterations = 1;
  c.inner_epochs = 0;
  c.initial_bias = Top5Params();
  c.initial_relevance = f.truth;
  const EmResult r = EmEstimateBias(f.stats, f.data, c);
  for (int k = 0; k < 5; ++k) {
    EXPECT_LT(std::abs(r.bias.alpha[k] - Top5Params().alpha[k]), 0.02) << k;
    EXPECT_LT(std::abs(r.bias.beta[k] - Top5Params().beta[k]), 0.02) << k;
  }
}

TEST(BiasEmTest, ClicksOnlyAtFirstRank) {
  SyntheticOptions o;
  o.n_train = 3;
  o.n_validation = 0;
  o.n_test = 0;
  o.items_per_query = 6;
  o.feature_dim = 3;
  o.seed = 2;
  const Dataset d = GenerateSynthetic(o);
  std::map<int, QueryClickStats> stats;
  Rng rng(2);
  for (const Query& q : d.train) {
    QueryClickStats s = QueryClickStats::Empty(q.id(), q.size());
    for (int i = 0; i < 200; ++i) {
      const std::vector<int> y = SampleRanking(Eigen::VectorXd::Zero(q.size()), 5, rng);
      s.Add(y, {rng.Bernoulli(0.6) ? 1 : 0, 0, 0, 0, 0});
    }
    stats.emplace(q.id(), s);
  }
  EmConfig c;
  c.iterations = 10;
  c.inner_epochs = 5;
  const EmResult r = EmEstimateBias(stats, d, c);
  EXPECT_GT(r.bias.alpha[0] + r.bias.beta[0], 0.1);
  for (int k = 1; k < 5; ++k) {
    EXPECT_EQ(r.bias.alpha[k], 0.0) << k;
    EXPECT_EQ(r.bias.beta[k], 0.0) << k;
  }
}

TEST(BiasEmTest, LikelihoodTraceIsNonDecreasing) {
  const Fixture f = MakeLog(20000, Top5Params(), 3);
  EmConfig c;
  c.iterations = 15;
  c.inner_epochs = 10;
  const EmResult r = EmEstimateBias(f.stats, f.data, c);
  ASSERT_EQ(r.log_likelihood.size(), 16u);
  for (size_t i = 1; i < r.log_likelihood.size(); ++i) {
    EXPECT_GE(r.log_likelihood[i], r.log_likelihood[i - 1] - 1e-9) << i;
  }
  ExpectValid(r.bias);
  EXPECT_EQ(r.relevance.size(), f.stats.size());
}

TEST(BiasEmTest, RecoversBiasWithKnownRelevance) {
  const Fixture f = MakeLog(200000, Top5Params(), 4);
  EmConfig c;
  c.iterations = 200;
  c.inner_epochs = 0;
  c.initial_relevance = f.truth;
  const EmResult r = EmEstimateBias(f.stats, f.data, c);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(r.bias.alpha[k], Top5Params().alpha[k], 0.05) << k;
    EXPECT_NEAR(r.bias.beta[k], Top5Params().beta[k], 0.05) << k;
  }
}

TEST(BiasEmTest, Deterministic) {
  const Fixture f = MakeLog(5000, Top5Params(), 5);
  EmConfig c;
  c.iterations = 4;
  c.inner_epochs = 5;
  c.seed = 9;
  const EmResult a = EmEstimateBias(f.stats, f.data, c);
  const EmResult b = EmEstimateBias(f.stats, f.data, c);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_TRUE(a.model == b.model);
}

TEST(BiasEmTest, RejectsBadInput) {
  const Fixture f = MakeLog(10, Top5Params(), 6);
  EmConfig c;
  EXPECT_THROW(EmEstimateBias({}, f.data, c), std::invalid_argument);
  c.iterations = 0;
  EXPECT_THROW(EmEstimateBias(f.stats, f.data, c), std::invalid_argument);
  c.iterations = 1;
  c.init_alpha = 0.8;
  EXPECT_THROW(EmEstimateBias(f.stats, f.data, c), std::invalid_argument);
}

}  // namespace
}  // namespace drltr

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

#include "drltr/ltr_training.h"

#include <cmath>

#include <gtest/gtest.h>

#include "drltr/errors.h"
#include "drltr/estimators.h"
#include "drltr/propensity.h"

namespace drltr {
namespace {

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Dataset SmallSynthetic(uint64_t seed) {
  SyntheticOptions o;
  o.n_train = 5;
  o.n_validation = 3;
  o.n_test = 3;
  o.items_per_query = 6;
  o.feature_dim = 4;
  o.seed = seed;
  return GenerateSynthetic(o);
}

std::vector<PolicyTarget> TrueTargets(const std::vector<Query>& queries) {
  std::vector<PolicyTarget> out;
  for (const Query& q : queries) {
    out.push_back({&q, Eigen::Map<const Eigen::VectorXd>(q.relevance().data(), q.size())});
  }
  return out;
}

TEST(LtrTrainingTest, RankingReward) {
  EXPECT_NEAR(RankingReward({1, 0}, Vec({0.5, 1.0}), Top5Params()), 1.0 * 1.0 + 0.79 * 0.5,
              1e-15);
}

TEST(LtrTrainingTest, ConstantTargetsGiveZeroGradient) {
  Rng rng(1);
  const PolicyGradientResult g =
      PolicyGradient(Vec({0.3, -0.1, 0.8, 0.0}), Eigen::VectorXd::Constant(4, 0.6), Top5Params(),
                     4, 100000, rng);
  EXPECT_LT(g.grad.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(g.rankings.size(), 100000u);
}

TEST(LtrTrainingTest, SingleItemGradientIsZero) {
  Rng rng(2);
  const PolicyGradientResult g = PolicyGradient(Vec({0.4}), Vec({0.9}), Top5Params(), 1, 50, rng);
  EXPECT_EQ(g.grad[0], 0.0);
  EXPECT_NEAR(g.mean_reward, 0.9, 1e-15);
}

TEST(LtrTrainingTest, SampledGradientMatchesFiniteDifferences) {
  const Eigen::VectorXd s = Vec({0.2, -0.5, 0.7});
  const Eigen::VectorXd mu = Vec({0.9, 0.1, 0.4});
  Rng rng(3);
  const PolicyGradientResult g = PolicyGradient(s, mu, Top5Params(), 3, 1000000, rng);
  const double h = 1e-5;
  Eigen::VectorXd fd(3);
  for (int d = 0; d < 3; ++d) {
    Eigen::VectorXd plus = s, minus = s;
    plus[d] += h;
    minus[d] -= h;
    fd[d] = (ExactExpectedReward(plus, mu, Top5Params(), 3) -
             ExactExpectedReward(minus, mu, Top5Params(), 3)) /
            (2 * h);
  }
  EXPECT_LE((g.grad - fd).norm() / fd.norm(), 1e-2);
}

TEST(LtrTrainingTest, RejectsZeroSamples) {
  Rng rng(4);
  EXPECT_THROW(PolicyGradient(Vec({0.0, 1.0}), Vec({0.0, 1.0}), Top5Params(), 2, 0, rng),
               std::invalid_argument);
}

TEST(LtrTrainingTest, ObjectiveEqualsDrEstimate) {
  Rng rng(5);
  const Dataset d = SmallSynthetic(5);
  Mlp model(d.feature_dim);
  model.InitXavier(rng);
  for (const Query& q : d.train) {
    QueryClickStats s = QueryClickStats::Empty(q.id(), q.size());
    for (int i = 0; i < 30; ++i) {
      const auto y = SampleRanking(Eigen::VectorXd::Zero(q.size()), 5, rng);
      s.Add(y, SimulateSession(y, q.relevance(), Top5Params(), rng));
    }
    const Eigen::VectorXd rho = RhoHat(EstimateLoggingMarginals(s), Top5Params(), 0.2);
    Eigen::VectorXd r_hat(q.size());
    for (int i = 0; i < q.size(); ++i) r_hat[i] = rng.Uniform();
    const ItemSums sums = ComputeItemSums(s, Top5Params());
    const std::vector<PolicyTarget> target = {{&q, DrMu(sums, rho, r_hat)}};
    Rng unused(0);
    const double objective = PolicyObjective(model, target, Top5Params(), 5, 1, unused);
    QueryInputs in;
    in.stats = &s;
    in.omega_hat = Omega(ExactRankMarginals(model.Score(q.features()), 5).prob, Top5Params());
    in.rho_hat = rho;
    in.r_hat = r_hat;
    EXPECT_NEAR(objective, Estimate(EstimatorKind::kDr, {in}, Top5Params()).value, 1e-12);
  }
}

TEST(LtrTrainingTest, ZeroLearningRateKeepsInitialModel) {
  Rng rng(6);
  const Dataset d = SmallSynthetic(6);
  Mlp initial(d.feature_dim);
  initial.InitXavier(rng);
  LtrConfig c;
  c.learning_rate = 0.0;
  c.max_steps = 20;
  c.eval_interval = 5;
  const LtrResult r = TrainPolicy(initial, TrueTargets(d.train), TrueTargets(d.validation),
                                  Top5Params(), 5, c);
  EXPECT_TRUE(r.model == initial);
}

TEST(LtrTrainingTest, BestCheckpointHasMaximalValidation) {
  Rng rng(7);
  const Dataset d = SmallSynthetic(7);
  Mlp initial(d.feature_dim);
  initial.InitXavier(rng);
  LtrConfig c;
  c.max_steps = 120;
  c.eval_interval = 10;
  c.learning_rate = 0.05;
  const LtrResult r = TrainPolicy(initial, TrueTargets(d.train), TrueTargets(d.validation),
                                  Top5Params(), 5, c);
  ASSERT_FALSE(r.trace.empty());
  double best = -1e300;
  for (const TraceRow& row : r.trace) best = std::max(best, row.validation_estimate);
  EXPECT_EQ(r.best_validation, best);
  EXPECT_NE(r.TraceCsv().find("step,train_objective,validation_estimate"), std::string::npos);
  // Training on true relevance should beat a random initial policy.
  EXPECT_GE(r.best_validation, r.trace.front().validation_estimate);
}

TEST(LtrTrainingTest, DmWithTrueRelevanceMatchesFullInformation) {
  Rng rng(8);
  const Dataset d = SmallSynthetic(8);
  Mlp initial(d.feature_dim);
  initial.InitXavier(rng);
  LtrConfig c;
  c.max_steps = 100;
  c.seed = 3;
  const auto train = TrueTargets(d.train);
  const auto valid = TrueTargets(d.validation);
  const LtrResult full = TrainPolicy(initial, train, valid, Top5Params(), 5, c);
  // The DM targets: a regression that is exactly right.
  std::vector<PolicyTarget> dm_train, dm_valid;
  for (const Query& q : d.train) {
    Eigen::VectorXd r_hat(q.size());
    for (int i = 0; i < q.size(); ++i) r_hat[i] = q.relevance()[i];
    dm_train.push_back({&q, r_hat});
  }
  for (const Query& q : d.validation) {
    Eigen::VectorXd r_hat(q.size());
    for (int i = 0; i < q.size(); ++i) r_hat[i] = q.relevance()[i];
    dm_valid.push_back({&q, r_hat});
  }
  const LtrResult dm = TrainPolicy(initial, dm_train, dm_valid, Top5Params(), 5, c);
  Rng e1(1), e2(1);
  const double ecp_full = PolicyObjective(full.model, TrueTargets(d.test), Top5Params(), 5, 1, e1);
  const double ecp_dm = PolicyObjective(dm.model, TrueTargets(d.test), Top5Params(), 5, 1, e2);
  EXPECT_NEAR(ecp_dm, ecp_full, 0.02 * ecp_full);
}

TEST(LtrTrainingTest, TrainingIsDeterministic) {
  Rng rng(9);
  const Dataset d = SmallSynthetic(9);
  Mlp initial(d.feature_dim);
  initial.InitXavier(rng);
  LtrConfig c;
  c.max_steps = 30;
  c.seed = 11;
  const auto train = TrueTargets(d.train);
  const auto valid = TrueTargets(d.validation);
  EXPECT_TRUE(TrainPolicy(initial, train, valid, Top5Params(), 5, c).model ==
              TrainPolicy(initial, train, valid, Top5Params(), 5, c).model);
}

TEST(LtrTrainingTest, DivergenceIsReported) {
  Rng rng(10);
  const Dataset d = SmallSynthetic(10);
  Mlp initial(d.feature_dim);
  initial.InitXavier(rng);
  initial.mutable_params()[0] = std::nan("");
  LtrConfig c;
  c.max_steps = 5;
  EXPECT_THROW(TrainPolicy(initial, TrueTargets(d.train), TrueTargets(d.validation),
                           Top5Params(), 5, c),
               DivergenceError);
}

}  // namespace
}  // namespace drltr

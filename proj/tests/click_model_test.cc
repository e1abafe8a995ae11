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

#include "drltr/click_model.h"

#include <cmath>

#include <gtest/gtest.h>

#include "drltr/errors.h"
#include "drltr/random.h"

namespace drltr {
namespace {

TEST(ClickModelTest, ClickProbIsAffine) {
  const BiasParams p = Top5Params();
  EXPECT_DOUBLE_EQ(ClickProb(0.5, 1, p), 0.53 * 0.5 + 0.26);
  EXPECT_DOUBLE_EQ(ClickProb(1.0, 0, p), 1.0);
  EXPECT_DOUBLE_EQ(ClickProb(0.0, 4, p), 0.08);
}

TEST(ClickModelTest, NoClicksBeyondCutoff) {
  const BiasParams p = Top5Params();
  EXPECT_EQ(ClickProb(1.0, 5, p), 0.0);
  EXPECT_EQ(ClickProb(1.0, 17, p), 0.0);
}

TEST(ClickModelTest, RejectsRelevanceOutsideUnitInterval) {
  EXPECT_THROW(ClickProb(1.2, 0, Top5Params()), DomainError);
  EXPECT_THROW(ClickProb(-0.1, 0, Top5Params()), DomainError);
}

TEST(ClickModelTest, ValidateRejectsBadParams) {
  EXPECT_THROW(BiasParams({0.7}, {0.4}), DomainError);
  EXPECT_THROW(BiasParams({-0.1}, {0.4}), DomainError);
  EXPECT_THROW(BiasParams({0.5, 0.2}, {0.1}), DomainError);
  EXPECT_NO_THROW(BiasParams({0.5}, {0.5}));
}

TEST(ClickModelTest, FullRankingTopRank) {
  const BiasParams p = FullRankingParams(20);
  // k = 1: P(O) = 1, eps- = 0.1 + 0.6 / 1.05.
  const double eps_minus = 0.1 + 0.6 / 1.05;
  EXPECT_NEAR(p.alpha[0], 1.0 - eps_minus, 1e-12);
  EXPECT_NEAR(p.alpha[0], 0.32857142857142857, 1e-12);
  EXPECT_NEAR(p.beta[0], eps_minus, 1e-12);
  EXPECT_EQ(p.display_cutoff, 20);
}

TEST(ClickModelTest, FullRankingThirdRank) {
  const BiasParams p = FullRankingParams(5);
  const double exam = std::pow(1.0 + 2.0 / 5.0, -2.0);
  const double eps_minus = 0.1 + 0.6 / (1.0 + 3.0 / 20.0);
  EXPECT_NEAR(p.alpha[2], exam * (1.0 - eps_minus), 1e-12);
  EXPECT_NEAR(p.beta[2], exam * eps_minus, 1e-12);
}

TEST(ClickModelTest, ExaminationModelRejectsInvertedTrust) {
  ExaminationModel m{{1.0}, {0.2}, {0.5}};
  EXPECT_THROW(FromExaminationModel(m, 1), DomainError);
}

TEST(ClickModelTest, InterpolationEndpoints) {
  const BiasParams p = Top5Params();
  EXPECT_EQ(InterpolateTowardMean(p, 1.0), p);
  const BiasParams flat = InterpolateTowardMean(p, 0.0);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(flat.alpha[k], (0.35 + 0.53 + 0.55 + 0.54 + 0.52) / 5, 1e-12);
    EXPECT_NEAR(flat.beta[k], (0.65 + 0.26 + 0.15 + 0.11 + 0.08) / 5, 1e-12);
  }
}

TEST(ClickModelTest, InterpolationIsLinearInZ) {
  const BiasParams p = Top5Params();
  const BiasParams a = InterpolateTowardMean(p, 0.2);
  const BiasParams b = InterpolateTowardMean(p, 0.6);
  const BiasParams c = InterpolateTowardMean(p, 1.0);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(b.alpha[k] - a.alpha[k], c.alpha[k] - b.alpha[k], 1e-12);
  }
  EXPECT_THROW(InterpolateTowardMean(p, 1.5), DomainError);
}

TEST(ClickModelTest, ZeroParamsNeverClick) {
  const BiasParams p({0, 0, 0}, {0, 0, 0});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    for (int c : SimulateSession({2, 0, 1}, {1.0, 1.0, 1.0}, p, rng)) EXPECT_EQ(c, 0);
  }
}

TEST(ClickModelTest, RelevantTopItemAlwaysClicked) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(SimulateSession({0, 1}, {1.0, 0.0}, Top5Params(), rng)[0], 1);
  }
}

TEST(ClickModelTest, EmpiricalClickRateMatchesModel) {
  Rng rng(3);
  const int n = 1000000;
  long clicks = 0;
  for (int i = 0; i < n; ++i) clicks += SimulateSession({0, 1}, {0.9, 0.5}, Top5Params(), rng)[1];
  const double p = 0.525;
  EXPECT_NEAR(static_cast<double>(clicks) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(ClickModelTest, SessionsAreDeterministicGivenSeed) {
  Rng a(9), b(9);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(SimulateSession({0, 1, 2}, {0.2, 0.5, 0.9}, Top5Params(), a),
              SimulateSession({0, 1, 2}, {0.2, 0.5, 0.9}, Top5Params(), b));
  }
}

}  // namespace
}  // namespace drltr

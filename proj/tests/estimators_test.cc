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

#include "drltr/estimators.h"

#include <cmath>

#include <gtest/gtest.h>

#include "drltr/errors.h"
#include "drltr/policy.h"
#include "drltr/propensity.h"

namespace drltr {
namespace {

constexpr double kExact = 1e-12;

// One impression of a single item at the top, clicked.
QueryClickStats OneClick() {
  QueryClickStats s = QueryClickStats::Empty(0, 1);
  s.Add({0}, {1});
  return s;
}

struct RandomLog {
  QueryClickStats stats;
  std::vector<double> relevance;
  Eigen::MatrixXd logging;  // exact marginals of the logging policy
};

RandomLog MakeRandomLog(Rng& rng, int n_items, int n_impressions, bool deterministic) {
  Eigen::VectorXd scores(n_items);
  for (int i = 0; i < n_items; ++i) scores[i] = rng.Normal();
  RandomLog out;
  out.stats = QueryClickStats::Empty(0, n_items);
  for (int i = 0; i < n_items; ++i) out.relevance.push_back(rng.Uniform());
  const int length = std::min(n_items, 5);
  std::vector<int> fixed = DeterministicRanking(scores);
  fixed.resize(length);
  for (int i = 0; i < n_impressions; ++i) {
    const std::vector<int> ranking = deterministic ? fixed : SampleRanking(scores, length, rng);
    out.stats.Add(ranking, SimulateSession(ranking, out.relevance, Top5Params(), rng));
  }
  out.logging = EstimateLoggingMarginals(out.stats);
  return out;
}

Eigen::VectorXd RandomVector(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.05 + 0.9 * rng.Uniform();
  return v;
}

TEST(EstimatorsTest, TrueEcpExamples) {
  EXPECT_EQ(TrueEcp(Eigen::VectorXd::Ones(3), {0.0, 0.0, 0.0}), 0.0);
  EXPECT_NEAR(TrueEcp(Eigen::MatrixXd::Ones(1, 1), Top5Params(), {1.0}), 1.0, kExact);
}

TEST(EstimatorsTest, TrueEcpMatchesRankingEnumeration) {
  const Eigen::VectorXd scores = (Eigen::VectorXd(3) << 0.5, -0.3, 1.0).finished();
  const std::vector<double> r = {0.25, 1.0, 0.5};
  const BiasParams b = Top5Params();
  double enumerated = 0;
  EnumerateRankings(scores, 3, [&](const std::vector<int>& y, double p) {
    for (int k = 0; k < 3; ++k) enumerated += p * b.Weight(k) * r[y[k]];
  });
  EXPECT_NEAR(TrueEcp(ExactRankMarginals(scores, 3).prob, b, r), enumerated, kExact);
}

TEST(EstimatorsTest, NdcgExamples) {
  EXPECT_NEAR(NdcgAtK({0, 1}, {1.0, 0.0}, 2), 1.0, kExact);
  EXPECT_NEAR(NdcgAtK({1, 0}, {1.0, 0.0}, 2), 1.0 / std::log2(3.0), kExact);
  EXPECT_NEAR(NdcgAtK({1, 0}, {1.0, 0.0}, 2), 0.6309297535714574, kExact);
  EXPECT_NEAR(NdcgAtK({2, 0, 1}, {0.5, 0.5, 0.5}, 3), 1.0, kExact);
  EXPECT_EQ(NdcgAtK({0, 1}, {0.0, 0.0}, 2), 0.0);
}

TEST(EstimatorsTest, ExpectedNdcgOfFixedRankingIsItsNdcg) {
  const std::vector<double> r = {0.25, 1.0, 0.0, 0.75};
  const std::vector<int> y = {2, 0, 3, 1};
  EXPECT_NEAR(ExpectedNdcgAtK(RankingMarginals(y, 4).prob, r, 3), NdcgAtK(y, r, 3), kExact);
}

TEST(EstimatorsTest, IpsSingleImpressionExample) {
  const QueryClickStats s = OneClick();
  const ItemSums sums = ComputeItemSums(s, Top5Params());
  const Eigen::VectorXd rho = RhoHat(EstimateLoggingMarginals(s), Top5Params(), 0.01);
  EXPECT_NEAR(IpsValue(sums, Eigen::VectorXd::Ones(1), rho), 1.0, kExact);
  EXPECT_NEAR(NaiveValue(sums, Eigen::VectorXd::Ones(1)), 1.0, kExact);
}

TEST(EstimatorsTest, NoClicksNoBetaGivesZero) {
  QueryClickStats s = QueryClickStats::Empty(0, 2);
  s.Add({1, 0}, {0, 0});
  const BiasParams b({0.5, 0.4}, {0.0, 0.0});
  const ItemSums sums = ComputeItemSums(s, b);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  EXPECT_EQ(IpsValue(sums, w, Eigen::VectorXd::Constant(2, 0.5)), 0.0);
  EXPECT_EQ(NaiveValue(sums, w), 0.0);
}

TEST(EstimatorsTest, NaiveEqualsIpsWithoutBias) {
  Rng rng(1);
  const RandomLog log = MakeRandomLog(rng, 4, 30, false);
  const BiasParams identity({1, 1, 1, 1, 1}, {0, 0, 0, 0, 0});
  const ItemSums sums = ComputeItemSums(log.stats, identity);
  const Eigen::VectorXd w = RandomVector(4, rng);
  EXPECT_NEAR(NaiveValue(sums, w), IpsValue(sums, w, Eigen::VectorXd::Ones(4)), kExact);
}

TEST(EstimatorsTest, DmExamples) {
  const Eigen::VectorXd w = (Eigen::VectorXd(3) << 1.0, 0.79, 0.0).finished();
  EXPECT_EQ(DmValue(w, Eigen::VectorXd::Zero(3)), 0.0);
  const std::vector<double> r = {0.5, 0.25, 1.0};
  EXPECT_NEAR(DmValue(w, Eigen::Map<const Eigen::VectorXd>(r.data(), 3)), TrueEcp(w, r), kExact);
  double manual = 0;
  for (int d = 0; d < 3; ++d) manual += w[d] * r[d];
  EXPECT_NEAR(DmValue(w, Eigen::Map<const Eigen::VectorXd>(r.data(), 3)), manual, kExact);
}

TEST(EstimatorsTest, CvEqualsDmUnderDeterministicLogging) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const RandomLog log = MakeRandomLog(rng, 6, 25, true);
    const Eigen::VectorXd rho = RhoHat(log.logging, Top5Params(), 1e-3);
    const ItemSums sums = ComputeItemSums(log.stats, Top5Params());
    const Eigen::VectorXd w = RandomVector(6, rng), r_hat = RandomVector(6, rng);
    // Items never displayed have rho clipped to tau and contribute nothing to CV.
    Eigen::VectorXd shown_w = w;
    for (int d = 0; d < 6; ++d) {
      if (sums.alpha_mass[d] == 0) shown_w[d] = 0;
    }
    EXPECT_NEAR(CvValue(sums, w, rho, r_hat), DmValue(shown_w, r_hat), kExact);
    EXPECT_EQ(CvValue(sums, w, rho, Eigen::VectorXd::Zero(6)), 0.0);
  }
}

TEST(EstimatorsTest, DrEqualsIpsWhenRegressionIsZero) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const RandomLog log = MakeRandomLog(rng, 5, 10, false);
    const Eigen::VectorXd rho = RhoHat(log.logging, Top5Params(), 0.05 + 0.5 * rng.Uniform());
    const ItemSums sums = ComputeItemSums(log.stats, Top5Params());
    const Eigen::VectorXd w = RandomVector(5, rng);
    const Eigen::VectorXd mu = DrMu(sums, rho, Eigen::VectorXd::Zero(5));
    EXPECT_NEAR(w.dot(mu), IpsValue(sums, w, rho), kExact);
    EXPECT_TRUE(mu.isApprox(IpsMu(sums, rho), kExact));
  }
}

TEST(EstimatorsTest, DrEqualsIpsForDeterministicLoggingWithoutClipping) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const RandomLog log = MakeRandomLog(rng, 5, 10, true);  // every item displayed
    const Eigen::VectorXd rho = RhoHat(log.logging, Top5Params(), 0.05);
    const ItemSums sums = ComputeItemSums(log.stats, Top5Params());
    const Eigen::VectorXd w = RandomVector(5, rng), r_hat = RandomVector(5, rng);
    EXPECT_NEAR(w.dot(DrMu(sums, rho, r_hat)), IpsValue(sums, w, rho), kExact);
  }
}

TEST(EstimatorsTest, DrDecomposesIntoDmPlusIpsMinusCv) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const RandomLog log = MakeRandomLog(rng, 7, 12, false);
    const Eigen::VectorXd rho = RhoHat(log.logging, Top5Params(), 0.3 * rng.Uniform() + 0.01);
    const ItemSums sums = ComputeItemSums(log.stats, Top5Params());
    const Eigen::VectorXd w = RandomVector(7, rng), r_hat = RandomVector(7, rng);
    const double dr = w.dot(DrMu(sums, rho, r_hat));
    EXPECT_NEAR(dr, DmValue(w, r_hat) + IpsValue(sums, w, rho) - CvValue(sums, w, rho, r_hat),
                kExact);
  }
}

TEST(EstimatorsTest, NeverDisplayedItemKeepsRegressionValue) {
  QueryClickStats s = QueryClickStats::Empty(0, 7);
  s.Add({0, 1, 2, 3, 4}, {1, 0, 0, 1, 0});
  const ItemSums sums = ComputeItemSums(s, Top5Params());
  const Eigen::VectorXd r_hat = Eigen::VectorXd::Constant(7, 0.4);
  const Eigen::VectorXd mu = DrMu(sums, RhoHat(EstimateLoggingMarginals(s), Top5Params(), 0.1), r_hat);
  EXPECT_EQ(mu[5], 0.4);
  EXPECT_EQ(mu[6], 0.4);
}

TEST(EstimatorsTest, EstimateAveragesQueriesAndReportsParts) {
  const QueryClickStats s = OneClick();
  QueryInputs q;
  q.stats = &s;
  q.omega_hat = Eigen::VectorXd::Ones(1);
  q.rho_hat = Eigen::VectorXd::Constant(1, 0.35);
  q.r_hat = Eigen::VectorXd::Constant(1, 0.5);
  QueryInputs empty = q;
  empty.r_hat = Eigen::VectorXd::Zero(1);
  const EstimateReport ips = Estimate(EstimatorKind::kIps, {q, q}, Top5Params());
  EXPECT_NEAR(ips.value, 1.0, kExact);
  const EstimateReport dr = Estimate(EstimatorKind::kDr, {q, empty}, Top5Params());
  ASSERT_TRUE(dr.dm && dr.ips && dr.cv);
  EXPECT_NEAR(dr.value, *dr.dm + *dr.ips - *dr.cv, kExact);
  EXPECT_NEAR(*dr.dm, 0.25, kExact);
  EXPECT_NEAR(*dr.cv, 0.25, kExact);
  EXPECT_NE(dr.ToJson().find("\"estimator\""), std::string::npos);
  QueryInputs missing = q;
  missing.stats = nullptr;
  EXPECT_THROW(Estimate(EstimatorKind::kIps, {missing}, Top5Params()), std::invalid_argument);
  EXPECT_NO_THROW(Estimate(EstimatorKind::kDm, {missing}, Top5Params()));
  EXPECT_THROW(Estimate(EstimatorKind::kDm, {}, Top5Params()), std::invalid_argument);
}

TEST(EstimatorsTest, CePrevPenalizesNeverDisplayedItems) {
  QueryClickStats s = QueryClickStats::Empty(0, 2);
  s.Add({0}, {0});
  const ItemSums sums = ComputeItemSums(s, Top5Params());
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(2, 0.35);
  Eigen::VectorXd r_hat = Eigen::VectorXd::Constant(2, 0.5);
  const double both = CeLossPrev(sums, rho, r_hat);
  // Item 0 (shown, unclicked) and item 1 (never shown) each add -log(0.5).
  EXPECT_NEAR(both, -2 * std::log(0.5), kExact);
}

TEST(EstimatorsTest, CePrevSingleClickTerm) {
  const ItemSums sums = ComputeItemSums(OneClick(), Top5Params());
  const double a = 0.35, r = 0.3;
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(1, a);
  const double expected = -(1 / a) * std::log(r) - (1 - 1 / a) * std::log(1 - r);
  EXPECT_NEAR(CeLossPrev(sums, rho, Eigen::VectorXd::Constant(1, r)), expected, kExact);
}

TEST(EstimatorsTest, CePrevIsPlainCrossEntropyWithoutBias) {
  QueryClickStats s = QueryClickStats::Empty(0, 3);
  s.Add({0, 1, 2}, {1, 0, 1});
  const BiasParams identity({1, 1, 1}, {0, 0, 0});
  const ItemSums sums = ComputeItemSums(s, identity);
  const Eigen::VectorXd r_hat = (Eigen::VectorXd(3) << 0.7, 0.2, 0.4).finished();
  const double plain = -(std::log(0.7) + std::log(0.8) + std::log(0.4));
  EXPECT_NEAR(CeLossPrev(sums, Eigen::VectorXd::Ones(3), r_hat), plain, kExact);
  EXPECT_NEAR(CeLossNew(sums, Eigen::VectorXd::Ones(3), r_hat), plain, kExact);
}

TEST(EstimatorsTest, CeNewIgnoresNeverDisplayedItems) {
  QueryClickStats s = QueryClickStats::Empty(0, 3);
  s.Add({0, 1}, {1, 0});
  const ItemSums sums = ComputeItemSums(s, Top5Params());
  const Eigen::VectorXd rho = RhoHat(EstimateLoggingMarginals(s), Top5Params(), 0.1);
  Eigen::VectorXd r1 = Eigen::VectorXd::Constant(3, 0.4);
  Eigen::VectorXd r2 = r1;
  r2[2] = 0.93;
  EXPECT_EQ(CeLossNew(sums, rho, r1), CeLossNew(sums, rho, r2));
  EXPECT_EQ(CeLossNewGrad(sums, rho, r1)[2], 0.0);
}

TEST(EstimatorsTest, CeNewReducesToPrevWithoutTrustBias) {
  Rng rng(6);
  QueryClickStats s = QueryClickStats::Empty(0, 4);
  const BiasParams flat({0.6, 0.6, 0.6, 0.6}, {0, 0, 0, 0});
  const std::vector<double> r = {0.2, 0.9, 0.5, 0.4};
  const Eigen::VectorXd scores = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < 40; ++i) {
    const auto y = SampleRanking(scores, 4, rng);
    s.Add(y, SimulateSession(y, r, flat, rng));
  }
  const ItemSums sums = ComputeItemSums(s, flat);
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(4, 0.6);
  const Eigen::VectorXd r_hat = RandomVector(4, rng);
  EXPECT_NEAR(CeLossNew(sums, rho, r_hat), CeLossPrev(sums, rho, r_hat), kExact);
}

TEST(EstimatorsTest, CeGradientsMatchFiniteDifferences) {
  Rng rng(7);
  const RandomLog log = MakeRandomLog(rng, 6, 20, false);
  const Eigen::VectorXd rho = RhoHat(log.logging, Top5Params(), 0.05);
  const ItemSums sums = ComputeItemSums(log.stats, Top5Params());
  const Eigen::VectorXd r_hat = RandomVector(6, rng);
  const Eigen::VectorXd g_new = CeLossNewGrad(sums, rho, r_hat);
  const Eigen::VectorXd g_prev = CeLossPrevGrad(sums, rho, r_hat);
  const double h = 1e-6;
  for (int d = 0; d < 6; ++d) {
    Eigen::VectorXd plus = r_hat, minus = r_hat;
    plus[d] += h;
    minus[d] -= h;
    const double fd_new = (CeLossNew(sums, rho, plus) - CeLossNew(sums, rho, minus)) / (2 * h);
    const double fd_prev = (CeLossPrev(sums, rho, plus) - CeLossPrev(sums, rho, minus)) / (2 * h);
    EXPECT_LE(std::abs(g_new[d] - fd_new), 1e-4 * std::max(1.0, std::abs(fd_new)));
    EXPECT_LE(std::abs(g_prev[d] - fd_prev), 1e-4 * std::max(1.0, std::abs(fd_prev)));
  }
}

TEST(EstimatorsTest, CeRejectsBoundaryEstimates) {
  const ItemSums sums = ComputeItemSums(OneClick(), Top5Params());
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(1, 0.35);
  EXPECT_THROW(CeLossNew(sums, rho, Eigen::VectorXd::Zero(1)), DomainError);
  EXPECT_THROW(CeLossPrev(sums, rho, Eigen::VectorXd::Ones(1)), DomainError);
  const Eigen::VectorXd clamped = ClampRelevance(Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(clamped[0], 1 - kRelevanceClampEps, 1e-18);
  EXPECT_NO_THROW(CeLossNew(sums, rho, clamped));
}

}  // namespace
}  // namespace drltr

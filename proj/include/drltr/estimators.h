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
// Metric and estimator family: true ECP, NDCG, naive, IPS, DM, CV and DR
// estimates, per-item mu_hat and the two cross-entropy loss estimates.
//
// Single-query functions work on the sufficient statistics of one query's
// impressions (QueryClickStats). For an item d with per-position counts
// n(d,k) and clicks, with n_q impressions:
//   C_d = total clicks, A_d = sum_k n(d,k) alpha_hat_k, B_d = sum_k n(d,k) beta_hat_k
// and every estimator below is a function of (C, A, B, n_q).

#ifndef DRLTR_ESTIMATORS_H_
#define DRLTR_ESTIMATORS_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drltr/click_log.h"
#include "drltr/click_model.h"

namespace drltr {

inline constexpr double kRelevanceClampEps = 1e-6;

struct ItemSums {
  Eigen::VectorXd clicks;        // C_d
  Eigen::VectorXd alpha_mass;    // A_d
  Eigen::VectorXd beta_mass;     // B_d
  double n_impressions = 0;
};

ItemSums ComputeItemSums(const QueryClickStats& stats, const BiasParams& bias_hat);

// sum_d omega_d R_d.
double TrueEcp(const Eigen::VectorXd& omega, const std::vector<double>& relevance);
double TrueEcp(const Eigen::MatrixXd& marginals, const BiasParams& bias,
               const std::vector<double>& relevance);

// DCG@K / ideal DCG@K with DCG@K = sum_{k<=K} R_{y_k} / log2(k + 1). Zero when
// every R is zero.
double NdcgAtK(const std::vector<int>& ranking, const std::vector<double>& relevance, int k);
// Expected NDCG@K of a stochastic policy from its rank marginals.
double ExpectedNdcgAtK(const Eigen::MatrixXd& marginals, const std::vector<double>& relevance,
                       int k);

// Per-query estimator values.
double IpsValue(const ItemSums& s, const Eigen::VectorXd& omega_hat,
                const Eigen::VectorXd& rho_hat);
double NaiveValue(const ItemSums& s, const Eigen::VectorXd& omega_hat);
double DmValue(const Eigen::VectorXd& omega_hat, const Eigen::VectorXd& r_hat);
double CvValue(const ItemSums& s, const Eigen::VectorXd& omega_hat,
               const Eigen::VectorXd& rho_hat, const Eigen::VectorXd& r_hat);

// mu_hat_d = R_hat_d + (C_d - A_d R_hat_d - B_d) / (n_q rho_hat_d), so that
// sum_d omega_hat_d mu_hat_d is the DR estimate.
Eigen::VectorXd DrMu(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                     const Eigen::VectorXd& r_hat);
// (C_d - B_d) / (n_q rho_hat_d): the IPS estimate as sum_d omega_hat_d mu_d.
Eigen::VectorXd IpsMu(const ItemSums& s, const Eigen::VectorXd& rho_hat);
// C_d / n_q.
Eigen::VectorXd NaiveMu(const ItemSums& s);

enum class EstimatorKind { kNaive, kIps, kDm, kCv, kDr };

std::string EstimatorKindName(EstimatorKind kind);

struct EstimateReport {
  std::string estimator;
  double value = 0.0;
  long n_used = 0;
  // Filled for DR (and for the single parts they name otherwise).
  std::optional<double> dm, ips, cv;

  std::string ToJson() const;
};

// Inputs for one query. `stats` may be null for DM.
struct QueryInputs {
  const QueryClickStats* stats = nullptr;
  Eigen::VectorXd omega_hat;
  Eigen::VectorXd rho_hat;
  Eigen::VectorXd r_hat;
};

// Per-query estimates averaged uniformly over the given queries. Throws
// std::invalid_argument when a click-based estimator lacks stats or rho_hat,
// or when there are no queries.
EstimateReport Estimate(EstimatorKind kind, const std::vector<QueryInputs>& queries,
                        const BiasParams& bias_hat);

// Clamps every entry into [eps, 1 - eps].
Eigen::VectorXd ClampRelevance(const Eigen::VectorXd& r_hat, double eps = kRelevanceClampEps);

// -(1/n_q) sum_d [(C_d/rho_d) log R_d + (n_q - C_d/rho_d) log(1 - R_d)].
// Throws DomainError unless every R_hat lies strictly inside (0, 1).
double CeLossPrev(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                  const Eigen::VectorXd& r_hat);
// -(1/n_q) sum_d (1/rho_d)[(C_d - B_d) log R_d + (A_d + B_d - C_d) log(1 - R_d)].
double CeLossNew(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                 const Eigen::VectorXd& r_hat);
// Derivatives with respect to R_hat.
Eigen::VectorXd CeLossPrevGrad(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                               const Eigen::VectorXd& r_hat);
Eigen::VectorXd CeLossNewGrad(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                              const Eigen::VectorXd& r_hat);

}  // namespace drltr

#endif  // DRLTR_ESTIMATORS_H_

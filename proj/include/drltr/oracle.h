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
// Exact expectations and variances of the estimators on small instances,
// obtained by enumerating every logged ranking and click pattern, together
// with the closed-form bias and variance expressions they are checked
// against.
//
// Everything is stated for a single impression (N = 1); expectations do not
// depend on N and variances scale as 1/N because the estimators are means of
// iid per-impression terms.

#ifndef DRLTR_ORACLE_H_
#define DRLTR_ORACLE_H_

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "drltr/click_model.h"
#include "drltr/random.h"

namespace drltr {

inline constexpr int kOracleMaxItems = 6;
inline constexpr int kOracleMaxCutoff = 3;

struct LoggedRanking {
  std::vector<int> ranking;
  double prob = 0.0;
};

struct SmallInstance {
  std::vector<double> relevance;       // true R_d
  BiasParams bias;                     // true alpha, beta
  std::vector<LoggedRanking> logging;  // pi0 as an explicit distribution
  BiasParams bias_hat;
  Eigen::MatrixXd logging_hat;         // pi0_hat(k | d), n x n
  double tau = 1.0;
  Eigen::VectorXd r_hat;
  Eigen::MatrixXd eval_marginals;      // pi(k | d) of the evaluated policy, n x n

  int num_items() const { return static_cast<int>(relevance.size()); }

  // Throws std::invalid_argument for instances that are malformed or too large
  // to enumerate.
  void Validate() const;

  Eigen::MatrixXd LoggingMarginals() const;  // true pi0(k | d)
  Eigen::VectorXd Rho() const;               // sum_k pi0 alpha, unclipped
  Eigen::VectorXd RhoHat() const;            // max(sum_k pi0_hat alpha_hat, tau)
  Eigen::VectorXd Omega() const;
  Eigen::VectorXd OmegaHat() const;
  double TrueEcp() const;
};

enum class OracleEstimator { kNaive, kIps, kDm, kCv, kDr, kCeNew, kCePrev };

// Estimator value on a one-impression log, computed with the production
// estimator code.
double EvaluateImpression(OracleEstimator est, const SmallInstance& inst,
                          const std::vector<int>& ranking, const std::vector<int>& clicks);

// Calls visit(ranking, clicks, probability) for every outcome with nonzero
// logging probability.
void EnumerateOutcomes(const SmallInstance& inst,
                       const std::function<void(const std::vector<int>&,
                                                const std::vector<int>&, double)>& visit);

double ExactExpectation(OracleEstimator est, const SmallInstance& inst);
// Variance of the estimate from `n` iid impressions.
double ExactVariance(OracleEstimator est, const SmallInstance& inst, long n);

// Moments over y ~ pi0 and clicks for one item. `a`, `b` are the parameters
// evaluated at the item's random rank k(d) (zero when not displayed).
struct ItemMoments {
  double e_c = 0, v_c = 0;
  double e_a = 0, e_b = 0, v_a = 0, v_b = 0, cov_ab = 0;
  double cov_ca = 0, cov_cb = 0;
};

// Moments of (c, alpha_hat, beta_hat) per item, or of (c, alpha, beta) when
// `true_params` is set.
std::vector<ItemMoments> ComputeMoments(const SmallInstance& inst, bool true_params);

// E[IPS] - ECP = sum_d (w_hat/rho_hat)[(rho - rho_hat w/w_hat) R + E[beta - beta_hat]].
double ClosedFormIpsBias(const SmallInstance& inst);
// Simplified form for correct alpha_hat, beta_hat: sum_d (w/rho_hat)(rho - rho_hat) R.
double SimplifiedIpsBias(const SmallInstance& inst);
// E[DR] - ECP = sum_d (w_hat/rho_hat)[(rho - rho_hat w/w_hat) R
//                 + (rho_hat - E[alpha_hat]) R_hat + E[beta - beta_hat]].
double ClosedFormDrBias(const SmallInstance& inst);
// Simplified form for correct alpha_hat, beta_hat:
// sum_d (w/rho_hat)(rho - rho_hat)(R - R_hat).
double SimplifiedDrBias(const SmallInstance& inst);
// E[CV] = sum_d (w_hat/rho_hat) E[alpha_hat] R_hat.
double ClosedFormCvExpectation(const SmallInstance& inst);

// (1/N) sum_d (w_hat/rho_hat)^2 (V[c] + V[beta_hat] - 2 Cov(c, beta_hat)).
double ClosedFormIpsVariance(const SmallInstance& inst, long n);
// (1/N) sum_d (w_hat/rho_hat)^2 (V[c] + V[beta_hat] + R_hat^2 V[alpha_hat]
//   - 2 (Cov(c, beta_hat) + R_hat (Cov(c, alpha_hat) - Cov(beta_hat, alpha_hat)))).
double ClosedFormDrVariance(const SmallInstance& inst, long n);
// (1/N) sum_{d != d'} Cov(X_d, X_d') for the per-item terms X_d of IPS or DR.
// The closed forms above are per-item sums; the exact variance is the closed
// form plus this term. It vanishes when pi0 is deterministic.
double CrossItemCovariance(OracleEstimator est, const SmallInstance& inst, long n);
// max_d |Cov(c, alpha) - (R V[alpha] + Cov(alpha, beta))| with true parameters.
double CovarianceIdentityGap(const SmallInstance& inst);

// L(R_hat) = -sum_d [R log R_hat + (1 - R) log(1 - R_hat)].
double TrueCrossEntropy(const SmallInstance& inst);
// E[L_hat_new] - L = sum_d (1/rho_hat)[((rho_hat - rho) R + E[beta_hat - beta]) log R_hat
//   + (E[beta - beta_hat - alpha_hat] + rho_hat + (rho - rho_hat) R) log(1 - R_hat)].
double ClosedFormCeBias(const SmallInstance& inst);

enum class LoggingKind { kDeterministic, kTable, kPlackettLuce, kAny };
enum class RelevanceEstimateKind { kFree, kWithinTwice, kZero, kExact };

struct RandomInstanceOptions {
  int min_items = 1;
  int max_items = kOracleMaxItems;
  LoggingKind logging = LoggingKind::kAny;
  bool correct_bias = false;     // bias_hat == bias
  bool correct_logging = false;  // logging_hat == true marginals
  // Draw tau in (0, min_d rho_d] and make every item reachable, so that
  // rho_hat = rho whenever the logging estimate is correct.
  bool tau_below_min_rho = false;
  RelevanceEstimateKind r_hat = RelevanceEstimateKind::kFree;
  // Keeps R_hat inside [eps, 1 - eps] for the log terms; 0 disables.
  double r_hat_clamp = 0.0;
};

// R on the grid {0, 0.25, ..., 1}; alpha, beta drawn under the parameter
// invariants; logging by fixed ranking, random table or PL scores.
SmallInstance RandomInstance(const RandomInstanceOptions& options, Rng& rng);

}  // namespace drltr

#endif  // DRLTR_ORACLE_H_

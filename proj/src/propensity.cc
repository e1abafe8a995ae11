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

#include "drltr/propensity.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "drltr/errors.h"

namespace drltr {

Eigen::MatrixXd EstimateLoggingMarginals(const QueryClickStats& stats) {
  if (stats.n_impressions < 1) {
    throw std::invalid_argument("query " + std::to_string(stats.query_id) +
                                " has no impressions in the log");
  }
  return stats.displays / static_cast<double>(stats.n_impressions);
}

Eigen::VectorXd Rho(const Eigen::MatrixXd& marginals, const BiasParams& params) {
  Eigen::VectorXd a(marginals.cols());
  for (int k = 0; k < a.size(); ++k) a[k] = params.Alpha(k);
  return marginals * a;
}

Eigen::VectorXd RhoHat(const Eigen::MatrixXd& marginals, const BiasParams& alpha_hat,
                       double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw DomainError("clipping threshold tau must lie in (0, 1], got " + std::to_string(tau));
  }
  return Rho(marginals, alpha_hat).cwiseMax(tau);
}

Eigen::VectorXd Omega(const Eigen::MatrixXd& marginals, const BiasParams& params) {
  Eigen::VectorXd w(marginals.cols());
  for (int k = 0; k < w.size(); ++k) w[k] = params.Weight(k);
  return marginals * w;
}

double ClipSchedule(long n, ClipSetting setting) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  const double c = setting == ClipSetting::kTopK ? 10.0 : 100.0;
  return std::min(1.0, c / std::sqrt(static_cast<double>(n)));
}

PropensityTable BuildPropensityTable(const QueryClickStats& stats, const BiasParams& bias_hat,
                                     double tau) {
  PropensityTable t;
  t.rho_hat = RhoHat(EstimateLoggingMarginals(stats), bias_hat, tau);
  t.tau = tau;
  t.alpha_hat = bias_hat;
  return t;
}

PropensityTable BuildPropensityTable(const RankMarginals& logging, const BiasParams& bias_hat,
                                     double tau) {
  PropensityTable t;
  t.rho_hat = RhoHat(logging.prob, bias_hat, tau);
  t.tau = tau;
  t.alpha_hat = bias_hat;
  return t;
}

}  // namespace drltr

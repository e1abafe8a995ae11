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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "drltr/errors.h"
#include "json.hpp"

namespace drltr {

ItemSums ComputeItemSums(const QueryClickStats& stats, const BiasParams& bias_hat) {
  const int w = stats.num_positions();
  ItemSums s;
  s.clicks = stats.ClickTotals();
  s.alpha_mass = stats.WeightedDisplays(AlphaVector(bias_hat, w));
  s.beta_mass = stats.WeightedDisplays(BetaVector(bias_hat, w));
  s.n_impressions = stats.n_impressions;
  return s;
}

double TrueEcp(const Eigen::VectorXd& omega, const std::vector<double>& relevance) {
  if (omega.size() != static_cast<long>(relevance.size())) {
    throw std::invalid_argument("omega and relevance differ in length");
  }
  double v = 0;
  for (long d = 0; d < omega.size(); ++d) v += omega[d] * relevance[d];
  return v;
}

double TrueEcp(const Eigen::MatrixXd& marginals, const BiasParams& bias,
               const std::vector<double>& relevance) {
  Eigen::VectorXd w(marginals.cols());
  for (int k = 0; k < w.size(); ++k) w[k] = bias.Weight(k);
  return TrueEcp(Eigen::VectorXd(marginals * w), relevance);
}

namespace {

double IdealDcg(const std::vector<double>& relevance, int k) {
  std::vector<double> sorted = relevance;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double dcg = 0;
  for (int i = 0; i < k && i < static_cast<int>(sorted.size()); ++i) {
    dcg += sorted[i] / std::log2(i + 2.0);
  }
  return dcg;
}

}  // namespace

double NdcgAtK(const std::vector<int>& ranking, const std::vector<double>& relevance, int k) {
  if (k < 1) throw std::invalid_argument("NDCG cutoff must be >= 1");
  const double ideal = IdealDcg(relevance, k);
  if (ideal <= 0) return 0.0;
  double dcg = 0;
  for (int i = 0; i < k && i < static_cast<int>(ranking.size()); ++i) {
    dcg += relevance.at(ranking[i]) / std::log2(i + 2.0);
  }
  return dcg / ideal;
}

double ExpectedNdcgAtK(const Eigen::MatrixXd& marginals, const std::vector<double>& relevance,
                       int k) {
  if (k < 1) throw std::invalid_argument("NDCG cutoff must be >= 1");
  const double ideal = IdealDcg(relevance, k);
  if (ideal <= 0) return 0.0;
  double dcg = 0;
  for (int d = 0; d < marginals.rows(); ++d) {
    for (int i = 0; i < k && i < marginals.cols(); ++i) {
      dcg += marginals(d, i) * relevance[d] / std::log2(i + 2.0);
    }
  }
  return dcg / ideal;
}

double IpsValue(const ItemSums& s, const Eigen::VectorXd& omega_hat,
                const Eigen::VectorXd& rho_hat) {
  return (omega_hat.array() / rho_hat.array() * (s.clicks - s.beta_mass).array()).sum() /
         s.n_impressions;
}

double NaiveValue(const ItemSums& s, const Eigen::VectorXd& omega_hat) {
  return omega_hat.dot(s.clicks) / s.n_impressions;
}

double DmValue(const Eigen::VectorXd& omega_hat, const Eigen::VectorXd& r_hat) {
  return omega_hat.dot(r_hat);
}

double CvValue(const ItemSums& s, const Eigen::VectorXd& omega_hat,
               const Eigen::VectorXd& rho_hat, const Eigen::VectorXd& r_hat) {
  return (omega_hat.array() / rho_hat.array() * s.alpha_mass.array() * r_hat.array()).sum() /
         s.n_impressions;
}

Eigen::VectorXd DrMu(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                     const Eigen::VectorXd& r_hat) {
  return (r_hat.array() + (s.clicks.array() - s.alpha_mass.array() * r_hat.array() -
                           s.beta_mass.array()) /
                              (s.n_impressions * rho_hat.array()))
      .matrix();
}

Eigen::VectorXd IpsMu(const ItemSums& s, const Eigen::VectorXd& rho_hat) {
  return ((s.clicks - s.beta_mass).array() / (s.n_impressions * rho_hat.array())).matrix();
}

Eigen::VectorXd NaiveMu(const ItemSums& s) { return s.clicks / s.n_impressions; }

std::string EstimatorKindName(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kNaive:
      return "naive";
    case EstimatorKind::kIps:
      return "ips";
    case EstimatorKind::kDm:
      return "dm";
    case EstimatorKind::kCv:
      return "cv";
    case EstimatorKind::kDr:
      return "dr";
  }
  return "unknown";
}

std::string EstimateReport::ToJson() const {
  nlohmann::json j;
  j["estimator"] = estimator;
  j["value"] = value;
  j["n_used"] = n_used;
  if (dm) j["dm"] = *dm;
  if (ips) j["ips"] = *ips;
  if (cv) j["cv"] = *cv;
  return j.dump();
}

EstimateReport Estimate(EstimatorKind kind, const std::vector<QueryInputs>& queries,
                        const BiasParams& bias_hat) {
  if (queries.empty()) throw std::invalid_argument("no queries to estimate over");
  EstimateReport report;
  report.estimator = EstimatorKindName(kind);
  double total = 0, dm = 0, ips = 0, cv = 0;
  for (const QueryInputs& q : queries) {
    const long n = q.omega_hat.size();
    const bool needs_r = kind == EstimatorKind::kDm || kind == EstimatorKind::kCv ||
                         kind == EstimatorKind::kDr;
    if (needs_r && q.r_hat.size() != n) {
      throw std::invalid_argument("relevance estimates do not cover every item");
    }
    if (kind == EstimatorKind::kDm) {
      total += DmValue(q.omega_hat, q.r_hat);
      continue;
    }
    if (q.stats == nullptr) throw std::invalid_argument("click statistics missing");
    if (q.stats->num_items() != n) throw std::invalid_argument("stats and omega disagree");
    const ItemSums s = ComputeItemSums(*q.stats, bias_hat);
    report.n_used += q.stats->n_impressions;
    if (kind == EstimatorKind::kNaive) {
      total += NaiveValue(s, q.omega_hat);
      continue;
    }
    if (q.rho_hat.size() != n) throw std::invalid_argument("missing propensity");
    switch (kind) {
      case EstimatorKind::kIps:
        total += IpsValue(s, q.omega_hat, q.rho_hat);
        break;
      case EstimatorKind::kCv:
        total += CvValue(s, q.omega_hat, q.rho_hat, q.r_hat);
        break;
      case EstimatorKind::kDr: {
        const double qdm = DmValue(q.omega_hat, q.r_hat);
        const double qips = IpsValue(s, q.omega_hat, q.rho_hat);
        const double qcv = CvValue(s, q.omega_hat, q.rho_hat, q.r_hat);
        dm += qdm;
        ips += qips;
        cv += qcv;
        break;
      }
      default:
        break;
    }
  }
  const double m = static_cast<double>(queries.size());
  if (kind == EstimatorKind::kDr) {
    report.dm = dm / m;
    report.ips = ips / m;
    report.cv = cv / m;
    report.value = *report.dm + *report.ips - *report.cv;
  } else {
    report.value = total / m;
  }
  return report;
}

Eigen::VectorXd ClampRelevance(const Eigen::VectorXd& r_hat, double eps) {
  return r_hat.cwiseMax(eps).cwiseMin(1.0 - eps);
}

namespace {

void CheckInterior(const Eigen::VectorXd& r_hat) {
  for (long d = 0; d < r_hat.size(); ++d) {
    if (!(r_hat[d] > 0.0 && r_hat[d] < 1.0)) {
      throw DomainError("relevance estimate " + std::to_string(r_hat[d]) +
                        " outside (0, 1); clamp before taking logs");
    }
  }
}

}  // namespace

double CeLossPrev(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                  const Eigen::VectorXd& r_hat) {
  CheckInterior(r_hat);
  const Eigen::ArrayXd w = s.clicks.array() / rho_hat.array();
  return -(w * r_hat.array().log() + (s.n_impressions - w) * (1.0 - r_hat.array()).log()).sum() /
         s.n_impressions;
}

double CeLossNew(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                 const Eigen::VectorXd& r_hat) {
  CheckInterior(r_hat);
  const Eigen::ArrayXd pos = s.clicks.array() - s.beta_mass.array();
  const Eigen::ArrayXd neg = s.alpha_mass.array() + s.beta_mass.array() - s.clicks.array();
  return -((pos * r_hat.array().log() + neg * (1.0 - r_hat.array()).log()) / rho_hat.array())
              .sum() /
         s.n_impressions;
}

Eigen::VectorXd CeLossPrevGrad(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                               const Eigen::VectorXd& r_hat) {
  CheckInterior(r_hat);
  const Eigen::ArrayXd w = s.clicks.array() / rho_hat.array();
  return (-(w / r_hat.array() - (s.n_impressions - w) / (1.0 - r_hat.array())) /
          s.n_impressions)
      .matrix();
}

Eigen::VectorXd CeLossNewGrad(const ItemSums& s, const Eigen::VectorXd& rho_hat,
                              const Eigen::VectorXd& r_hat) {
  CheckInterior(r_hat);
  const Eigen::ArrayXd pos = s.clicks.array() - s.beta_mass.array();
  const Eigen::ArrayXd neg = s.alpha_mass.array() + s.beta_mass.array() - s.clicks.array();
  return (-(pos / r_hat.array() - neg / (1.0 - r_hat.array())) /
          (rho_hat.array() * s.n_impressions))
      .matrix();
}

}  // namespace drltr

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

#include "drltr/oracle.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "drltr/click_log.h"
#include "drltr/estimators.h"
#include "drltr/policy.h"
#include "drltr/propensity.h"

namespace drltr {

void SmallInstance::Validate() const {
  const int n = num_items();
  if (n < 1 || n > kOracleMaxItems) {
    throw std::invalid_argument("oracle instances need 1.." + std::to_string(kOracleMaxItems) +
                                " items, got " + std::to_string(n));
  }
  if (bias.display_cutoff > kOracleMaxCutoff || bias_hat.display_cutoff > kOracleMaxCutoff) {
    throw std::invalid_argument("oracle instances need a display cutoff <= " +
                                std::to_string(kOracleMaxCutoff));
  }
  bias.Validate();
  bias_hat.Validate();
  double total = 0;
  for (const LoggedRanking& lr : logging) {
    if (lr.prob < 0) throw std::invalid_argument("negative ranking probability");
    std::vector<char> seen(n, 0);
    for (int d : lr.ranking) {
      if (d < 0 || d >= n || seen[d]) throw std::invalid_argument("invalid logged ranking");
      seen[d] = 1;
    }
    total += lr.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("logging probabilities sum to " + std::to_string(total));
  }
  if (logging_hat.rows() != n || logging_hat.cols() != n || eval_marginals.rows() != n ||
      eval_marginals.cols() != n || r_hat.size() != n) {
    throw std::invalid_argument("instance inputs have inconsistent sizes");
  }
  if (!(tau > 0 && tau <= 1)) throw std::invalid_argument("tau must lie in (0, 1]");
}

Eigen::MatrixXd SmallInstance::LoggingMarginals() const {
  const int n = num_items();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const LoggedRanking& lr : logging) {
    for (size_t k = 0; k < lr.ranking.size(); ++k) m(lr.ranking[k], k) += lr.prob;
  }
  return m;
}

Eigen::VectorXd SmallInstance::Rho() const { return drltr::Rho(LoggingMarginals(), bias); }
Eigen::VectorXd SmallInstance::RhoHat() const { return drltr::RhoHat(logging_hat, bias_hat, tau); }
Eigen::VectorXd SmallInstance::Omega() const { return drltr::Omega(eval_marginals, bias); }
Eigen::VectorXd SmallInstance::OmegaHat() const {
  return drltr::Omega(eval_marginals, bias_hat);
}
double SmallInstance::TrueEcp() const { return drltr::TrueEcp(Omega(), relevance); }

namespace {

struct Prepared {
  Eigen::VectorXd omega_hat, rho_hat;
};

double Evaluate(OracleEstimator est, const SmallInstance& inst, const Prepared& p,
                const std::vector<int>& ranking, const std::vector<int>& clicks) {
  QueryClickStats stats = QueryClickStats::Empty(0, inst.num_items());
  stats.Add(ranking, clicks);
  const ItemSums s = ComputeItemSums(stats, inst.bias_hat);
  switch (est) {
    case OracleEstimator::kNaive:
      return NaiveValue(s, p.omega_hat);
    case OracleEstimator::kIps:
      return IpsValue(s, p.omega_hat, p.rho_hat);
    case OracleEstimator::kDm:
      return DmValue(p.omega_hat, inst.r_hat);
    case OracleEstimator::kCv:
      return CvValue(s, p.omega_hat, p.rho_hat, inst.r_hat);
    case OracleEstimator::kDr:
      return DmValue(p.omega_hat, inst.r_hat) + IpsValue(s, p.omega_hat, p.rho_hat) -
             CvValue(s, p.omega_hat, p.rho_hat, inst.r_hat);
    case OracleEstimator::kCeNew:
      return CeLossNew(s, p.rho_hat, inst.r_hat);
    case OracleEstimator::kCePrev:
      return CeLossPrev(s, p.rho_hat, inst.r_hat);
  }
  throw std::invalid_argument("unknown estimator");
}

Prepared Prepare(const SmallInstance& inst) {
  inst.Validate();
  return Prepared{inst.OmegaHat(), inst.RhoHat()};
}

// Per-item terms X_d of one impression, with sum_d X_d + const = estimate.
Eigen::VectorXd ItemTerms(OracleEstimator est, const SmallInstance& inst, const Prepared& p,
                          const std::vector<int>& ranking, const std::vector<int>& clicks) {
  QueryClickStats stats = QueryClickStats::Empty(0, inst.num_items());
  stats.Add(ranking, clicks);
  const ItemSums s = ComputeItemSums(stats, inst.bias_hat);
  switch (est) {
    case OracleEstimator::kIps:
      return p.omega_hat.cwiseProduct(IpsMu(s, p.rho_hat));
    case OracleEstimator::kDr:
      return p.omega_hat.cwiseProduct(DrMu(s, p.rho_hat, inst.r_hat));
    default:
      throw std::invalid_argument("per-item terms are defined for IPS and DR only");
  }
}

}  // namespace

double EvaluateImpression(OracleEstimator est, const SmallInstance& inst,
                          const std::vector<int>& ranking, const std::vector<int>& clicks) {
  return Evaluate(est, inst, Prepare(inst), ranking, clicks);
}

void EnumerateOutcomes(const SmallInstance& inst,
                       const std::function<void(const std::vector<int>&,
                                                const std::vector<int>&, double)>& visit) {
  for (const LoggedRanking& lr : inst.logging) {
    if (lr.prob <= 0) continue;
    const int len = static_cast<int>(lr.ranking.size());
    const int shown = std::min(len, inst.bias.display_cutoff);
    std::vector<double> p(shown);
    for (int k = 0; k < shown; ++k) p[k] = ClickProb(inst.relevance[lr.ranking[k]], k, inst.bias);
    std::vector<int> clicks(len, 0);
    for (unsigned mask = 0; mask < (1u << shown); ++mask) {
      double prob = lr.prob;
      for (int k = 0; k < shown; ++k) {
        clicks[k] = (mask >> k) & 1u;
        prob *= clicks[k] ? p[k] : 1.0 - p[k];
      }
      if (prob > 0) visit(lr.ranking, clicks, prob);
    }
  }
}

double ExactExpectation(OracleEstimator est, const SmallInstance& inst) {
  const Prepared prep = Prepare(inst);
  double mean = 0;
  EnumerateOutcomes(inst, [&](const std::vector<int>& r, const std::vector<int>& c, double p) {
    mean += p * Evaluate(est, inst, prep, r, c);
  });
  return mean;
}

double ExactVariance(OracleEstimator est, const SmallInstance& inst, long n) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  const Prepared prep = Prepare(inst);
  const double mean = ExactExpectation(est, inst);
  double var = 0;
  EnumerateOutcomes(inst, [&](const std::vector<int>& r, const std::vector<int>& c, double p) {
    const double dev = Evaluate(est, inst, prep, r, c) - mean;
    var += p * dev * dev;
  });
  return var / static_cast<double>(n);
}

std::vector<ItemMoments> ComputeMoments(const SmallInstance& inst, bool true_params) {
  inst.Validate();
  const int n = inst.num_items();
  const BiasParams& est = true_params ? inst.bias : inst.bias_hat;
  struct Raw {
    double c = 0, a = 0, b = 0, aa = 0, bb = 0, ab = 0, ca = 0, cb = 0;
  };
  std::vector<Raw> raw(n);
  for (const LoggedRanking& lr : inst.logging) {
    for (size_t k = 0; k < lr.ranking.size(); ++k) {
      const int d = lr.ranking[k];
      const int pos = static_cast<int>(k);
      const double pc = ClickProb(inst.relevance[d], pos, inst.bias);
      const double a = est.Alpha(pos), b = est.Beta(pos);
      Raw& r = raw[d];
      r.c += lr.prob * pc;
      r.a += lr.prob * a;
      r.b += lr.prob * b;
      r.aa += lr.prob * a * a;
      r.bb += lr.prob * b * b;
      r.ab += lr.prob * a * b;
      r.ca += lr.prob * pc * a;
      r.cb += lr.prob * pc * b;
    }
  }
  std::vector<ItemMoments> out(n);
  for (int d = 0; d < n; ++d) {
    const Raw& r = raw[d];
    ItemMoments& m = out[d];
    m.e_c = r.c;
    m.v_c = r.c * (1 - r.c);
    m.e_a = r.a;
    m.e_b = r.b;
    m.v_a = r.aa - r.a * r.a;
    m.v_b = r.bb - r.b * r.b;
    m.cov_ab = r.ab - r.a * r.b;
    m.cov_ca = r.ca - r.c * r.a;
    m.cov_cb = r.cb - r.c * r.b;
  }
  return out;
}

double ClosedFormIpsBias(const SmallInstance& inst) {
  const auto hat = ComputeMoments(inst, false);
  const auto tru = ComputeMoments(inst, true);
  const Eigen::VectorXd w = inst.Omega(), w_hat = inst.OmegaHat(), rho_hat = inst.RhoHat();
  double bias = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    const double rho = tru[d].e_a, r = inst.relevance[d];
    // (w_hat/rho_hat)(rho - rho_hat w/w_hat) R written without dividing by w_hat.
    bias += w_hat[d] / rho_hat[d] * rho * r - w[d] * r +
            w_hat[d] / rho_hat[d] * (tru[d].e_b - hat[d].e_b);
  }
  return bias;
}

double SimplifiedIpsBias(const SmallInstance& inst) {
  const Eigen::VectorXd w = inst.Omega(), rho = inst.Rho(), rho_hat = inst.RhoHat();
  double bias = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    bias += w[d] / rho_hat[d] * (rho[d] - rho_hat[d]) * inst.relevance[d];
  }
  return bias;
}

double ClosedFormDrBias(const SmallInstance& inst) {
  const auto hat = ComputeMoments(inst, false);
  const auto tru = ComputeMoments(inst, true);
  const Eigen::VectorXd w = inst.Omega(), w_hat = inst.OmegaHat(), rho_hat = inst.RhoHat();
  double bias = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    const double rho = tru[d].e_a, r = inst.relevance[d], rh = inst.r_hat[d];
    const double g = w_hat[d] / rho_hat[d];
    bias += g * rho * r - w[d] * r + g * (rho_hat[d] - hat[d].e_a) * rh +
            g * (tru[d].e_b - hat[d].e_b);
  }
  return bias;
}

double SimplifiedDrBias(const SmallInstance& inst) {
  const Eigen::VectorXd w = inst.Omega(), rho = inst.Rho(), rho_hat = inst.RhoHat();
  double bias = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    bias += w[d] / rho_hat[d] * (rho[d] - rho_hat[d]) * (inst.relevance[d] - inst.r_hat[d]);
  }
  return bias;
}

double ClosedFormCvExpectation(const SmallInstance& inst) {
  const auto hat = ComputeMoments(inst, false);
  const Eigen::VectorXd w_hat = inst.OmegaHat(), rho_hat = inst.RhoHat();
  double v = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    v += w_hat[d] / rho_hat[d] * hat[d].e_a * inst.r_hat[d];
  }
  return v;
}

double ClosedFormIpsVariance(const SmallInstance& inst, long n) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  const auto m = ComputeMoments(inst, false);
  const Eigen::VectorXd w_hat = inst.OmegaHat(), rho_hat = inst.RhoHat();
  double v = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    const double g = w_hat[d] / rho_hat[d];
    v += g * g * (m[d].v_c + m[d].v_b - 2 * m[d].cov_cb);
  }
  return v / static_cast<double>(n);
}

double ClosedFormDrVariance(const SmallInstance& inst, long n) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  const auto m = ComputeMoments(inst, false);
  const Eigen::VectorXd w_hat = inst.OmegaHat(), rho_hat = inst.RhoHat();
  double v = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    const double g = w_hat[d] / rho_hat[d];
    const double rh = inst.r_hat[d];
    v += g * g *
         (m[d].v_c + m[d].v_b + rh * rh * m[d].v_a -
          2 * (m[d].cov_cb + rh * (m[d].cov_ca - m[d].cov_ab)));
  }
  return v / static_cast<double>(n);
}

double CrossItemCovariance(OracleEstimator est, const SmallInstance& inst, long n) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  const Prepared prep = Prepare(inst);
  const int items = inst.num_items();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(items);
  EnumerateOutcomes(inst, [&](const std::vector<int>& r, const std::vector<int>& c, double p) {
    mean += p * ItemTerms(est, inst, prep, r, c);
  });
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(items, items);
  EnumerateOutcomes(inst, [&](const std::vector<int>& r, const std::vector<int>& c, double p) {
    const Eigen::VectorXd dev = ItemTerms(est, inst, prep, r, c) - mean;
    cov += p * dev * dev.transpose();
  });
  return (cov.sum() - cov.trace()) / static_cast<double>(n);
}

double CovarianceIdentityGap(const SmallInstance& inst) {
  const auto m = ComputeMoments(inst, true);
  double gap = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    gap = std::max(gap, std::abs(m[d].cov_ca - (inst.relevance[d] * m[d].v_a + m[d].cov_ab)));
  }
  return gap;
}

double TrueCrossEntropy(const SmallInstance& inst) {
  double loss = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    const double r = inst.relevance[d], rh = inst.r_hat[d];
    loss -= r * std::log(rh) + (1 - r) * std::log(1 - rh);
  }
  return loss;
}

double ClosedFormCeBias(const SmallInstance& inst) {
  const auto hat = ComputeMoments(inst, false);
  const auto tru = ComputeMoments(inst, true);
  const Eigen::VectorXd rho_hat = inst.RhoHat();
  double bias = 0;
  for (int d = 0; d < inst.num_items(); ++d) {
    const double rho = tru[d].e_a, r = inst.relevance[d], rh = inst.r_hat[d];
    const double pos = (rho_hat[d] - rho) * r + (hat[d].e_b - tru[d].e_b);
    const double neg = (tru[d].e_b - hat[d].e_b - hat[d].e_a) + rho_hat[d] + (rho - rho_hat[d]) * r;
    bias += (pos * std::log(rh) + neg * std::log(1 - rh)) / rho_hat[d];
  }
  return bias;
}

namespace {

double UniformIn(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.Uniform(); }

Eigen::VectorXd RandomScores(int n, Rng& rng) {
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s[i] = 1.5 * rng.Normal();
  return s;
}

std::vector<int> RandomPrefix(int n, int len, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  p.resize(len);
  return p;
}

BiasParams Perturb(const BiasParams& b, Rng& rng) {
  BiasParams out = b;
  for (int k = 0; k < b.display_cutoff; ++k) {
    double a = std::clamp(b.alpha[k] + UniformIn(rng, -0.2, 0.2), 0.0, 1.0);
    double c = std::clamp(b.beta[k] + UniformIn(rng, -0.2, 0.2), 0.0, 1.0);
    if (a + c > 1) {
      const double s = a + c;
      a /= s;
      c /= s;
    }
    out.alpha[k] = a;
    out.beta[k] = c;
  }
  return out;
}

}  // namespace

SmallInstance RandomInstance(const RandomInstanceOptions& o, Rng& rng) {
  SmallInstance inst;
  int n = o.min_items + rng.UniformInt(o.max_items - o.min_items + 1);
  const int cutoff = 1 + rng.UniformInt(kOracleMaxCutoff);
  LoggingKind kind = o.logging;
  if (kind == LoggingKind::kAny) kind = static_cast<LoggingKind>(rng.UniformInt(3));
  // A fixed ranking can only reach every item when all of them are shown.
  if (o.tau_below_min_rho && kind == LoggingKind::kDeterministic) {
    n = std::max(1, std::min(n, cutoff));
  }
  const int len = std::min(n, cutoff);

  inst.relevance.resize(n);
  for (double& r : inst.relevance) r = 0.25 * rng.UniformInt(5);

  std::vector<double> alpha(cutoff), beta(cutoff);
  for (int k = 0; k < cutoff; ++k) {
    alpha[k] = UniformIn(rng, 0.05, 1.0);
    beta[k] = UniformIn(rng, 0.0, 1.0 - alpha[k]);
  }
  inst.bias = BiasParams(alpha, beta);

  switch (kind) {
    case LoggingKind::kDeterministic:
      inst.logging.push_back({RandomPrefix(n, len, rng), 1.0});
      break;
    case LoggingKind::kTable: {
      const int rows = 2 + rng.UniformInt(4);
      std::vector<std::vector<int>> rankings;
      for (int i = 0; i < rows; ++i) rankings.push_back(RandomPrefix(n, len, rng));
      if (o.tau_below_min_rho) {
        std::vector<char> covered(n, 0);
        for (const auto& r : rankings) {
          for (int d : r) covered[d] = 1;
        }
        for (int d = 0; d < n; ++d) {
          if (covered[d]) continue;
          auto r = RandomPrefix(n, len, rng);
          const auto it = std::find(r.begin(), r.end(), d);
          if (it == r.end()) r[0] = d;
          for (int e : r) covered[e] = 1;
          rankings.push_back(r);
        }
      }
      double total = 0;
      std::vector<double> w(rankings.size());
      for (double& x : w) total += (x = UniformIn(rng, 0.05, 1.0));
      for (size_t i = 0; i < rankings.size(); ++i) {
        inst.logging.push_back({rankings[i], w[i] / total});
      }
      break;
    }
    case LoggingKind::kPlackettLuce:
    case LoggingKind::kAny: {
      const Eigen::VectorXd s = RandomScores(n, rng);
      EnumerateRankings(s, len, [&](const std::vector<int>& r, double p) {
        inst.logging.push_back({r, p});
      });
      // Renormalize away floating-point drift in the product of PL factors.
      double total = 0;
      for (const auto& lr : inst.logging) total += lr.prob;
      for (auto& lr : inst.logging) lr.prob /= total;
      break;
    }
  }

  inst.bias_hat = o.correct_bias ? inst.bias : Perturb(inst.bias, rng);
  const Eigen::MatrixXd pi0 = inst.LoggingMarginals();
  if (o.correct_logging) {
    inst.logging_hat = pi0;
  } else {
    const double lambda = rng.Uniform();
    inst.logging_hat =
        (1 - lambda) * pi0 + lambda * ExactRankMarginals(RandomScores(n, rng), len).prob;
  }

  if (o.tau_below_min_rho) {
    const double min_rho = drltr::Rho(pi0, inst.bias).minCoeff();
    inst.tau = std::min(1.0, UniformIn(rng, 0.05, 1.0) * min_rho);
  } else {
    inst.tau = std::exp(UniformIn(rng, std::log(0.01), 0.0));
  }

  inst.r_hat.resize(n);
  for (int d = 0; d < n; ++d) {
    const double r = inst.relevance[d];
    switch (o.r_hat) {
      case RelevanceEstimateKind::kFree:
        inst.r_hat[d] = rng.Uniform();
        break;
      case RelevanceEstimateKind::kWithinTwice:
        inst.r_hat[d] = UniformIn(rng, 0.0, std::min(1.0, 2 * r));
        break;
      case RelevanceEstimateKind::kZero:
        inst.r_hat[d] = 0.0;
        break;
      case RelevanceEstimateKind::kExact:
        inst.r_hat[d] = r;
        break;
    }
  }
  if (o.r_hat_clamp > 0) inst.r_hat = ClampRelevance(inst.r_hat, o.r_hat_clamp);

  if (rng.Uniform() < 0.25) {
    inst.eval_marginals = RankingMarginals(RandomPrefix(n, len, rng), n).prob;
  } else {
    inst.eval_marginals = ExactRankMarginals(RandomScores(n, rng), len).prob;
  }
  inst.Validate();
  return inst;
}

}  // namespace drltr

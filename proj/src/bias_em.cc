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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "drltr/regression.h"

namespace drltr {

BiasParams ProjectBiasParams(const std::vector<double>& alpha, const std::vector<double>& beta) {
  if (alpha.size() != beta.size()) throw std::invalid_argument("alpha and beta differ in length");
  std::vector<double> a(alpha.size()), b(beta.size());
  for (size_t k = 0; k < alpha.size(); ++k) {
    a[k] = std::max(alpha[k], 0.0);
    b[k] = std::max(beta[k], 0.0);
    const double s = a[k] + b[k];
    if (s > 1.0) {
      a[k] /= s;
      b[k] /= s;
    }
  }
  return BiasParams(a, b);
}

void EmConfig::Validate() const {
  if (iterations < 1) throw std::invalid_argument("EM needs >= 1 iteration");
  if (inner_epochs < 0 || cutoff < 1) throw std::invalid_argument("bad EM config");
  if (!(init_alpha >= 0 && init_beta >= 0 && init_alpha + init_beta <= 1)) {
    throw std::invalid_argument("EM initial parameters violate alpha, beta >= 0, sum <= 1");
  }
}

namespace {

double SafeLog(double x) { return std::log(std::max(x, 1e-300)); }

struct Posterior {
  // Per query: posterior P(R = 1) for clicked and unclicked displays, n x K.
  Eigen::MatrixXd clicked, unclicked;
};

// Weighted relevance targets: t_d = E[R | clicks of d], w_d = displays of d.
struct Targets {
  std::vector<const Query*> queries;
  std::vector<Eigen::VectorXd> target, weight;
};

double RelevanceObjective(const Targets& t, const std::vector<Eigen::VectorXd>& r_hat) {
  double q = 0;
  for (size_t i = 0; i < t.queries.size(); ++i) {
    for (long d = 0; d < r_hat[i].size(); ++d) {
      const double w = t.weight[i][d];
      if (w == 0) continue;
      q += w * (t.target[i][d] * SafeLog(r_hat[i][d]) +
                (1 - t.target[i][d]) * SafeLog(1 - r_hat[i][d]));
    }
  }
  return q;
}

std::vector<Eigen::VectorXd> Predict(const Mlp& model, const Targets& t, double eps) {
  std::vector<Eigen::VectorXd> out;
  for (const Query* q : t.queries) out.push_back(PredictRelevance(model, *q, eps));
  return out;
}

// Weighted binary cross-entropy fit of the relevance model to the targets.
Mlp FitRelevance(Mlp model, const Targets& t, const EmConfig& config) {
  double total_weight = 0;
  for (const auto& w : t.weight) total_weight += w.sum();
  if (total_weight == 0) return model;
  AdamOptimizer opt(config.learning_rate);
  const double eps = config.clamp_eps;
  Mlp::Trace trace;
  for (int epoch = 0; epoch < config.inner_epochs; ++epoch) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.num_params());
    for (size_t i = 0; i < t.queries.size(); ++i) {
      const Eigen::VectorXd s = model.Forward(t.queries[i]->features(), &trace);
      const Eigen::ArrayXd sig = 1.0 / (1.0 + (-s.array()).exp());
      const Eigen::ArrayXd r = eps + (1 - 2 * eps) * sig;
      const Eigen::ArrayXd tt = t.target[i].array();
      const Eigen::ArrayXd dl_dr = -t.weight[i].array() * (tt / r - (1 - tt) / (1 - r));
      grad += model.Backward(trace, (dl_dr * (1 - 2 * eps) * sig * (1 - sig)).matrix());
    }
    opt.Step(model.mutable_params(), grad / total_weight);
  }
  return model;
}

}  // namespace

double ClickLogLikelihood(const std::map<int, QueryClickStats>& stats, const BiasParams& bias,
                          const std::map<int, Eigen::VectorXd>& relevance) {
  double ll = 0;
  for (const auto& [qid, s] : stats) {
    const Eigen::VectorXd& r = relevance.at(qid);
    const int width = std::min(s.num_positions(), bias.display_cutoff);
    for (int d = 0; d < s.num_items(); ++d) {
      for (int k = 0; k < width; ++k) {
        const double n = s.displays(d, k);
        if (n == 0) continue;
        const double c = s.clicks(d, k);
        const double p = bias.Alpha(k) * r[d] + bias.Beta(k);
        ll += c * SafeLog(p) + (n - c) * SafeLog(1 - p);
      }
    }
  }
  return ll;
}

EmResult EmEstimateBias(const std::map<int, QueryClickStats>& stats, const Dataset& dataset,
                        const EmConfig& config) {
  config.Validate();
  if (stats.empty()) throw std::invalid_argument("EM needs a nonempty log");
  std::unordered_map<int, const Query*> index;
  for (const auto* part : {&dataset.train, &dataset.validation, &dataset.test}) {
    for (const Query& q : *part) index[q.id()] = &q;
  }

  const int K = config.cutoff;
  EmResult result;
  result.bias = config.initial_bias
                    ? ProjectBiasParams(AlphaVector(*config.initial_bias, K),
                                        BetaVector(*config.initial_bias, K))
                    : BiasParams(std::vector<double>(K, config.init_alpha),
                                 std::vector<double>(K, config.init_beta));
  Rng rng(DeriveSeed(config.seed, {0xe4}));
  result.model = Mlp(dataset.feature_dim);
  result.model.InitXavier(rng);

  Targets targets;
  for (const auto& [qid, s] : stats) {
    auto it = index.find(qid);
    if (it == index.end()) throw std::invalid_argument("log names unknown query");
    targets.queries.push_back(it->second);
  }
  std::vector<Eigen::VectorXd> r_hat;
  if (config.initial_relevance) {
    for (const auto& [qid, s] : stats) r_hat.push_back(config.initial_relevance->at(qid));
  } else {
    r_hat = Predict(result.model, targets, config.clamp_eps);
  }
  auto relevance_map = [&]() {
    std::map<int, Eigen::VectorXd> m;
    size_t i = 0;
    for (const auto& [qid, s] : stats) m[qid] = r_hat[i++];
    return m;
  };
  result.log_likelihood.push_back(ClickLogLikelihood(stats, result.bias, relevance_map()));

  for (int iter = 0; iter < config.iterations; ++iter) {
    // E-step, accumulated directly into the M-step sufficient statistics.
    std::vector<double> rel_clicks(K, 0), rel_mass(K, 0), irr_clicks(K, 0), irr_mass(K, 0);
    std::vector<double> rank_clicks(K, 0), rank_displays(K, 0);
    targets.target.clear();
    targets.weight.clear();
    size_t i = 0;
    for (const auto& [qid, s] : stats) {
      const Eigen::VectorXd& r = r_hat[i++];
      Eigen::VectorXd post_sum = Eigen::VectorXd::Zero(s.num_items());
      Eigen::VectorXd shown = Eigen::VectorXd::Zero(s.num_items());
      const int width = std::min(s.num_positions(), K);
      for (int d = 0; d < s.num_items(); ++d) {
        for (int k = 0; k < width; ++k) {
          const double n = s.displays(d, k);
          if (n == 0) continue;
          const double c = s.clicks(d, k);
          const double a = result.bias.alpha[k], b = result.bias.beta[k];
          const double p_click = a * r[d] + b;
          const double q_click = p_click > 0 ? (a + b) * r[d] / p_click : r[d];
          const double q_none = p_click < 1 ? (1 - a - b) * r[d] / (1 - p_click) : r[d];
          rel_clicks[k] += c * q_click;
          rel_mass[k] += c * q_click + (n - c) * q_none;
          irr_clicks[k] += c * (1 - q_click);
          irr_mass[k] += c * (1 - q_click) + (n - c) * (1 - q_none);
          rank_clicks[k] += c;
          rank_displays[k] += n;
          post_sum[d] += c * q_click + (n - c) * q_none;
          shown[d] += n;
        }
      }
      Eigen::VectorXd target = r;
      for (int d = 0; d < s.num_items(); ++d) {
        if (shown[d] > 0) target[d] = post_sum[d] / shown[d];
      }
      targets.target.push_back(target);
      targets.weight.push_back(shown);
    }

    // M-step for the click parameters: theta1 = alpha + beta, theta0 = beta.
    std::vector<double> alpha = result.bias.alpha, beta = result.bias.beta;
    for (int k = 0; k < K; ++k) {
      if (rank_displays[k] == 0) continue;
      const double theta1 = rel_mass[k] > 0 ? rel_clicks[k] / rel_mass[k] : 0.0;
      const double theta0 = irr_mass[k] > 0 ? irr_clicks[k] / irr_mass[k] : 0.0;
      if (theta1 >= theta0) {
        alpha[k] = theta1 - theta0;
        beta[k] = theta0;
      } else {
        alpha[k] = 0.0;
        beta[k] = rank_clicks[k] / rank_displays[k];
      }
    }
    result.bias = ProjectBiasParams(alpha, beta);

    // Relevance refit, kept only when it raises the expected log-prior.
    if (config.inner_epochs > 0) {
      Mlp candidate = FitRelevance(result.model, targets, config);
      std::vector<Eigen::VectorXd> proposal = Predict(candidate, targets, config.clamp_eps);
      if (RelevanceObjective(targets, proposal) > RelevanceObjective(targets, r_hat)) {
        result.model = std::move(candidate);
        r_hat = std::move(proposal);
      }
    }
    result.log_likelihood.push_back(ClickLogLikelihood(stats, result.bias, relevance_map()));
  }
  result.relevance = relevance_map();
  return result;
}

}  // namespace drltr

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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "drltr/errors.h"
#include "drltr/propensity.h"

namespace drltr {

double RankingReward(const std::vector<int>& ranking, const Eigen::VectorXd& mu_hat,
                     const BiasParams& bias) {
  double r = 0;
  for (size_t k = 0; k < ranking.size(); ++k) r += bias.Weight(static_cast<int>(k)) * mu_hat[ranking[k]];
  return r;
}

PolicyGradientResult PolicyGradient(const Eigen::VectorXd& scores, const Eigen::VectorXd& mu_hat,
                                    const BiasParams& bias, int length, int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("policy gradient needs >= 1 sample");
  PolicyGradientResult out;
  out.rankings.reserve(n_samples);
  std::vector<double> rewards(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    out.rankings.push_back(SampleRanking(scores, length, rng));
    rewards[i] = RankingReward(out.rankings.back(), mu_hat, bias);
  }
  const double total = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  out.mean_reward = total / n_samples;
  out.grad = Eigen::VectorXd::Zero(scores.size());
  for (int i = 0; i < n_samples; ++i) {
    const double baseline = n_samples > 1 ? (total - rewards[i]) / (n_samples - 1) : 0.0;
    const double adv = rewards[i] - baseline;
    if (adv != 0.0) out.grad += adv * PlLogProbGrad(scores, out.rankings[i]);
  }
  out.grad /= n_samples;
  return out;
}

double ExactExpectedReward(const Eigen::VectorXd& scores, const Eigen::VectorXd& mu_hat,
                           const BiasParams& bias, int length) {
  double v = 0;
  EnumerateRankings(scores, length, [&](const std::vector<int>& r, double p) {
    v += p * RankingReward(r, mu_hat, bias);
  });
  return v;
}

void LtrConfig::Validate() const {
  if (!(learning_rate >= 0) || max_steps < 0 || queries_per_step < 1 || n_samples < 1 ||
      eval_interval < 1 || patience < 1 || eval_samples < 1) {
    throw std::invalid_argument("invalid policy training config");
  }
}

std::string LtrResult::TraceCsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,train_objective,validation_estimate\n";
  for (const TraceRow& r : trace) {
    out << r.step << ',' << r.train_objective << ',' << r.validation_estimate << '\n';
  }
  return out.str();
}

double PolicyObjective(const Mlp& model, const std::vector<PolicyTarget>& targets,
                       const BiasParams& bias, int cutoff, int mc_samples, Rng& rng) {
  if (targets.empty()) throw std::invalid_argument("no queries to evaluate");
  const PlPolicy policy(model, PolicyMode::kStochastic);
  const MarginalMode mode{true, mc_samples};
  double total = 0;
  for (const PolicyTarget& t : targets) {
    const RankMarginals m = policy.Marginals(*t.query, DisplayLength(*t.query, cutoff), mode, rng);
    total += Omega(m.prob, bias).dot(t.mu_hat);
  }
  return total / static_cast<double>(targets.size());
}

LtrResult TrainPolicy(const Mlp& initial, const std::vector<PolicyTarget>& train,
                      const std::vector<PolicyTarget>& validation, const BiasParams& bias,
                      int cutoff, const LtrConfig& config) {
  config.Validate();
  if (train.empty()) throw std::invalid_argument("no training queries for the policy");
  const std::vector<PolicyTarget>& valid = validation.empty() ? train : validation;
  Rng rng(DeriveSeed(config.seed, {0x17}));
  const uint64_t eval_seed = DeriveSeed(config.seed, {0x18});

  // Same random numbers for every evaluation, so checkpoints are compared on
  // equal footing.
  auto evaluate = [&](const Mlp& m) {
    Rng eval_rng(eval_seed);
    return PolicyObjective(m, valid, bias, cutoff, config.eval_samples, eval_rng);
  };

  LtrResult result;
  Mlp model = initial;
  result.model = model;
  result.best_validation = evaluate(model);
  result.trace.push_back({0, std::nan(""), result.best_validation});

  AdamOptimizer opt(config.learning_rate);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();
  int since_best = 0;
  double running_objective = 0;
  int running_count = 0;
  Mlp::Trace trace;
  for (int step = 1; step <= config.max_steps; ++step) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.num_params());
    const int batch = std::min<int>(config.queries_per_step, static_cast<int>(train.size()));
    for (int b = 0; b < batch; ++b) {
      if (cursor >= order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const PolicyTarget& t = train[order[cursor++]];
      const Eigen::VectorXd scores = model.Forward(t.query->features(), &trace);
      if (!scores.allFinite()) {
        throw DivergenceError("non-finite policy scores at step " + std::to_string(step));
      }
      const PolicyGradientResult pg = PolicyGradient(
          scores, t.mu_hat, bias, DisplayLength(*t.query, cutoff), config.n_samples, rng);
      running_objective += pg.mean_reward;
      ++running_count;
      // Ascent: minimize the negated objective.
      grad -= model.Backward(trace, pg.grad);
    }
    grad /= batch;
    opt.Step(model.mutable_params(), grad);
    if (!model.params().allFinite()) {
      throw DivergenceError("non-finite policy parameters at step " + std::to_string(step));
    }
    if (step % config.eval_interval == 0 || step == config.max_steps) {
      const double v = evaluate(model);
      result.trace.push_back({step, running_objective / std::max(1, running_count), v});
      running_objective = 0;
      running_count = 0;
      if (v > result.best_validation) {
        result.best_validation = v;
        result.best_step = step;
        result.model = model;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    }
  }
  return result;
}

}  // namespace drltr

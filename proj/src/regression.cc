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

#include "drltr/regression.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "drltr/errors.h"
#include "drltr/estimators.h"

namespace drltr {

void RegressionConfig::Validate() const {
  if (!(learning_rate >= 0) || epochs < 0 || batch_size < 1) {
    throw std::invalid_argument("regression config needs lr >= 0, epochs >= 0, batch >= 1");
  }
  if (!(clamp_eps > 0 && clamp_eps < 0.5)) {
    throw std::invalid_argument("clamp epsilon must lie in (0, 0.5)");
  }
  if (!(momentum >= 0 && momentum < 1)) throw std::invalid_argument("momentum must be in [0, 1)");
}

namespace {

Eigen::ArrayXd Sigmoid(const Eigen::VectorXd& s) { return 1.0 / (1.0 + (-s.array()).exp()); }

struct Prepared {
  const Query* query;
  ItemSums sums;
  Eigen::VectorXd rho_hat;
};

std::vector<Prepared> Prepare(const std::vector<RegressionQuery>& queries,
                              const BiasParams& bias_hat) {
  std::vector<Prepared> out;
  out.reserve(queries.size());
  for (const RegressionQuery& q : queries) {
    if (q.query == nullptr || q.stats == nullptr) {
      throw std::invalid_argument("regression query missing items or stats");
    }
    if (q.rho_hat.size() != q.query->size()) throw std::invalid_argument("rho_hat size mismatch");
    out.push_back({q.query, ComputeItemSums(*q.stats, bias_hat), q.rho_hat});
  }
  return out;
}

double QueryLoss(const Prepared& p, const Eigen::VectorXd& r_hat, CeLossKind kind) {
  return kind == CeLossKind::kNew ? CeLossNew(p.sums, p.rho_hat, r_hat)
                                  : CeLossPrev(p.sums, p.rho_hat, r_hat);
}

// Loss and parameter gradient averaged over `batch`.
double LossAndGrad(const Mlp& model, const std::vector<Prepared>& prepared,
                   const std::vector<int>& batch, const RegressionConfig& config,
                   Eigen::VectorXd* grad) {
  if (grad != nullptr) *grad = Eigen::VectorXd::Zero(model.num_params());
  double loss = 0;
  Mlp::Trace trace;
  const double eps = config.clamp_eps;
  for (int i : batch) {
    const Prepared& p = prepared[i];
    const Eigen::VectorXd scores = model.Forward(p.query->features(), &trace);
    if (!scores.allFinite()) {
      throw DivergenceError("regression produced non-finite scores for query " +
                            std::to_string(p.query->id()) + "; lower the learning rate");
    }
    const Eigen::ArrayXd sig = Sigmoid(scores);
    const Eigen::VectorXd r_hat = (eps + (1 - 2 * eps) * sig).matrix();
    loss += QueryLoss(p, r_hat, config.loss);
    if (grad != nullptr) {
      const Eigen::VectorXd dl_dr = config.loss == CeLossKind::kNew
                                        ? CeLossNewGrad(p.sums, p.rho_hat, r_hat)
                                        : CeLossPrevGrad(p.sums, p.rho_hat, r_hat);
      const Eigen::VectorXd upstream =
          (dl_dr.array() * (1 - 2 * eps) * sig * (1 - sig)).matrix();
      *grad += model.Backward(trace, upstream);
    }
  }
  const double m = static_cast<double>(batch.size());
  if (grad != nullptr) *grad /= m;
  return loss / m;
}

std::vector<int> AllIndices(size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

Eigen::VectorXd PredictRelevance(const Mlp& model, const Query& query, double clamp_eps) {
  const Eigen::ArrayXd r = clamp_eps + (1 - 2 * clamp_eps) * Sigmoid(model.Score(query.features()));
  // Rounding can land one ulp outside the bounds.
  return r.max(clamp_eps).min(1 - clamp_eps).matrix();
}

double RegressionLoss(const Mlp& model, const std::vector<RegressionQuery>& queries,
                      const BiasParams& bias_hat, const RegressionConfig& config) {
  const auto prepared = Prepare(queries, bias_hat);
  return LossAndGrad(model, prepared, AllIndices(prepared.size()), config, nullptr);
}

Eigen::VectorXd RegressionLossGrad(const Mlp& model, const std::vector<RegressionQuery>& queries,
                                   const BiasParams& bias_hat, const RegressionConfig& config) {
  const auto prepared = Prepare(queries, bias_hat);
  Eigen::VectorXd grad;
  LossAndGrad(model, prepared, AllIndices(prepared.size()), config, &grad);
  return grad;
}

std::map<int, Eigen::VectorXd> RegressionResult::PredictAll(const Dataset& dataset) const {
  std::map<int, Eigen::VectorXd> out;
  for (const auto* part : {&dataset.train, &dataset.validation, &dataset.test}) {
    for (const Query& q : *part) out[q.id()] = Predict(q);
  }
  return out;
}

RegressionResult TrainRegression(const std::vector<RegressionQuery>& queries,
                                 const BiasParams& bias_hat, int feature_dim,
                                 const RegressionConfig& config) {
  Mlp model(feature_dim);
  Rng rng(DeriveSeed(config.seed, {0x4e6}));
  model.InitXavier(rng);
  return TrainRegression(queries, bias_hat, std::move(model), config);
}

RegressionResult TrainRegression(const std::vector<RegressionQuery>& queries,
                                 const BiasParams& bias_hat, Mlp initial,
                                 const RegressionConfig& config) {
  config.Validate();
  if (queries.empty()) throw std::invalid_argument("no queries to train the regression on");
  const auto prepared = Prepare(queries, bias_hat);
  RegressionResult result;
  result.model = std::move(initial);
  result.clamp_eps = config.clamp_eps;
  Rng rng(DeriveSeed(config.seed, {0x5e6}));
  SgdOptimizer opt(config.learning_rate, config.momentum);
  std::vector<int> order = AllIndices(prepared.size());
  const std::vector<int> all = order;
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const std::vector<int> batch(order.begin() + start, order.begin() + end);
      const double loss = LossAndGrad(result.model, prepared, batch, config, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "regression diverged at epoch " << epoch << " (batch loss " << loss
            << ", learning rate " << config.learning_rate << ")";
        throw DivergenceError(msg.str());
      }
      opt.Step(result.model.mutable_params(), grad);
    }
    const double full = LossAndGrad(result.model, prepared, all, config, nullptr);
    if (!std::isfinite(full) || !result.model.params().allFinite()) {
      throw DivergenceError("regression diverged after epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(full);
  }
  return result;
}

}  // namespace drltr

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
#include <numeric>
#include <string>

#include "drltr/errors.h"

namespace drltr {

BiasParams::BiasParams(std::vector<double> a, std::vector<double> b)
    : alpha(std::move(a)), beta(std::move(b)), display_cutoff(static_cast<int>(alpha.size())) {
  Validate();
}

BiasParams::BiasParams(std::vector<double> a, std::vector<double> b, int cutoff)
    : alpha(std::move(a)), beta(std::move(b)), display_cutoff(cutoff) {
  Validate();
}

void BiasParams::Validate() const {
  if (display_cutoff < 0) throw DomainError("negative display cutoff");
  if (static_cast<int>(alpha.size()) < display_cutoff ||
      static_cast<int>(beta.size()) < display_cutoff) {
    throw DomainError("bias vectors shorter than the display cutoff");
  }
  // Small slack for values produced by floating-point arithmetic.
  constexpr double kSlack = 1e-12;
  for (int k = 0; k < display_cutoff; ++k) {
    const double a = alpha[k], b = beta[k];
    if (!(a >= -kSlack && b >= -kSlack && a <= 1 + kSlack && b <= 1 + kSlack &&
          a + b <= 1 + kSlack)) {
      throw DomainError("bias parameters at rank " + std::to_string(k + 1) +
                        " violate 0 <= alpha, beta and alpha + beta <= 1");
    }
  }
}

double ClickProb(double relevance, int pos, const BiasParams& params) {
  if (!(relevance >= 0.0 && relevance <= 1.0)) {
    throw DomainError("relevance probability outside [0, 1]");
  }
  return params.Alpha(pos) * relevance + params.Beta(pos);
}

BiasParams FromExaminationModel(const ExaminationModel& model, int cutoff) {
  if (static_cast<int>(model.exam_prob.size()) < cutoff ||
      static_cast<int>(model.eps_plus.size()) < cutoff ||
      static_cast<int>(model.eps_minus.size()) < cutoff) {
    throw DomainError("examination model shorter than cutoff");
  }
  BiasParams out;
  out.display_cutoff = cutoff;
  out.alpha.resize(cutoff);
  out.beta.resize(cutoff);
  for (int k = 0; k < cutoff; ++k) {
    const double o = model.exam_prob[k];
    const double ep = model.eps_plus[k];
    const double em = model.eps_minus[k];
    for (double v : {o, ep, em}) {
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("examination probability outside [0, 1]");
    }
    if (ep < em) {
      throw DomainError("eps+ < eps- at rank " + std::to_string(k + 1));
    }
    out.alpha[k] = o * (ep - em);
    out.beta[k] = o * em;
  }
  out.Validate();
  return out;
}

BiasParams Top5Params() {
  return BiasParams({0.35, 0.53, 0.55, 0.54, 0.52}, {0.65, 0.26, 0.15, 0.11, 0.08});
}

BiasParams FullRankingParams(int cutoff) {
  if (cutoff < 1) throw DomainError("cutoff must be >= 1");
  ExaminationModel m;
  for (int k = 1; k <= cutoff; ++k) {
    const double base = 1.0 + (k - 1) / 5.0;
    m.exam_prob.push_back(1.0 / (base * base));
    m.eps_plus.push_back(1.0);
    m.eps_minus.push_back(0.1 + 0.6 / (1.0 + k / 20.0));
  }
  return FromExaminationModel(m, cutoff);
}

BiasParams InterpolateTowardMean(const BiasParams& params, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("z must lie in [0, 1]");
  const int k = params.display_cutoff;
  BiasParams out = params;
  if (k == 0) return out;
  const double mean_a =
      std::accumulate(params.alpha.begin(), params.alpha.begin() + k, 0.0) / k;
  const double mean_b =
      std::accumulate(params.beta.begin(), params.beta.begin() + k, 0.0) / k;
  for (int i = 0; i < k; ++i) {
    out.alpha[i] = z * params.alpha[i] + (1 - z) * mean_a;
    out.beta[i] = z * params.beta[i] + (1 - z) * mean_b;
  }
  return out;
}

std::vector<int> SimulateSession(const std::vector<int>& ranking,
                                 const std::vector<double>& relevance,
                                 const BiasParams& params, Rng& rng) {
  if (ranking.size() > relevance.size()) {
    throw std::invalid_argument("ranking longer than the item list");
  }
  std::vector<int> clicks(ranking.size(), 0);
  for (size_t k = 0; k < ranking.size(); ++k) {
    const int pos = static_cast<int>(k);
    if (pos >= params.display_cutoff) break;
    clicks[k] = rng.Bernoulli(ClickProb(relevance.at(ranking[k]), pos, params)) ? 1 : 0;
  }
  return clicks;
}

}  // namespace drltr

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
// The affine click model P(C = 1 | d, k) = alpha_k R_d + beta_k, its
// derivation from an examination/trust model, and single-session simulation.
//
// Ranks are 0-based everywhere in the API (position 0 is the top slot).

#ifndef DRLTR_CLICK_MODEL_H_
#define DRLTR_CLICK_MODEL_H_

#include <vector>

#include "drltr/random.h"

namespace drltr {

struct BiasParams {
  std::vector<double> alpha;
  std::vector<double> beta;
  // Positions at or beyond the cutoff are never displayed.
  int display_cutoff = 0;

  BiasParams() = default;
  // display_cutoff defaults to alpha.size().
  BiasParams(std::vector<double> alpha, std::vector<double> beta);
  BiasParams(std::vector<double> alpha, std::vector<double> beta, int cutoff);

  double Alpha(int pos) const {
    return pos >= 0 && pos < display_cutoff ? alpha[pos] : 0.0;
  }
  double Beta(int pos) const {
    return pos >= 0 && pos < display_cutoff ? beta[pos] : 0.0;
  }
  // alpha_k + beta_k, the expected click weight of a fully relevant item.
  double Weight(int pos) const { return Alpha(pos) + Beta(pos); }

  // Throws DomainError unless 0 <= alpha, beta, alpha + beta <= 1 and the
  // vectors cover the cutoff.
  void Validate() const;

  bool operator==(const BiasParams& other) const = default;
};

struct ExaminationModel {
  std::vector<double> exam_prob;  // P(O = 1 | k)
  std::vector<double> eps_plus;   // P(C = 1 | O = 1, R = 1, k)
  std::vector<double> eps_minus;  // P(C = 1 | O = 1, R = 0, k)
};

// alpha_k R + beta_k; zero beyond the cutoff. Throws DomainError for R
// outside [0, 1].
double ClickProb(double relevance, int pos, const BiasParams& params);

// alpha_k = P(O|k)(eps+ - eps-), beta_k = P(O|k) eps-, for k < cutoff.
BiasParams FromExaminationModel(const ExaminationModel& model, int cutoff);

// Top-5 parameters used in the semi-synthetic experiments.
BiasParams Top5Params();

// P(O|k) = (1 + (k-1)/5)^-2, eps+ = 1, eps- = 0.1 + 0.6/(1 + k/20) with k
// 1-based, for ranks 1..cutoff.
BiasParams FullRankingParams(int cutoff);

// Rank-averaged interpolation: a'_k = z a_k + (1 - z) mean(a), likewise for
// beta, with the mean taken over displayed ranks. z in [0, 1].
BiasParams InterpolateTowardMean(const BiasParams& params, double z);

// Independent Bernoulli(alpha_k R + beta_k) click per displayed position.
// ranking[k] indexes into relevance.
std::vector<int> SimulateSession(const std::vector<int>& ranking,
                                 const std::vector<double>& relevance,
                                 const BiasParams& params, Rng& rng);

}  // namespace drltr

#endif  // DRLTR_CLICK_MODEL_H_

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
// Small fully connected scorer (input -> 32 -> 32 -> 1, tanh hidden units)
// with manual backpropagation, plus the optimizers used to train it.

#ifndef DRLTR_MLP_H_
#define DRLTR_MLP_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "drltr/random.h"

namespace drltr {

class Mlp {
 public:
  // Cached activations of one batched forward pass.
  struct Trace {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> hidden;  // post-activation, one per hidden layer
    Eigen::VectorXd output;
  };

  Mlp() = default;
  // All parameters zero.
  Mlp(int input_dim, std::vector<int> hidden = {32, 32});

  // Glorot-uniform weights, zero biases.
  void InitXavier(Rng& rng);

  int input_dim() const { return sizes_.empty() ? 0 : sizes_.front(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  int num_params() const { return static_cast<int>(params_.size()); }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& mutable_params() { return params_; }
  void set_params(const Eigen::VectorXd& p);

  // One score per row of `features`. Throws std::invalid_argument on a
  // feature dimension mismatch.
  Eigen::VectorXd Score(const Eigen::MatrixXd& features) const;
  double Score(const std::vector<double>& features) const;
  Eigen::VectorXd Forward(const Eigen::MatrixXd& features, Trace* trace) const;

  // Gradient of sum_i upstream[i] * score_i with respect to the flat
  // parameter vector.
  Eigen::VectorXd Backward(const Trace& trace, const Eigen::VectorXd& upstream) const;

  // JSON checkpoint: versioned header, layer sizes, row-major weights.
  std::string ToJson() const;
  static Mlp FromJson(const std::string& text);
  void Save(const std::string& path) const;
  static Mlp Load(const std::string& path);

  bool operator==(const Mlp& other) const {
    return sizes_ == other.sizes_ && params_ == other.params_;
  }

 private:
  std::vector<int> sizes_;
  // Start of layer l's row-major weight block; its bias vector follows.
  std::vector<int> offsets_;
  Eigen::VectorXd params_;
};

// Descent steps on a flat parameter vector.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(double learning_rate, double momentum = 0.0)
      : lr_(learning_rate), momentum_(momentum) {}
  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, momentum_;
  Eigen::VectorXd velocity_;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(eps) {}
  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace drltr

#endif  // DRLTR_MLP_H_

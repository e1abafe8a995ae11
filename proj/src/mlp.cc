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

#include "drltr/mlp.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "drltr/errors.h"
#include "json.hpp"

namespace drltr {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr char kFormat[] = "drltr-mlp";
constexpr int kVersion = 1;

}  // namespace

Mlp::Mlp(int input_dim, std::vector<int> hidden) {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  sizes_.push_back(input_dim);
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be >= 1");
    sizes_.push_back(h);
  }
  sizes_.push_back(1);
  int offset = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(offset);
    offset += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

void Mlp::InitXavier(Rng& rng) {
  params_.setZero();
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < in * out; ++i) {
      params_[offsets_[l] + i] = (2.0 * rng.Uniform() - 1.0) * limit;
    }
  }
}

void Mlp::set_params(const Eigen::VectorXd& p) {
  if (p.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  params_ = p;
}

Eigen::VectorXd Mlp::Forward(const Eigen::MatrixXd& features, Trace* trace) const {
  if (features.cols() != input_dim()) {
    throw std::invalid_argument("feature dimension " + std::to_string(features.cols()) +
                                " does not match model input " + std::to_string(input_dim()));
  }
  const int layers = static_cast<int>(sizes_.size()) - 1;
  Eigen::MatrixXd act = features;
  if (trace != nullptr) {
    trace->input = features;
    trace->hidden.clear();
  }
  for (int l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::Map<const RowMatrix> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + offsets_[l] + out * in, out);
    Eigen::MatrixXd z = act * w.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < layers) {
      act = z.array().tanh().matrix();
      if (trace != nullptr) trace->hidden.push_back(act);
    } else {
      act = std::move(z);
    }
  }
  Eigen::VectorXd out = act.col(0);
  if (trace != nullptr) trace->output = out;
  return out;
}

Eigen::VectorXd Mlp::Score(const Eigen::MatrixXd& features) const {
  return Forward(features, nullptr);
}

double Mlp::Score(const std::vector<double>& features) const {
  Eigen::MatrixXd row(1, features.size());
  for (size_t j = 0; j < features.size(); ++j) row(0, j) = features[j];
  return Forward(row, nullptr)[0];
}

Eigen::VectorXd Mlp::Backward(const Trace& trace, const Eigen::VectorXd& upstream) const {
  const int layers = static_cast<int>(sizes_.size()) - 1;
  if (upstream.size() != trace.output.size()) {
    throw std::invalid_argument("upstream gradient length mismatch");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = upstream;  // dL/dz for the current layer, n x out
  for (int l = layers - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Eigen::MatrixXd& below = l == 0 ? trace.input : trace.hidden[l - 1];
    Eigen::Map<RowMatrix> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + out * in, out);
    gw = delta.transpose() * below;
    gb = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::Map<const RowMatrix> w(params_.data() + offsets_[l], out, in);
      Eigen::MatrixXd back = delta * w;
      delta = (back.array() * (1.0 - below.array().square())).matrix();
    }
  }
  return grad;
}

std::string Mlp::ToJson() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["activation"] = "tanh";
  j["layers"] = sizes_;
  j["weights"] = std::vector<double>(params_.data(), params_.data() + params_.size());
  return j.dump();
}

Mlp Mlp::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), 0);
  }
  if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion) {
    throw ParseError("checkpoint: unsupported format or version", 0);
  }
  const auto sizes = j.at("layers").get<std::vector<int>>();
  if (sizes.size() < 2 || sizes.back() != 1) throw ParseError("checkpoint: bad layer sizes", 0);
  Mlp m(sizes.front(), std::vector<int>(sizes.begin() + 1, sizes.end() - 1));
  const auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != m.num_params()) {
    throw ParseError("checkpoint: weight count does not match layers", 0);
  }
  m.params_ = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  return m;
}

void Mlp::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToJson() << '\n';
}

Mlp Mlp::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

void SgdOptimizer::Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (momentum_ == 0.0) {
    params -= lr_ * grad;
    return;
  }
  if (velocity_.size() != grad.size()) velocity_ = Eigen::VectorXd::Zero(grad.size());
  velocity_ = momentum_ * velocity_ + grad;
  params -= lr_ * velocity_;
}

void AdamOptimizer::Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (m_.size() != grad.size()) {
    m_ = Eigen::VectorXd::Zero(grad.size());
    v_ = Eigen::VectorXd::Zero(grad.size());
    t_ = 0;
  }
  ++t_;
  m_ = b1_ * m_ + (1 - b1_) * grad;
  v_ = b2_ * v_ + (1 - b2_) * grad.cwiseProduct(grad);
  const double c1 = 1 - std::pow(b1_, t_);
  const double c2 = 1 - std::pow(b2_, t_);
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace drltr

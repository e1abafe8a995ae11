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

#include "drltr/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "drltr/click_log.h"
#include "drltr/errors.h"
#include "drltr/estimators.h"
#include "drltr/propensity.h"
#include "json.hpp"

namespace drltr {

std::string SettingName(Setting s) {
  switch (s) {
    case Setting::kTop5Known:
      return "top5_known";
    case Setting::kTop5Estimated:
      return "top5_estimated";
    case Setting::kFullKnown:
      return "full_known";
  }
  return "unknown";
}

Setting ParseSetting(const std::string& name) {
  if (name == "top5_known") return Setting::kTop5Known;
  if (name == "top5_estimated") return Setting::kTop5Estimated;
  if (name == "full_known") return Setting::kFullKnown;
  throw std::invalid_argument("unknown setting '" + name +
                              "' (expected top5_known, top5_estimated or full_known)");
}

std::string DatasetSpec::Name() const {
  if (!letor_path.empty()) return std::filesystem::path(letor_path).filename().string();
  const SyntheticOptions& s = synthetic;
  std::ostringstream out;
  out << "synthetic-" << s.n_train.value_or(0) << '-' << s.n_validation.value_or(0) << '-'
      << s.n_test.value_or(0) << 'x' << s.items_per_query << 'd' << s.feature_dim << 's'
      << s.seed;
  return out.str();
}

RunConfig::RunConfig() {
  dataset.synthetic.n_train = 200;
  dataset.synthetic.n_validation = 60;
  dataset.synthetic.n_test = 60;
  dataset.synthetic.items_per_query = 20;
  dataset.synthetic.feature_dim = 16;
  dataset.synthetic.seed = 1;
  // Near-deterministic logging: most of a 20-item list rarely reaches the top 5.
  logging.score_scale = 60.0;
}

void RunConfig::Validate() const {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (n_values.empty()) throw std::invalid_argument("need at least one N");
  for (long n : n_values) {
    if (n < 1) throw std::invalid_argument("every N must be >= 1");
  }
  if (estimators.empty()) throw std::invalid_argument("need at least one estimator");
  for (const std::string& e : estimators) {
    if (std::find(KnownEstimators().begin(), KnownEstimators().end(), e) ==
        KnownEstimators().end()) {
      throw std::invalid_argument("unknown estimator '" + e + "'");
    }
  }
  if (!(z >= 0 && z <= 1)) throw std::invalid_argument("z must lie in [0, 1]");
  if (!(tau_multiplier > 0)) throw std::invalid_argument("tau multiplier must be positive");
  if (tau && !(*tau > 0 && *tau <= 1)) throw std::invalid_argument("tau must lie in (0, 1]");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (eval_samples < 1) throw std::invalid_argument("eval_samples must be >= 1");
  regression.Validate();
  ltr.Validate();
  em.Validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Environment {
  Dataset data;
  std::string dataset_name;
  BiasParams true_bias;
  int cutoff = 5;
  ClipSetting clip = ClipSetting::kTopK;
  PlPolicy logging;
};

Environment BuildEnvironment(const RunConfig& config) {
  Environment env;
  if (config.dataset.letor_path.empty()) {
    env.data = GenerateSynthetic(config.dataset.synthetic);
  } else {
    const Dataset raw = LoadLetor(config.dataset.letor_path);
    env.data = SplitQueries(raw.train, raw.feature_dim);
  }
  env.data.Validate();
  if (env.data.train.empty() || env.data.test.empty()) {
    throw std::invalid_argument("dataset needs training and test queries");
  }
  if (config.dataset.scale_features) {
    env.data = MinMaxScaler::Fit(env.data.train).Apply(env.data);
  }
  env.dataset_name = config.dataset.Name();
  LoggingPolicyConfig lc = config.logging;
  lc.seed = DeriveSeed(config.seed, {0x1066});
  Mlp logging_model = TrainLoggingModel(env.data, lc);
  if (config.setting == Setting::kFullKnown) {
    env.cutoff = env.data.MaxQuerySize();
    env.true_bias = FullRankingParams(env.cutoff);
    env.clip = ClipSetting::kFull;
    env.logging = PlPolicy(std::move(logging_model), PolicyMode::kDeterministic);
  } else {
    env.cutoff = 5;
    env.true_bias = Top5Params();
    env.clip = ClipSetting::kTopK;
    env.logging = PlPolicy(std::move(logging_model), PolicyMode::kStochastic);
  }
  return env;
}

struct TestScore {
  double ecp = 0, ndcg = 0;
};

TestScore EvaluateOnTest(const PlPolicy& policy, const Environment& env, const RunConfig& config) {
  TestScore score;
  for (const Query& q : env.data.test) {
    Rng rng(DeriveSeed(config.seed, {0xe7a1, static_cast<uint64_t>(q.id())}));
    const RankMarginals m =
        policy.Marginals(q, DisplayLength(q, env.cutoff), {true, config.eval_samples}, rng);
    score.ecp += TrueEcp(m.prob, env.true_bias, q.relevance());
    score.ndcg += ExpectedNdcgAtK(m.prob, q.relevance(), 5);
  }
  const double n = static_cast<double>(env.data.test.size());
  score.ecp /= n;
  score.ndcg /= n;
  return score;
}

std::unordered_map<int, const Query*> IndexQueries(const Dataset& d) {
  std::unordered_map<int, const Query*> index;
  for (const auto* part : {&d.train, &d.validation, &d.test}) {
    for (const Query& q : *part) index[q.id()] = &q;
  }
  return index;
}

struct LoggedData {
  std::map<int, QueryClickStats> train, validation;
};

// Same sampling order as CollectLog, aggregated on the fly.
LoggedData SimulateLog(const Environment& env, long n, Rng& rng) {
  LoggedData out;
  const auto& train = env.data.train;
  const auto& valid = env.data.validation;
  const int n_train = static_cast<int>(train.size());
  const int n_pool = n_train + static_cast<int>(valid.size());
  for (long i = 0; i < n; ++i) {
    const int pick = rng.UniformInt(n_pool);
    const bool is_train = pick < n_train;
    const Query& q = is_train ? train[pick] : valid[pick - n_train];
    const std::vector<int> ranking = env.logging.Rank(q, DisplayLength(q, env.cutoff), rng);
    const std::vector<int> clicks = SimulateSession(ranking, q.relevance(), env.true_bias, rng);
    auto& target = is_train ? out.train : out.validation;
    auto it = target.find(q.id());
    if (it == target.end()) it = target.emplace(q.id(), QueryClickStats::Empty(q.id(), q.size())).first;
    it->second.Add(ranking, clicks);
  }
  return out;
}

std::map<int, Eigen::VectorXd> RhoHats(const std::map<int, QueryClickStats>& stats,
                                       const BiasParams& bias_hat, double tau) {
  std::map<int, Eigen::VectorXd> out;
  for (const auto& [qid, s] : stats) out[qid] = RhoHat(EstimateLoggingMarginals(s), bias_hat, tau);
  return out;
}

std::string Sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

struct Unit {
  int repeat;
  long n;  // -1 for the N-independent estimators
};

class Runner {
 public:
  Runner(const RunConfig& config, const Environment& env)
      : config_(config), env_(env), index_(IndexQueries(env.data)) {
    tau_value_ = [&](long n) {
      if (config_.tau) return *config_.tau;
      return std::min(1.0, ClipSchedule(n, env_.clip) * config_.tau_multiplier);
    };
  }

  std::vector<ResultRow> Run(const Unit& unit, std::optional<BiasEstimate>* em_out) const {
    return unit.n < 0 ? RunFixed(unit.repeat) : RunLogged(unit.repeat, unit.n, em_out);
  }

 private:
  bool Wants(const std::string& name) const {
    return std::find(config_.estimators.begin(), config_.estimators.end(), name) !=
           config_.estimators.end();
  }

  uint64_t RepeatSeed(int repeat) const {
    return DeriveSeed(config_.seed, {0x7e9, static_cast<uint64_t>(repeat)});
  }

  ResultRow BaseRow(const std::string& estimator, int repeat, long n) const {
    ResultRow row;
    row.setting = SettingName(config_.setting);
    row.dataset = env_.dataset_name;
    row.estimator = estimator;
    row.n = n;
    row.seed = RepeatSeed(repeat);
    if (!config_.tau) row.tau_multiplier = config_.tau_multiplier;
    if (n > 0) row.tau = tau_value_(n);
    row.z = config_.z;
    return row;
  }

  void Finish(ResultRow& row, const PlPolicy& policy, Clock::time_point start) const {
    const TestScore s = EvaluateOnTest(policy, env_, config_);
    row.ecp = s.ecp;
    row.ndcg_at_5 = s.ndcg;
    row.wall_time_s = config_.timing ? Seconds(start) : 0.0;
  }

  static void Fail(ResultRow& row, const std::exception& e) {
    row.ecp = std::nan("");
    row.ndcg_at_5 = std::nan("");
    row.status = "failed: " + Sanitize(e.what());
  }

  LtrConfig PolicyConfig(uint64_t seed) const {
    LtrConfig c = config_.ltr;
    c.seed = seed;
    return c;
  }

  // Rows for full_info and logging; replicated over every N.
  std::vector<ResultRow> RunFixed(int repeat) const {
    std::vector<ResultRow> rows;
    if (Wants("full_info")) {
      const auto start = Clock::now();
      ResultRow row = BaseRow("full_info", repeat, 0);
      try {
        std::vector<PolicyTarget> train, valid;
        for (const Query& q : env_.data.train) {
          train.push_back({&q, Eigen::Map<const Eigen::VectorXd>(q.relevance().data(), q.size())});
        }
        for (const Query& q : env_.data.validation) {
          valid.push_back({&q, Eigen::Map<const Eigen::VectorXd>(q.relevance().data(), q.size())});
        }
        const LtrResult r = TrainPolicy(env_.logging.model(), train, valid, env_.true_bias,
                                        env_.cutoff, PolicyConfig(DeriveSeed(RepeatSeed(repeat), {0xf1})));
        Finish(row, PlPolicy(r.model, PolicyMode::kStochastic), start);
      } catch (const std::exception& e) {
        Fail(row, e);
      }
      rows.push_back(row);
    }
    if (Wants("logging")) {
      const auto start = Clock::now();
      ResultRow row = BaseRow("logging", repeat, 0);
      try {
        Finish(row, env_.logging, start);
      } catch (const std::exception& e) {
        Fail(row, e);
      }
      rows.push_back(row);
    }
    std::vector<ResultRow> out;
    for (long n : config_.n_values) {
      for (ResultRow row : rows) {
        row.n = n;
        row.tau = tau_value_(n);
        out.push_back(row);
      }
    }
    return out;
  }

  std::vector<ResultRow> RunLogged(int repeat, long n,
                                   std::optional<BiasEstimate>* em_out) const {
    std::vector<std::string> wanted;
    for (const char* name : {"naive", "ips", "dm", "dm_prev", "dr"}) {
      if (Wants(name)) wanted.push_back(name);
    }
    if (wanted.empty()) return {};
    const uint64_t seed = DeriveSeed(RepeatSeed(repeat), {static_cast<uint64_t>(n)});
    const auto shared_start = Clock::now();
    const double tau = tau_value_(n);

    LoggedData logged;
    BiasParams bias_hat;
    std::map<int, Eigen::VectorXd> rho_train, rho_valid;
    std::vector<ResultRow> rows;
    try {
      Rng log_rng(DeriveSeed(seed, {0x10}));
      logged = SimulateLog(env_, n, log_rng);
      if (logged.train.empty()) throw std::runtime_error("no training impressions in the log");
      if (config_.setting == Setting::kTop5Estimated) {
        EmConfig em = config_.em;
        em.cutoff = env_.cutoff;
        em.seed = DeriveSeed(seed, {0xe3});
        bias_hat = EmEstimateBias(logged.train, env_.data, em).bias;
        *em_out = BiasEstimate{n, RepeatSeed(repeat), bias_hat};
      } else {
        bias_hat = env_.true_bias;
      }
      if (config_.z < 1.0) bias_hat = InterpolateTowardMean(bias_hat, config_.z);
      rho_train = RhoHats(logged.train, bias_hat, tau);
      rho_valid = RhoHats(logged.validation, bias_hat, tau);
    } catch (const std::exception& e) {
      for (const std::string& name : wanted) {
        ResultRow row = BaseRow(name, repeat, n);
        Fail(row, e);
        rows.push_back(row);
      }
      return rows;
    }
    const double shared_time = Seconds(shared_start);

    // Relevance regressions, trained lazily and shared between estimators.
    std::map<CeLossKind, std::pair<RegressionResult, double>> regressions;
    auto regression = [&](CeLossKind kind) -> const RegressionResult& {
      auto it = regressions.find(kind);
      if (it != regressions.end()) return it->second.first;
      const auto start = Clock::now();
      std::vector<RegressionQuery> queries;
      for (const auto& [qid, s] : logged.train) queries.push_back({index_.at(qid), &s, rho_train.at(qid)});
      RegressionConfig rc = config_.regression;
      rc.loss = kind;
      rc.seed = DeriveSeed(seed, {0x4e, static_cast<uint64_t>(kind)});
      RegressionResult r = TrainRegression(queries, bias_hat, env_.data.feature_dim, rc);
      return regressions.emplace(kind, std::make_pair(std::move(r), Seconds(start)))
          .first->second.first;
    };

    for (const std::string& name : wanted) {
      const auto start = Clock::now();
      ResultRow row = BaseRow(name, repeat, n);
      try {
        std::vector<PolicyTarget> train, valid;
        double extra_time = 0;
        if (name == "dm" || name == "dm_prev") {
          const RegressionResult& reg =
              regression(name == "dm" ? CeLossKind::kNew : CeLossKind::kPrev);
          extra_time = regressions.at(name == "dm" ? CeLossKind::kNew : CeLossKind::kPrev).second;
          for (const auto& [qid, s] : logged.train) train.push_back({index_.at(qid), reg.Predict(*index_.at(qid))});
          for (const auto& [qid, s] : logged.validation) valid.push_back({index_.at(qid), reg.Predict(*index_.at(qid))});
        } else {
          const RegressionResult* reg = nullptr;
          if (name == "dr") {
            reg = &regression(CeLossKind::kNew);
            extra_time = regressions.at(CeLossKind::kNew).second;
          }
          auto mu = [&](const QueryClickStats& s, const Eigen::VectorXd& rho) -> Eigen::VectorXd {
            const ItemSums sums = ComputeItemSums(s, bias_hat);
            if (name == "naive") return NaiveMu(sums);
            if (name == "ips") return IpsMu(sums, rho);
            return DrMu(sums, rho, reg->Predict(*index_.at(s.query_id)));
          };
          for (const auto& [qid, s] : logged.train) train.push_back({index_.at(qid), mu(s, rho_train.at(qid))});
          for (const auto& [qid, s] : logged.validation) valid.push_back({index_.at(qid), mu(s, rho_valid.at(qid))});
        }
        const LtrResult r = TrainPolicy(env_.logging.model(), train, valid, bias_hat, env_.cutoff,
                                        PolicyConfig(DeriveSeed(seed, {0x9011})));
        Finish(row, PlPolicy(r.model, PolicyMode::kStochastic), start);
        if (config_.timing) row.wall_time_s += shared_time + extra_time;
      } catch (const std::exception& e) {
        Fail(row, e);
      }
      rows.push_back(row);
    }
    return rows;
  }

  const RunConfig& config_;
  const Environment& env_;
  std::unordered_map<int, const Query*> index_;
  std::function<double(long)> tau_value_;
};

bool RowLess(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.setting, a.dataset, a.estimator, a.n, a.tau_multiplier, a.tau, a.z, a.seed) <
         std::tie(b.setting, b.dataset, b.estimator, b.n, b.tau_multiplier, b.tau, b.z, b.seed);
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string& s, int line) {
  if (s == "nan") return std::nan("");
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

}  // namespace

std::vector<ResultRow> RunExperiment(const RunConfig& config,
                                     std::vector<BiasEstimate>* estimated_bias) {
  config.Validate();
  const Environment env = BuildEnvironment(config);
  const Runner runner(config, env);
  std::vector<Unit> units;
  for (int r = 0; r < config.repeats; ++r) {
    units.push_back({r, -1});
    for (long n : config.n_values) units.push_back({r, n});
  }
  std::vector<std::vector<ResultRow>> results(units.size());
  std::vector<std::optional<BiasEstimate>> em(units.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < units.size(); i = next++) results[i] = runner.Run(units[i], &em[i]);
  };
  const int n_threads = std::min<int>(config.threads, static_cast<int>(units.size()));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::vector<ResultRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  std::stable_sort(rows.begin(), rows.end(), RowLess);
  if (estimated_bias) {
    for (auto& e : em) {
      if (e) estimated_bias->push_back(*e);
    }
    std::stable_sort(estimated_bias->begin(), estimated_bias->end(),
                     [](const BiasEstimate& a, const BiasEstimate& b) {
                       return std::tie(a.n, a.seed) < std::tie(b.n, b.seed);
                     });
  }
  return rows;
}

std::string BiasEstimatesJson(const std::vector<BiasEstimate>& estimates) {
  nlohmann::json out = nlohmann::json::array();
  for (const BiasEstimate& e : estimates) {
    out.push_back({{"N", e.n}, {"seed", e.seed}, {"alpha", e.bias.alpha}, {"beta", e.bias.beta}});
  }
  return out.dump(2);
}

std::vector<ResultRow> SweepClipping(const RunConfig& config,
                                     const std::vector<double>& multipliers) {
  std::vector<ResultRow> rows;
  for (double m : multipliers) {
    RunConfig c = config;
    c.tau.reset();
    c.tau_multiplier = m;
    const auto part = RunExperiment(c);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), RowLess);
  return rows;
}

std::vector<ResultRow> SweepTau(const RunConfig& config, const std::vector<double>& taus) {
  std::vector<ResultRow> rows;
  for (double t : taus) {
    RunConfig c = config;
    c.tau = t;
    const auto part = RunExperiment(c);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), RowLess);
  return rows;
}

std::vector<ResultRow> SweepBiasMisspecification(const RunConfig& config,
                                                 const std::vector<double>& zs) {
  std::vector<ResultRow> rows;
  for (double z : zs) {
    RunConfig c = config;
    c.z = z;
    const auto part = RunExperiment(c);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), RowLess);
  return rows;
}

std::string ResultCsvHeader() {
  return "setting,dataset,estimator,N,seed,tau_multiplier,tau,z,ecp,ndcg_at_5,wall_time_s,status";
}

std::string FormatResultCsv(const std::vector<ResultRow>& rows) {
  std::string out = ResultCsvHeader() + "\n";
  for (const ResultRow& r : rows) {
    out += r.setting + ',' + r.dataset + ',' + r.estimator + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.seed) + ',' + (r.tau_multiplier ? FormatDouble(*r.tau_multiplier) : "") +
           ',' + FormatDouble(r.tau) + ',' + FormatDouble(r.z) + ',' + FormatDouble(r.ecp) + ',' +
           FormatDouble(r.ndcg_at_5) + ',' + FormatDouble(r.wall_time_s) + ',' +
           Sanitize(r.status) + '\n';
  }
  return out;
}

std::vector<ResultRow> ParseResultCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != ResultCsvHeader()) throw ParseError("unexpected results header", 1);
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.push_back("");
    if (f.size() != 12) {
      throw ParseError("expected 12 fields, found " + std::to_string(f.size()), line_no);
    }
    ResultRow r;
    r.setting = f[0];
    r.dataset = f[1];
    r.estimator = f[2];
    try {
      r.n = std::stol(f[3]);
      r.seed = std::stoull(f[4]);
    } catch (const std::exception&) {
      throw ParseError("bad N or seed", line_no);
    }
    if (!f[5].empty()) r.tau_multiplier = ParseDouble(f[5], line_no);
    r.tau = ParseDouble(f[6], line_no);
    r.z = ParseDouble(f[7], line_no);
    r.ecp = ParseDouble(f[8], line_no);
    r.ndcg_at_5 = ParseDouble(f[9], line_no);
    r.wall_time_s = ParseDouble(f[10], line_no);
    r.status = f[11];
    rows.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError("empty results file", 0);
  return rows;
}

namespace {

struct Moments {
  double mean = 0, sd = 0;
  int n = 0;
};

Moments Summarize(const std::vector<double>& xs) {
  Moments m;
  m.n = static_cast<int>(xs.size());
  if (m.n == 0) return m;
  for (double x : xs) m.mean += x;
  m.mean /= m.n;
  if (m.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / (m.n - 1));
  }
  return m;
}

}  // namespace

std::string SummaryJson(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, long, std::optional<double>,
                         double, double>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> cells;
  std::map<Key, int> failures;
  for (const ResultRow& r : rows) {
    const Key key{r.setting, r.dataset, r.estimator, r.n, r.tau_multiplier, r.tau, r.z};
    auto& cell = cells[key];
    if (r.ok()) {
      cell.first.push_back(r.ecp);
      cell.second.push_back(r.ndcg_at_5);
    } else {
      ++failures[key];
    }
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, values] : cells) {
    const Moments ecp = Summarize(values.first);
    const Moments ndcg = Summarize(values.second);
    nlohmann::json j;
    j["setting"] = std::get<0>(key);
    j["dataset"] = std::get<1>(key);
    j["estimator"] = std::get<2>(key);
    j["N"] = std::get<3>(key);
    j["tau_multiplier"] = std::get<4>(key) ? nlohmann::json(*std::get<4>(key)) : nlohmann::json();
    j["tau"] = std::get<5>(key);
    j["z"] = std::get<6>(key);
    j["runs"] = ecp.n;
    j["failed"] = failures.count(key) ? failures.at(key) : 0;
    // No successful runs: leave the statistics null rather than zero.
    if (ecp.n > 0) {
      j["ecp_mean"] = ecp.mean;
      j["ecp_sd"] = ecp.sd;
      j["ndcg_at_5_mean"] = ndcg.mean;
      j["ndcg_at_5_sd"] = ndcg.sd;
    } else {
      for (const char* k : {"ecp_mean", "ecp_sd", "ndcg_at_5_mean", "ndcg_at_5_sd"}) j[k] = nullptr;
    }
    out.push_back(j);
  }
  return out.dump(2);
}

std::string PlotData(const std::vector<ResultRow>& rows, const std::string& kind) {
  if (kind != "learning_curve" && kind != "clip_sweep" && kind != "bias_sweep") {
    throw std::invalid_argument("unknown plot kind '" + kind +
                                "' (expected learning_curve, clip_sweep or bias_sweep)");
  }
  using Key = std::tuple<std::string, std::string, std::string, long, std::string, double>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const ResultRow& r : rows) {
    if (!r.ok()) continue;
    std::string x_name;
    double x = 0;
    if (kind == "learning_curve") {
      x_name = "N";
      x = static_cast<double>(r.n);
    } else if (kind == "clip_sweep") {
      x_name = r.tau_multiplier ? "tau_multiplier" : "tau";
      x = r.tau_multiplier ? *r.tau_multiplier : r.tau;
    } else {
      x_name = "z";
      x = r.z;
    }
    auto& g = groups[{r.setting, r.dataset, r.estimator, r.n, x_name, x}];
    g.first.push_back(r.ecp);
    g.second.push_back(r.ndcg_at_5);
  }
  std::string out = "kind,setting,dataset,estimator,N,x_name,x,metric,mean,sd,n,ci90_low,ci90_high\n";
  for (const auto& [key, values] : groups) {
    for (int which = 0; which < 2; ++which) {
      const Moments m = Summarize(which == 0 ? values.first : values.second);
      const double half = m.n > 0 ? 1.645 * m.sd / std::sqrt(static_cast<double>(m.n)) : 0.0;
      out += kind + ',' + std::get<0>(key) + ',' + std::get<1>(key) + ',' + std::get<2>(key) +
             ',' + std::to_string(std::get<3>(key)) + ',' + std::get<4>(key) + ',' +
             FormatDouble(std::get<5>(key)) + ',' + (which == 0 ? "ecp" : "ndcg_at_5") + ',' +
             FormatDouble(m.mean) + ',' + FormatDouble(m.sd) + ',' + std::to_string(m.n) + ',' +
             FormatDouble(m.mean - half) + ',' + FormatDouble(m.mean + half) + '\n';
    }
  }
  return out;
}

std::string ResolveOutputDir(const std::string& configured) {
  const char* env = std::getenv("DRLTR_OUTPUT_DIR");
  return env != nullptr && env[0] != '\0' ? std::string(env) : configured;
}

void WriteResults(const std::vector<ResultRow>& rows, const std::string& dir,
                  const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out(base / (stem + ".csv"));
    if (!out) throw std::runtime_error("cannot write results to " + dir);
    out << FormatResultCsv(rows);
  }
  std::ofstream out(base / (stem + "_summary.json"));
  if (!out) throw std::runtime_error("cannot write summary to " + dir);
  out << SummaryJson(rows) << '\n';
}

}  // namespace drltr

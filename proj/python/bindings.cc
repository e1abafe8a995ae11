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

// Python bindings for the drltr core (module drltr._drltr).

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "drltr/click_log.h"
#include "drltr/click_model.h"
#include "drltr/dataset.h"
#include "drltr/errors.h"
#include "drltr/estimators.h"
#include "drltr/experiment.h"
#include "drltr/policy.h"
#include "drltr/propensity.h"

namespace py = pybind11;

namespace drltr {
namespace {

std::string Repr(const BiasParams& b) {
  std::string s = "BiasParams(alpha=[";
  for (size_t k = 0; k < b.alpha.size(); ++k) s += (k ? ", " : "") + std::to_string(b.alpha[k]);
  s += "], beta=[";
  for (size_t k = 0; k < b.beta.size(); ++k) s += (k ? ", " : "") + std::to_string(b.beta[k]);
  return s + "])";
}

}  // namespace
}  // namespace drltr

PYBIND11_MODULE(_drltr, m) {
  using namespace drltr;
  m.doc() = "Counterfactual learning to rank from simulated clicks";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<BiasParams>(m, "BiasParams")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("alpha"),
           py::arg("beta"))
      .def(py::init<std::vector<double>, std::vector<double>, int>(), py::arg("alpha"),
           py::arg("beta"), py::arg("cutoff"))
      .def_readonly("alpha", &BiasParams::alpha)
      .def_readonly("beta", &BiasParams::beta)
      .def_readonly("display_cutoff", &BiasParams::display_cutoff)
      .def("validate", &BiasParams::Validate)
      .def(py::self == py::self)
      .def("__repr__", &Repr);
  m.def("top5_params", &Top5Params);
  m.def("full_ranking_params", &FullRankingParams, py::arg("cutoff"));
  m.def("interpolate_toward_mean", &InterpolateTowardMean, py::arg("params"), py::arg("z"));
  m.def("click_prob", &ClickProb, py::arg("relevance"), py::arg("pos"), py::arg("params"));

  py::class_<Rng>(m, "Rng")
      .def(py::init<uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::Uniform)
      .def_property_readonly("seed", &Rng::seed);
  m.def("simulate_session", &SimulateSession, py::arg("ranking"), py::arg("relevance"),
        py::arg("params"), py::arg("rng"));

  py::class_<Query>(m, "Query")
      .def(py::init<int, const std::vector<int>&, const std::vector<std::vector<double>>&>(),
           py::arg("query_id"), py::arg("labels"), py::arg("features"))
      .def_property_readonly("id", &Query::id)
      .def_property_readonly("features", &Query::features)
      .def_property_readonly("relevance", &Query::relevance)
      .def_property_readonly("labels",
                             [](const Query& q) {
                               std::vector<int> out;
                               for (const Item& it : q.items()) out.push_back(it.label);
                               return out;
                             })
      .def("__len__", &Query::size);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("train", &Dataset::train)
      .def_readonly("validation", &Dataset::validation)
      .def_readonly("test", &Dataset::test)
      .def_readonly("feature_dim", &Dataset::feature_dim)
      .def("max_query_size", &Dataset::MaxQuerySize)
      .def("validate", &Dataset::Validate);
  m.def("load_letor", &LoadLetor, py::arg("path"));
  m.def("parse_letor", [](const std::string& text) { return ParseLetor(text); }, py::arg("text"));
  m.def("split_queries", &SplitQueries, py::arg("queries"), py::arg("feature_dim"));
  m.def(
      "generate_synthetic",
      [](int n_train, int n_validation, int n_test, int items_per_query, int feature_dim,
         uint64_t seed, double grade_separation) {
        SyntheticOptions o;
        o.n_train = n_train;
        o.n_validation = n_validation;
        o.n_test = n_test;
        o.items_per_query = items_per_query;
        o.feature_dim = feature_dim;
        o.seed = seed;
        o.grade_separation = grade_separation;
        return GenerateSynthetic(o);
      },
      py::arg("n_train"), py::arg("n_validation"), py::arg("n_test"),
      py::arg("items_per_query"), py::arg("feature_dim"), py::arg("seed") = 0,
      py::arg("grade_separation") = 0.35);

  py::class_<QueryClickStats>(m, "QueryClickStats")
      .def(py::init([](int query_id, int n_items) { return QueryClickStats::Empty(query_id, n_items); }),
           py::arg("query_id"), py::arg("n_items"))
      .def("add", &QueryClickStats::Add, py::arg("ranking"), py::arg("clicks"))
      .def_readonly("query_id", &QueryClickStats::query_id)
      .def_readonly("n_impressions", &QueryClickStats::n_impressions)
      .def_readonly("displays", &QueryClickStats::displays)
      .def_readonly("clicks", &QueryClickStats::clicks);

  py::class_<ItemSums>(m, "ItemSums")
      .def_readonly("clicks", &ItemSums::clicks)
      .def_readonly("alpha_mass", &ItemSums::alpha_mass)
      .def_readonly("beta_mass", &ItemSums::beta_mass)
      .def_readonly("n_impressions", &ItemSums::n_impressions);
  m.def("compute_item_sums", &ComputeItemSums, py::arg("stats"), py::arg("bias_hat"));
  m.def("estimate_logging_marginals", &EstimateLoggingMarginals, py::arg("stats"));
  m.def("rho_hat", &RhoHat, py::arg("marginals"), py::arg("alpha_hat"), py::arg("tau"));
  m.def("omega", &Omega, py::arg("marginals"), py::arg("params"));
  m.def(
      "clip_schedule",
      [](long n, const std::string& setting) {
        if (setting != "top_k" && setting != "full") throw py::value_error("setting: top_k or full");
        return ClipSchedule(n, setting == "full" ? ClipSetting::kFull : ClipSetting::kTopK);
      },
      py::arg("n"), py::arg("setting") = "top_k");
  m.def("exact_rank_marginals",
        [](const Eigen::VectorXd& scores, int length) {
          return ExactRankMarginals(scores, length).prob;
        },
        py::arg("scores"), py::arg("length"));
  m.def("ips_mu", &IpsMu, py::arg("sums"), py::arg("rho_hat"));
  m.def("dr_mu", &DrMu, py::arg("sums"), py::arg("rho_hat"), py::arg("r_hat"));
  m.def("naive_mu", &NaiveMu, py::arg("sums"));
  m.def("ips_value", &IpsValue, py::arg("sums"), py::arg("omega_hat"), py::arg("rho_hat"));
  m.def("dm_value", &DmValue, py::arg("omega_hat"), py::arg("r_hat"));
  m.def("ce_loss_new", &CeLossNew, py::arg("sums"), py::arg("rho_hat"), py::arg("r_hat"));
  m.def("ce_loss_prev", &CeLossPrev, py::arg("sums"), py::arg("rho_hat"), py::arg("r_hat"));

  py::enum_<Setting>(m, "Setting")
      .value("TOP5_KNOWN", Setting::kTop5Known)
      .value("TOP5_ESTIMATED", Setting::kTop5Estimated)
      .value("FULL_KNOWN", Setting::kFullKnown);

  py::class_<LoggingPolicyConfig>(m, "LoggingPolicyConfig")
      .def_readwrite("fraction", &LoggingPolicyConfig::fraction)
      .def_readwrite("epochs", &LoggingPolicyConfig::epochs)
      .def_readwrite("learning_rate", &LoggingPolicyConfig::learning_rate)
      .def_readwrite("score_scale", &LoggingPolicyConfig::score_scale);
  py::class_<RegressionConfig>(m, "RegressionConfig")
      .def_readwrite("learning_rate", &RegressionConfig::learning_rate)
      .def_readwrite("epochs", &RegressionConfig::epochs)
      .def_readwrite("momentum", &RegressionConfig::momentum)
      .def_readwrite("clamp_eps", &RegressionConfig::clamp_eps);
  py::class_<LtrConfig>(m, "LtrConfig")
      .def_readwrite("learning_rate", &LtrConfig::learning_rate)
      .def_readwrite("max_steps", &LtrConfig::max_steps)
      .def_readwrite("queries_per_step", &LtrConfig::queries_per_step)
      .def_readwrite("n_samples", &LtrConfig::n_samples)
      .def_readwrite("eval_interval", &LtrConfig::eval_interval)
      .def_readwrite("patience", &LtrConfig::patience)
      .def_readwrite("eval_samples", &LtrConfig::eval_samples);
  py::class_<EmConfig>(m, "EmConfig")
      .def_readwrite("iterations", &EmConfig::iterations)
      .def_readwrite("inner_epochs", &EmConfig::inner_epochs)
      .def_readwrite("learning_rate", &EmConfig::learning_rate);
  py::class_<SyntheticOptions>(m, "SyntheticOptions")
      .def_readwrite("n_train", &SyntheticOptions::n_train)
      .def_readwrite("n_validation", &SyntheticOptions::n_validation)
      .def_readwrite("n_test", &SyntheticOptions::n_test)
      .def_readwrite("items_per_query", &SyntheticOptions::items_per_query)
      .def_readwrite("feature_dim", &SyntheticOptions::feature_dim)
      .def_readwrite("seed", &SyntheticOptions::seed)
      .def_readwrite("grade_separation", &SyntheticOptions::grade_separation);
  py::class_<DatasetSpec>(m, "DatasetSpec")
      .def_readwrite("letor_path", &DatasetSpec::letor_path)
      .def_readwrite("synthetic", &DatasetSpec::synthetic)
      .def_readwrite("scale_features", &DatasetSpec::scale_features)
      .def("name", &DatasetSpec::Name);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("dataset", &RunConfig::dataset)
      .def_readwrite("setting", &RunConfig::setting)
      .def_readwrite("n_values", &RunConfig::n_values)
      .def_readwrite("estimators", &RunConfig::estimators)
      .def_readwrite("repeats", &RunConfig::repeats)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("tau_multiplier", &RunConfig::tau_multiplier)
      .def_readwrite("tau", &RunConfig::tau)
      .def_readwrite("z", &RunConfig::z)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("timing", &RunConfig::timing)
      .def_readwrite("eval_samples", &RunConfig::eval_samples)
      .def_readwrite("logging", &RunConfig::logging)
      .def_readwrite("regression", &RunConfig::regression)
      .def_readwrite("ltr", &RunConfig::ltr)
      .def_readwrite("em", &RunConfig::em)
      .def("validate", &RunConfig::Validate);

  py::class_<ResultRow>(m, "ResultRow")
      .def(py::init<>())
      .def_readwrite("setting", &ResultRow::setting)
      .def_readwrite("dataset", &ResultRow::dataset)
      .def_readwrite("estimator", &ResultRow::estimator)
      .def_readwrite("n", &ResultRow::n)
      .def_readwrite("seed", &ResultRow::seed)
      .def_readwrite("tau_multiplier", &ResultRow::tau_multiplier)
      .def_readwrite("tau", &ResultRow::tau)
      .def_readwrite("z", &ResultRow::z)
      .def_readwrite("ecp", &ResultRow::ecp)
      .def_readwrite("ndcg_at_5", &ResultRow::ndcg_at_5)
      .def_readwrite("wall_time_s", &ResultRow::wall_time_s)
      .def_readwrite("status", &ResultRow::status)
      .def("ok", &ResultRow::ok);

  // Experiments release the GIL; they can run for minutes.
  auto nogil = py::call_guard<py::gil_scoped_release>();
  py::class_<BiasEstimate>(m, "BiasEstimate")
      .def_readonly("n", &BiasEstimate::n)
      .def_readonly("seed", &BiasEstimate::seed)
      .def_readonly("bias", &BiasEstimate::bias);
  m.def(
      "run_experiment", [](const RunConfig& c) { return RunExperiment(c); }, py::arg("config"),
      nogil);
  m.def(
      "run_experiment_with_bias",
      [](const RunConfig& c) {
        std::vector<BiasEstimate> em;
        std::vector<ResultRow> rows = RunExperiment(c, &em);
        return std::make_pair(std::move(rows), std::move(em));
      },
      py::arg("config"), nogil,
      "Rows plus the EM click-parameter estimates (estimated-bias setting only).");
  m.def("sweep_clipping", &SweepClipping, py::arg("config"), py::arg("multipliers"), nogil);
  m.def("sweep_tau", &SweepTau, py::arg("config"), py::arg("taus"), nogil);
  m.def("sweep_bias_misspecification", &SweepBiasMisspecification, py::arg("config"),
        py::arg("zs"), nogil);
  m.def("format_result_csv", &FormatResultCsv, py::arg("rows"));
  m.def("parse_result_csv", &ParseResultCsv, py::arg("text"));
  m.def("summary_json", &SummaryJson, py::arg("rows"));
  m.def("plot_data", &PlotData, py::arg("rows"), py::arg("kind"));
  m.def("write_results", &WriteResults, py::arg("rows"), py::arg("dir"), py::arg("stem"));
}

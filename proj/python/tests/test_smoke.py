# Copyright 2026 The drltr Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import drltr


def test_click_parameters():
    p = drltr.top5_params()
    assert p.alpha == pytest.approx([0.35, 0.53, 0.55, 0.54, 0.52])
    assert drltr.click_prob(1.0, 0, p) == pytest.approx(1.0)
    assert drltr.full_ranking_params(3).alpha[0] == pytest.approx(0.32857142857142857)
    with pytest.raises(ValueError):
        drltr.interpolate_toward_mean(p, 1.5)


def test_clip_schedule():
    assert drltr.clip_schedule(10000) == pytest.approx(0.1)
    assert drltr.clip_schedule(10000, "full") == 1.0


def test_ips_on_a_tiny_log():
    p = drltr.top5_params()
    stats = drltr.QueryClickStats(0, 2)
    stats.add([0, 1], [1, 0])
    stats.add([1, 0], [0, 0])
    assert stats.n_impressions == 2
    assert stats.displays.shape == (2, 2)
    sums = drltr.compute_item_sums(stats, p)
    rho = drltr.rho_hat(drltr.estimate_logging_marginals(stats), p, 0.01)
    mu = drltr.ips_mu(sums, rho)
    assert isinstance(mu, np.ndarray)
    omega = np.array([1.0, 0.0])
    assert drltr.ips_value(sums, omega, rho) == pytest.approx(float(omega @ mu))
    # R_hat = 0 makes DR and IPS coincide.
    assert np.allclose(drltr.dr_mu(sums, rho, np.zeros(2)), mu)


def test_exact_marginals_are_doubly_stochastic():
    m = drltr.exact_rank_marginals(np.array([0.1, 1.0, -0.5]), 3)
    assert np.allclose(m.sum(axis=0), 1.0)
    assert np.allclose(m.sum(axis=1), 1.0)


def test_synthetic_dataset():
    d = drltr.generate_synthetic(6, 2, 2, 5, 3, seed=4)
    assert len(d.train) == 6 and len(d.test) == 2
    q = d.train[0]
    assert q.features.shape == (5, 3)
    assert all(r == 0.25 * l for r, l in zip(q.relevance, q.labels))


def test_tiny_experiment_and_plot_table(tmp_path):
    c = drltr.RunConfig()
    c.dataset.synthetic.n_train = 8
    c.dataset.synthetic.n_validation = 3
    c.dataset.synthetic.n_test = 3
    c.dataset.synthetic.items_per_query = 5
    c.dataset.synthetic.feature_dim = 3
    c.n_values = [300]
    c.estimators = ["naive", "dr"]
    c.repeats = 2
    c.timing = False
    c.eval_samples = 20
    c.regression.epochs = 2
    c.ltr.max_steps = 5
    c.ltr.eval_interval = 5
    rows = drltr.run_experiment(c)
    assert len(rows) == 4
    assert all(r.ok() for r in rows)
    text = drltr.format_result_csv(rows)
    assert text.splitlines()[0].startswith("setting,dataset,estimator,N,seed")
    table = drltr.plot_table(text)
    ecp = [r for r in table if r["metric"] == "ecp"]
    assert {r["estimator"] for r in ecp} == {"naive", "dr"}
    for r in ecp:
        assert r["n"] == 2
        assert r["ci90_high"] - r["mean"] == pytest.approx(1.645 * r["sd"] / math.sqrt(2))
    drltr.write_results(rows, str(tmp_path), "run")
    assert (tmp_path / "run.csv").read_text() == text


def test_bad_config_raises():
    c = drltr.RunConfig()
    c.repeats = 0
    with pytest.raises(ValueError):
        c.validate()

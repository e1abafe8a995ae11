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
"""Counterfactual learning to rank from simulated clicks."""

import csv
import io

from ._drltr import *  # noqa: F401,F403
from ._drltr import parse_result_csv, plot_data

__version__ = "0.1.0"


def read_plot_data(text):
    """Parses a plot-data table into a list of dicts with float statistics."""
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        for key in ("N", "x", "mean", "sd", "ci90_low", "ci90_high"):
            r[key] = float(r[key]) if r[key] not in ("", "nan") else float("nan")
        r["n"] = int(r["n"])
    return rows


def plot_table(results_csv_text, kind="learning_curve"):
    """Results CSV text -> tidy plotting rows (see `plot_data`)."""
    return read_plot_data(plot_data(parse_result_csv(results_csv_text), kind))

# Copyright 2026 The qcollapse authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import subprocess

import pytest

CLI = os.environ.get("QCOLLAPSE_CLI")
FIXTURES = os.environ.get("QCOLLAPSE_FIXTURES")

pytestmark = pytest.mark.skipif(
    not CLI or not FIXTURES, reason="CLI paths not exported by ctest"
)


def run(*args, cwd=None):
    return subprocess.run(
        [CLI, *args], capture_output=True, text=True, cwd=cwd
    )


def test_missing_model_exits_one(tmp_path):
    proc = run("master", "--model", str(tmp_path / "nope.json"))
    assert proc.returncode == 1
    assert "nope.json" in proc.stderr


def test_trajectories_reproduce_bit_identically(tmp_path):
    args = [
        "trajectories",
        "--model", f"{FIXTURES}/d2_fixture.json",
        "--n", "500", "--t-max", "1", "--dt", "0.25", "--seed", "11",
    ]
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run(*args, "--out", str(out_a)).returncode == 0
    assert run(*args, "--out", str(out_b)).returncode == 0
    assert (out_a / "trajectories.csv").read_bytes() == (
        out_b / "trajectories.csv"
    ).read_bytes()
    manifest = json.loads((out_a / "trajectories_manifest.json").read_text())
    assert manifest["command"] == "trajectories"
    assert manifest["config"]["seed"] == 11


def test_inputs_are_never_mutated(tmp_path):
    model = f"{FIXTURES}/d2_fixture.json"
    before = open(model, "rb").read()
    proc = run(
        "trajectories",
        "--model", model,
        "--n", "100", "--t-max", "1", "--dt", "0.5", "--seed", "2",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    assert open(model, "rb").read() == before


def test_worker_count_does_not_change_output(tmp_path):
    base = [
        "trajectories",
        "--model", f"{FIXTURES}/d2_fixture.json",
        "--n", "500", "--t-max", "1", "--dt", "0.5", "--seed", "3",
    ]
    out_a = tmp_path / "w1"
    out_b = tmp_path / "w8"
    assert run(*base, "--workers", "1", "--out", str(out_a)).returncode == 0
    assert run(*base, "--workers", "8", "--out", str(out_b)).returncode == 0
    assert (out_a / "trajectories.csv").read_bytes() == (
        out_b / "trajectories.csv"
    ).read_bytes()


def test_zeno_emits_lambda_rows_plus_diffusion_row(tmp_path):
    proc = run(
        "zeno",
        "--model", f"{FIXTURES}/d2_rate.json",
        "--lambdas", "10,100,1000",
        "--n", "200", "--t-max", "1", "--seed", "21",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    rows = (tmp_path / "zeno.csv").read_text().strip().splitlines()
    assert rows[0].startswith("lambda,")
    assert len(rows) == 1 + 4  # header + 3 lambdas + diffusion row
    assert rows[-1].startswith("inf,")


def test_master_csv_has_trace_column(tmp_path):
    proc = run(
        "master",
        "--model", f"{FIXTURES}/d2_survival.json",
        "--initial", f"{FIXTURES}/excited_state.json",
        "--t-max", "1", "--dt", "0.5",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    rows = (tmp_path / "master.csv").read_text().strip().splitlines()
    header = rows[0].split(",")
    trace = float(rows[-1].split(",")[header.index("trace")])
    assert abs(trace - math.exp(-0.36)) < 1e-8


def test_dyson_prints_truncation_order(tmp_path):
    proc = run(
        "dyson",
        "--model", f"{FIXTURES}/d2_fixture.json",
        "--t", "1", "--tol", "1e-10",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    assert "truncation order" in proc.stdout
    doc = json.loads((tmp_path / "dyson.json").read_text())
    assert doc["order"] > 5


def test_dilation_report_structure(tmp_path):
    proc = run(
        "dilation",
        "--model", f"{FIXTURES}/d2_fixture.json",
        "--flavor", "both", "--n", "50", "--t-max", "1", "--seed", "4",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    doc = json.loads((tmp_path / "dilation_report.json").read_text())
    assert len(doc["flavors"]) == 2
    for entry in doc["flavors"]:
        assert entry["unitarity_defect"] < 1e-12
        assert entry["max_compression_residual"] < 1e-12
        surv = entry["survival"]
        assert abs(surv["mc_mean"] - surv["master_trace"]) < 4 * surv["mc_stderr"]


def test_genfun_both_channels_stay_consistent(tmp_path):
    proc = run(
        "genfun",
        "--model", f"{FIXTURES}/d2_fixture.json",
        "--testfn", f"{FIXTURES}/testfn_ramp.json",
        "--mode", "both", "--n", "2000", "--t-max", "1", "--dt", "0.5",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    rows = (tmp_path / "genfun.csv").read_text().strip().splitlines()
    header = rows[0].split(",")
    z_idx = header.index("z")
    for row in rows[2:]:  # skip t = 0 where stderr is zero
        assert float(row.split(",")[z_idx]) < 5.0


def test_diffusion_single_path_csv(tmp_path):
    proc = run(
        "diffusion",
        "--model", f"{FIXTURES}/d2_rate.json",
        "--n", "1", "--dt", "1e-4", "--t-max", "1", "--seed", "12",
        "--out", str(tmp_path),
    )
    assert proc.returncode == 0
    rows = (tmp_path / "diffusion.csv").read_text().strip().splitlines()
    header = rows[0].split(",")
    norm_idx = header.index("norm_sq")
    for row in rows[1:]:
        assert abs(float(row.split(",")[norm_idx]) - 1.0) < 2e-2

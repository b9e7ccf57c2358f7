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

import math

import numpy as np
import pytest

import qcollapse as qc


SZ = np.diag([1.0, -1.0]).astype(complex)
C = np.diag([1.0, 0.8]).astype(complex)
ETA = np.array([0.0, 1.0], dtype=complex)


def fixture_model():
    return qc.Model(SZ, C, 1.0)


def test_model_validation_errors():
    with pytest.raises(qc.SimulationError):
        qc.Model(SZ, np.diag([1.0, 1.1]).astype(complex), 1.0)
    with pytest.raises(qc.SimulationError):
        qc.Model(np.array([[0, 1], [0, 0]], dtype=complex), C, 1.0)
    with pytest.raises(qc.SimulationError):
        qc.Model(SZ, C, -1.0)


def test_jump_sampling_is_reproducible():
    a = qc.sample_jumps(2.0, 3.0, 99)
    b = qc.sample_jumps(2.0, 3.0, 99)
    assert a.times == b.times
    assert all(0.0 <= t < 3.0 for t in a.times)
    assert a.times == sorted(a.times)


def test_survival_against_closed_form():
    model = qc.Model(np.zeros((2, 2), dtype=complex), C, 1.0)
    grid = [0.0, 0.5, 1.0]
    ens = qc.ensemble_average(model, ETA, 2000, grid, 7)
    for k, t in enumerate(grid[1:], start=1):
        target = math.exp(-0.36 * t)
        assert abs(ens.q_mean[k] - target) < 4.0 * ens.q_stderr[k]


def test_master_trace_matches_closed_form():
    model = qc.Model(np.zeros((2, 2), dtype=complex), C, 1.0)
    sigma = np.outer(ETA, ETA.conj())
    path = qc.integrate_master(model, sigma, [0.0, 0.5, 1.0])
    assert abs(path.trace[-1] - math.exp(-0.36)) < 1e-8


def test_dyson_agrees_with_master():
    model = fixture_model()
    sigma = np.outer(ETA, ETA.conj())
    rk4 = qc.integrate_master(model, sigma, [0.0, 1.0])
    dyson = qc.dyson_series(model, sigma, 1.0, 1e-12)
    assert np.max(np.abs(rk4.rho[-1] - dyson.rho)) < 1e-8


def test_dilation_compression_identity():
    model = fixture_model()
    jumps = qc.sample_jumps(1.0, 1.0, 17)
    dil = qc.build_dilation(C, qc.DilationFlavor.NON_HERMITIAN)
    assert dil.unitarity_defect < 1e-12
    state = qc.evolve_dilated(dil, model, jumps, ETA, 1.0)
    read = qc.compress(state, dil.readout())
    target = qc.propagator_at(model, jumps, 1.0) @ ETA
    assert np.linalg.norm(read - target) < 1e-12


def test_diffusion_norm_stays_near_one():
    rate = np.diag([0.0, 0.36]).astype(complex)
    path = qc.integrate_ito_schrodinger(SZ, rate, ETA, 1e-4, 1.0, 12)
    norms = [float(np.vdot(p, p).real) for p in path.psi]
    assert max(abs(q - 1.0) for q in norms) < 1e-2


def test_genfun_channels_agree():
    model = fixture_model()
    f = qc.TestFunction.constant(-0.5 + 0.2j, 1.0, 1.0)
    ode = qc.genfun_ode(model, f, ETA, [0.0, 1.0])
    mc = qc.genfun_mc(model, f, ETA, 2000, 1.0, 3)
    assert np.linalg.norm(mc.mean - ode[-1]) < 4.0 * mc.stderr


def test_kernel_inner_product_reproduces_generating_functional():
    model = fixture_model()
    g = qc.TestFunction.constant(-0.25 + 0.15j, 1.0, 1.0)
    w = np.array([1.0, 0.0], dtype=complex)
    phi = qc.exponential_kernel_table(g, 1.0, 4, 12, w)
    chi = qc.model_kernel_table(model, ETA, 1.0, 4, 12)
    ip = qc.kernel_inner_product(phi, chi, 4)
    breve = qc.genfun_ode(model, g.conjugated(), ETA, [0.0, 1.0])[-1]
    expected = np.vdot(w, breve)
    assert abs(ip.value - expected) < max(1e-3, ip.last_term_ratio)


def test_philox_reference_stream():
    rng = qc.Philox(42, 7)
    first = [rng.next_u64() for _ in range(4)]
    again = qc.Philox(42, 7)
    assert first == [again.next_u64() for _ in range(4)]

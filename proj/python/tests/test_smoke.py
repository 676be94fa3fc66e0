# Copyright 2026 The qdslab Authors
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
import os
import pathlib
import shutil

import numpy as np
import pytest

import qdslab as q


@pytest.fixture(scope="module")
def wx():
    """W = x (V = 2x^2) on [-6, 6] with 32 points."""
    field = q.grad_potential(q.PolynomialPotential(1, [([2], 2.0)]))
    return q.assemble(field, q.GridSpec(1, 6.0, 32), 1.0)


def test_grid_and_operators():
    g = q.GridSpec(1, 6.0, 32)
    assert g.size == 32
    assert g.spacing == pytest.approx(12.0 / 31)
    d = q.derivative_operator(g, 0)
    assert d.dtype == np.complex128
    assert np.array_equal(d, -d.T)
    with pytest.raises(ValueError):
        q.GridSpec(1, 6.0, 4)


def test_assembly_identities(wx):
    g, h, phi = wx.generator, wx.hamiltonian, wx.phi
    assert np.array_equal(h, h.conj().T)
    assert np.abs(g + g.conj().T + phi).max() <= 1e-12 * (1 + np.abs(phi).max())
    assert np.array_equal(wx.c - phi, np.eye(32))
    assert wx.form_identity_residual() <= 1e-12
    ident = np.eye(32, dtype=complex)
    assert np.abs(q.generator_apply(wx, ident)).max() < 1e-10


def test_propagator_is_contractive(wx):
    p = q.propagator(wx, 0.1)
    assert np.linalg.norm(p, 2) <= 1 + 1e-10
    with pytest.raises(ValueError):
        q.generator_apply(wx, np.eye(5))


def test_picard_conservative_and_matches_oracle(wx):
    run = q.picard_run(wx, np.eye(32, dtype=complex), q.TimeGrid(0.2, 32))
    assert run.converged
    assert max(np.abs(n - np.eye(32)).max() for n in run.nodes) <= 1e-8

    x = np.diag(q.sample(wx.grid, q.gaussian(0.5))).astype(complex)
    opts = q.PicardOptions(quadrature=q.Quadrature.Quadratic)
    run = q.picard_run(wx, x, q.TimeGrid(0.2, 64), opts)
    dt = min(1e-3, 0.9 / q.generator_norm_estimate(wx))
    ref = q.master_oracle(wx, x, 0.2, dt)
    assert np.abs(run.final - ref).max() <= 1e-6


def test_choi_and_classical():
    field = q.grad_potential(q.PolynomialPotential(1, [([2], 2.0)]))
    small = q.assemble(field, q.GridSpec(1, 6.0, 8), 1.0)
    rep = q.choi_map(small, 0.05, 5e-4)
    assert rep.completely_positive
    assert q.to_dict(rep)["completely_positive"] is True

    g = q.GridSpec(1, 6.0, 32)
    f0 = q.sample(g, q.gaussian(0.5))
    f = q.classical_solve(field, g, f0, 0.2, 0.005)
    assert f.shape == (32,)
    assert np.all(np.isfinite(f))
    cmp = q.compare_classical(q.assemble(field, g), q.gaussian(0.5), q.TimeGrid(0.2, 16))
    assert cmp.converged and cmp.max_error < 0.05


def test_verifier(wx):
    opts = q.CFOptions()
    opts.auxiliary_bounds = False
    rep = q.cf_check(wx, opts)
    assert rep.status("c") == "pass"
    assert rep.status("d") == "pass"
    assert rep.value("d") == 1.0
    assert rep.verdict in ("supported", "inconclusive", "not supported")
    assert q.to_dict(rep)["verdict"] == rep.verdict

    est = q.relative_bound(wx.g0, wx.hamiltonian, [1.0, 10.0], wx.grid, "H vs G0")
    assert est[1].constant <= est[0].constant
    com = q.commutator_bound(wx.g0, wx.g0, [0.5], wx.grid)
    assert all(e.constant == 0.0 for e in com)
    assert q.c4_form_bound(wx).holds


def test_assumptions_and_python_fields():
    good = q.grad_potential(q.PolynomialPotential(1, [([4], 1.0)]))
    rep = q.check_assumptions(good, q.SampleBox(1, 6.0, 121, 8))
    assert rep.all_satisfied()
    assert rep.entry("C-1").status == "assumed-by-construction"

    expx = q.analytic_field(1, lambda l, x: np.exp(x[0]), lambda l, k, x: np.exp(x[0]),
                            lambda l, j, k, x: np.exp(x[0]), "exp(x)")
    rep = q.check_assumptions(expx, q.SampleBox(1, 5.0, 101, 8))
    assert rep.entry("C-2").growth_violation

    with pytest.raises(ValueError):
        q.PolynomialPotential(1, [([3], 1.0)])


def test_run_config_and_report(tmp_path):
    src = pathlib.Path(os.environ.get("QDSLAB_CONFIG_DIR",
                                      pathlib.Path(__file__).parents[2] / "configs"))
    cfg = json.loads((src / "choi_small.json").read_text())
    cfg["output_dir"] = "out"
    path = tmp_path / "choi.json"
    path.write_text(json.dumps(cfg))
    status, manifest, diagnostics = q.run_config(str(path))
    assert status == 0, diagnostics
    assert pathlib.Path(manifest).exists()
    status, text = q.report(manifest)
    assert status == 0
    assert "completely positive" in text

    cfg["bogus"] = 1
    path.write_text(json.dumps(cfg))
    shutil.rmtree(tmp_path / "out")
    status, _, _ = q.run_config(str(path))
    assert status == 1
    assert not (tmp_path / "out").exists()

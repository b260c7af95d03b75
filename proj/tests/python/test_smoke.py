"""Smoke tests for the _sfh extension module."""

import json
import math
import shutil
import tempfile

import pytest

import _sfh


def test_grid_and_kernel():
    g = _sfh.GridSpec(1, 12.0, 512)
    assert g.dim == 1
    assert g.size() == 512
    assert g.dx() == pytest.approx(24.0 / 512)
    k = _sfh.kernel(g, 2.0, 1.0)
    assert k["well_resolved"]
    assert k["mass"] == pytest.approx(1.0, abs=1e-12)
    # heat-kernel peak 1/sqrt(4 pi)
    assert max(k["field"]) == pytest.approx(1.0 / math.sqrt(4.0 * math.pi), abs=1e-6)


def test_models_and_constants():
    wn = _sfh.white_noise()
    ok, _ = _sfh.verify_dalang(wn, 1.5)
    assert ok
    ok, why = _sfh.verify_dalang(_sfh.riesz_kernel(1, 0.9), 0.8)
    assert not ok and why
    assert _sfh.k_beta(1, 1.0) == pytest.approx(2.0, abs=1e-9)
    assert _sfh.k_beta(2, 2.0) == pytest.approx(math.pi, abs=1e-9)
    # I(1) for white noise, alpha = 2: sqrt(pi/2)/(2 pi)
    i1 = _sfh.correlation_time_kernel(wn, 2.0, 1.0)
    assert i1 == pytest.approx(math.sqrt(math.pi / 2.0) / (2.0 * math.pi), rel=1e-3)


def test_simulation_roundtrip():
    cfg = _sfh.SolverConfig()
    cfg.alpha = 1.5
    cfg.dt = 1e-3
    cfg.T = 0.1
    cfg.grid = _sfh.GridSpec(1, 8.0, 256)
    cfg.sigma = _sfh.sigma_linear(1.0)
    cfg.model = _sfh.white_noise()
    cfg.master_seed = 7
    cfg.snapshot_times = [0.05, 0.1]
    out = _sfh.simulate(cfg, 0)
    assert out["times"] == [0.05, 0.1]
    assert len(out["fields"]) == 2
    u = out["fields"][1]
    assert len(u) == 256
    # mean stays near 1 and the path is deterministic
    assert sum(u) / len(u) == pytest.approx(1.0, abs=0.5)
    again = _sfh.simulate(cfg, 0)
    assert again["fields"][1] == u
    # ball average of the initial condition is zero
    assert _sfh.ball_average(cfg.grid, [1.0] * 256, 2.0) == pytest.approx(0.0)


def test_experiment_config_api():
    out = _sfh.validate_config('{"kind": "kernel"}')
    assert out["kind"] == "kernel"
    assert len(out["config_hash"]) == 64
    with pytest.raises(Exception, match="case \\(ii\\)"):
        _sfh.validate_config(
            '{"kind": "simulate", "grid": {"dim": 2}, '
            '"model": {"variant": "white_noise"}}'
        )


def test_run_experiment_exit_code():
    root = tempfile.mkdtemp(prefix="sfh_smoke_")
    try:
        cfg = {
            "kind": "kernel",
            "grid": {"dim": 1, "half_length": 8.0, "points_per_axis": 256},
            "solver": {"alpha": 1.5, "T": 0.5, "snapshot_times": [0.25, 0.5]},
            "output_root": root,
        }
        assert _sfh.run_experiment(json.dumps(cfg)) == 0
    finally:
        shutil.rmtree(root, ignore_errors=True)

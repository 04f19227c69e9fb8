import math

import numpy as np
import pytest

import stftlab


def test_gaussian_is_normalized():
    f = stftlab.gaussian(32.0, 512)
    dx = 32.0 / 512
    assert f.dtype == np.complex128
    assert math.isclose(np.sum(np.abs(f) ** 2) * dx, 1.0, rel_tol=1e-12)
    x = np.asarray(stftlab.grid_points(32.0, 512))
    assert np.allclose(f, 2 ** 0.25 * np.exp(-np.pi * x**2))


def test_stft_isometry():
    f = stftlab.fixture("random", 32.0, 512, seed=3)
    V, x, w, lx, lw = stftlab.stft(f, 32.0)
    assert V.shape == (512, 512)
    dx, dw = lx / len(x), lw / len(w)
    nf = np.sum(np.abs(f) ** 2) * 32.0 / 512
    nv = np.sum(np.abs(V) ** 2) * dx * dw
    assert abs(nv / nf - 1) < 1e-4


def test_recovery_round_trip():
    f = stftlab.hermite(16.0, 256, 1) * np.exp(0.4j)
    m = stftlab.phaseless(f, 16.0)
    r = stftlab.recover(m, 16.0)
    g = r["signal"]
    lam = np.vdot(g, f) / abs(np.vdot(g, f))
    assert np.linalg.norm(f - lam * g) / np.linalg.norm(f) < 1e-2


def test_phase_distance_ignores_global_phase():
    f = stftlab.gaussian(16.0, 256)
    d, lam = stftlab.phase_distance(f, np.exp(1.1j) * f, 16.0)
    assert d < 1e-12
    assert abs(lam - np.exp(1.1j)) < 1e-12


def test_gluing_bound():
    assert stftlab.gluing_bound(3.0, 4.0, 0.25) == pytest.approx(5 * (4 + math.sqrt(2)), rel=1e-15)
    with pytest.raises(ValueError):
        stftlab.gluing_bound(1.0, 1.0, 0.0)


def test_poincare_unit_square():
    rep = stftlab.poincare(np.ones((64, 64), dtype=bool), 1.0, 1.0)
    assert rep["status"] == "ok"
    assert abs(rep["mu1"] / math.pi**2 - 1) < 0.02


def test_bad_grid_raises():
    with pytest.raises(ValueError):
        stftlab.gaussian(32.0, 500)


def test_experiment_catalog_and_run(tmp_path):
    ids = stftlab.experiments()
    assert len(ids) == 17
    assert "prop21-gaussian-ratio" in ids
    res = stftlab.run_experiment("isometry-sweep", params={"fixtures": 5}, out=tmp_path / "iso")
    assert res["passed"]
    assert (tmp_path / "iso" / "summary.json").exists()
    with pytest.raises(ValueError, match="bogus"):
        stftlab.run_experiment("isometry-sweep", params={"bogus": 1})


def test_instability_ratios_grow():
    rows = stftlab.instability_ratios(n_max=4)
    assert [r["j"] for r in rows] == [2, 5, 11, 23]
    for r in rows[:-1]:
        assert r["status"] == "finite"
        assert r["ratio"] >= 2 ** r["n"]
    # k_n = k at the end of the schedule
    assert rows[-1]["status"] == "degenerate"

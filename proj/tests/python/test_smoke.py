import math

import numpy as np
import pytest

import mmst_cavity as mc


def small_config():
    c = mc.SystemConfig()
    c.mode_count = 40
    c.first_mode = mc.centered_first_mode(c.length, c.omega0, 40)
    c.grid_points = 401
    c.t_final = 0.5
    c.output_interval = 0.05
    return c


def test_defaults():
    c = mc.SystemConfig()
    assert c.mode_count == 400
    assert c.grid_points == 5001
    assert c.mu_ge == pytest.approx(math.sqrt(math.pi) / 10)
    assert mc.fgr_rate(c.omega0, c.mu_ge) == pytest.approx(math.pi)


def test_mode_frequencies():
    c = small_config()
    w = mc.mode_frequencies(c)
    assert len(w) == 40
    assert np.allclose(np.diff(w), math.pi / c.length)


def test_quantum_population_decays():
    c = small_config()
    q = mc.run_quantum(c)
    p = q["populations"][:, 0]
    assert p[0] == pytest.approx(1.0)
    assert np.all(np.diff(p) < 1e-3)
    assert 0.0 < p[-1] < 1.0


def test_ensemble_shapes_and_determinism():
    c = small_config()
    a = mc.run_ensemble(c, 16, seed=3, propagator="modes", threads=1)
    b = mc.run_ensemble(c, 16, seed=3, propagator="modes", threads=2)
    assert a["rho"].shape == (len(a["times"]), 1)
    assert a["completed"] == 16
    assert np.array_equal(a["rho"], b["rho"])


def test_ehrenfest_vacuum_stays_excited():
    c = small_config()
    r = mc.run_ensemble(c, 1, propagator="fdtd", sampling="none")
    assert np.allclose(r["rho"][:, 0], 1.0)


def test_fits():
    t = np.linspace(0, 2, 201)
    f = mc.fit_exponential(t, np.exp(-1.7 * t), 0.0, 2.0)
    assert f.k == pytest.approx(1.7, rel=1e-10)
    assert mc.effective_rate(t, np.exp(-1.7 * t), 0.0, 2.0) == pytest.approx(1.7, rel=1e-3)
    mean, _ = mc.delay_reference(1, math.pi)
    assert mean == pytest.approx(1 / math.pi)


def test_bad_config_raises():
    c = small_config()
    c.positions = [10.0]
    with pytest.raises(ValueError):
        c.validate()


def test_scenario_names():
    names = mc.scenario_names()
    assert "fig8" in names
    with pytest.raises(ValueError):
        mc.run_scenario("no-such-scenario", "/tmp/unused")

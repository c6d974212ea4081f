import math

import numpy as np
import pytest

import wavemaps as wm


def test_constants():
    for k in range(1, 5):
        assert wm.energy_Q(k) == pytest.approx(4 * math.pi * k, rel=1e-14)
    assert wm.omega_sq(2) == pytest.approx(16 / math.pi, rel=1e-14)
    assert wm.norm_lam_q_sq(2) == pytest.approx(2 * math.pi, rel=1e-14)
    with pytest.raises(wm.DomainError):
        wm.omega_sq(1)


def test_profiles_vectorize():
    r = np.array([0.5, 1.0, 2.0])
    q = wm.q_profile(2, 1.0, r)
    assert q.shape == r.shape
    assert q[1] == pytest.approx(math.pi / 2)


def test_verify_constants_rows_pass():
    rows = wm.verify_constants()
    assert rows and all(r["pass"] for r in rows)


def test_config_round_trip():
    text = "wmlab-config 1\nk = 2\ninitial {\n  m = 1\n  iota = 1\n  lambda = 1\n}\n"
    cfg = wm.parse_run_config(text)
    assert cfg.k == 2
    assert wm.parse_run_config(cfg.to_text()).hash() == cfg.hash()
    with pytest.raises(wm.ConfigError):
        wm.parse_run_config("wmlab-config 1\nbogus = 3\n")


def test_fit_recovers_scales():
    grid = wm.RadialGrid.sinh(0.01, 30.0, 0.01)
    truth = wm.BubbleConfig(1, [1, -1], [0.05, 1.0])
    field = wm.field_from_config(2, truth, grid)
    fit = wm.fit_static(field, wm.BubbleConfig(1, [1, -1], [0.06, 0.9]))
    assert fit.config.lambda_ == pytest.approx([0.05, 1.0], rel=1e-8)


def test_ode_and_evolve():
    ode = wm.integrate_ode([0.1, 1.0], [0.0, 0.0], 2, [1, -1], 0.2, 1e-3)
    lam1 = ode.lambda_(0)
    # alternating signs: the inner scale grows toward the outer one
    assert not ode.halted and lam1[-1] > lam1[0]

    grid = wm.RadialGrid.sinh(0.05, 20.0, 0.01)
    field = wm.field_from_config(2, wm.BubbleConfig(1, [1], [1.0]), grid)
    cfg = wm.SolverConfig()
    cfg.T = 0.1
    cfg.cadence = 0.05
    traj = wm.evolve(field, cfg)
    e = [s.discrete_energy for s in traj.snapshots]
    assert abs(e[-1] - e[0]) < 1e-6 * e[0]
    series = wm.track(traj, wm.BubbleConfig(1, [1], [1.0]))
    assert len(series) == len(traj.snapshots)

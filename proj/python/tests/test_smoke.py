import math
import os
import pathlib

import numpy as np
import pytest

import gmc_py

CONFIG_DIR = pathlib.Path(os.environ.get("GMC_CONFIG_DIR", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def test_gmc_matches_numpy():
    rng = np.random.default_rng(0)
    cfg = gmc_py.GmcConfig()
    cfg.beta0 = cfg.beta1 = 0.9
    state = gmc_py.GmcState(8, cfg)
    for _ in range(5):
        state.update(rng.normal(size=8))
    g = rng.normal(size=8)
    ref = np.abs(g * state.m / (state.v + cfg.epsilon)).sum() / math.sqrt(8)
    assert gmc_py.gmc(g, state) == pytest.approx(ref, rel=1e-12)
    assert np.all(state.m**2 <= state.v)
    with pytest.raises(ValueError):
        state.update(np.zeros(3))


def test_statistics():
    assert gmc_py.student_t_quantile(0.975, 19) == pytest.approx(2.093024, abs=1e-6)
    t, dof, p = gmc_py.welch_t_test(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
    assert t == 0.0 and p == pytest.approx(1.0)
    assert gmc_py.auc(np.array([1.0, 2.0, 3.0])) == pytest.approx(6.0)
    assert gmc_py.peak_epoch(np.array([0, 0, 1, 3, 5, 3, 1, 0, 0, 0.0])) == 4


def test_doorkey_plan_reaches_goal():
    env = gmc_py.DoorKeyEnv(size=6)
    obs = env.reset(3)
    assert obs.shape == (6, 6, 4)
    x, y = env.agent_pos
    assert obs[y, x, 0] == 10.0
    assert obs[y, x, 2] == env.agent_dir
    plan = env.plan_to_goal()
    result = None
    for a in plan:
        result = env.step(a)
    assert result.done and result.reached_goal
    assert result.reward == pytest.approx(1 - 0.9 * len(plan) / 360)


def test_bad_config_raises():
    with pytest.raises(ValueError):
        gmc_py.validate_config("[bandit]\nno_such_key = 1\n")


def test_short_bandit_run():
    text = (CONFIG_DIR / "noise_smoke.ini").read_text()
    run = gmc_py.run_bandit(text, "gmc", 0)
    assert run["test_loss"].shape == (4, 4)
    assert np.isfinite(run["auc"])
    again = gmc_py.run_bandit(text, "gmc", 0)
    assert np.array_equal(run["test_loss"], again["test_loss"])

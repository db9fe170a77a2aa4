import os
from pathlib import Path

import numpy as np
import pytest

import forcesim

CONFIGS = Path(os.environ.get("FORCESIM_CONFIGS", Path(__file__).resolve().parents[2] / "configs"))

SHORT_WW = "[scenario]\ntask = WW\nduration = 12\nseed = 3\n"


def test_episode_arrays_line_up():
    log = forcesim.run_episode(SHORT_WW)
    n = len(log["t"])
    assert abs(n - 12000) <= 1
    assert log["position"].shape == (n, 3)
    assert log["force_ext"].shape == (n, 3)
    assert len(log["phase"]) == n
    assert np.all(np.diff(log["t"]) > 0)
    assert log["policy_steps"] == (n + 99) // 100


def test_force_settles_in_contact():
    log = forcesim.run_episode(forcesim.load_text(CONFIGS / "ww_force_aware.ini"))
    c = np.flatnonzero(log["contact"])
    assert c.size > 0
    idx = c[c >= c[0] + 1000]
    n = log["force_cmd"][idx] / np.linalg.norm(log["force_cmd"][idx], axis=1, keepdims=True)
    fn = np.einsum("ij,ij->i", log["force_ext"][idx], n)
    assert np.max(np.abs(fn - 4.0)) <= 0.2
    assert log["metrics"]["success"]


def test_seed_override_and_determinism():
    a = forcesim.trace_csv(SHORT_WW, seed=5)
    assert a == forcesim.trace_csv(SHORT_WW, seed=5)
    assert a != forcesim.trace_csv(SHORT_WW, seed=6)
    assert a.startswith("t,x,y,z,")


def test_verify_one_point():
    rows = forcesim.verify("[verify]\nm = 1\nk_e = 1000\nf_H = 4\nprop3_duration = 10\n")
    assert [r["proposition"] for r in rows] == ["prop1", "prop2", "prop3", "equivalence"]
    assert all(r["pass"] for r in rows)
    assert len(forcesim.default_grid()) == 27


def test_config_errors():
    with pytest.raises(forcesim.ConfigError, match="line 2"):
        forcesim.run_episode("[scenario]\ntask = XX\n")
    with pytest.raises(forcesim.ConfigError):
        forcesim.verify("[verify]\nd = 0\n")
    assert issubclass(forcesim.ConfigError, forcesim.Error)


def test_suite_rows():
    cfg = "[scenario]\ntask = WW\nduration = 8\n[suite]\nmodes = force_aware baseline_low\nseeds = 2\n"
    rows = forcesim.run_suite(cfg)
    assert [r["mode"] for r in rows] == ["force_aware", "baseline_low"]
    assert all(r["undisturbed_runs"] == 2 for r in rows)


def test_demo_dataset_round_trip(tmp_path):
    out = tmp_path / "demos.fsds"
    summary = forcesim.generate_demos(forcesim.load_text(CONFIGS / "gen_demos_ww.ini"), 10, seed=4, out=str(out))
    assert summary["ok"] and summary["coverage_pass"] == 10
    ds = forcesim.read_dataset(str(out))
    assert ds["reference"].shape == (summary["tuples"], 10)
    assert int(ds["episode_lengths"].sum()) == summary["tuples"]
    assert set(np.unique(ds["contact"])) <= {0, 1}
    with pytest.raises(forcesim.Error):
        forcesim.read_dataset(str(tmp_path / "missing.fsds"))

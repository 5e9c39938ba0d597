import math

import numpy as np
import pytest

import qnewton


def test_corpus():
    names = qnewton.corpus_names()
    assert "quad1d" in names and len(names) == 7
    info = qnewton.problem_info("circles2d")
    assert info["domain_dim"] == 2
    assert np.allclose(info["known_roots"][0], [1.5, math.sqrt(1.75)])


def test_solve_quad1d():
    r = qnewton.solve("quad1d", [2.0])
    assert r["termination"] == "RootFound"
    assert r["final_x"][0] == pytest.approx(math.sqrt(2), abs=1e-12)
    assert 1.7 <= r["order_estimate"] <= 2.3
    assert r["trace"]["x"].shape == (r["iterations"], 1)
    assert np.all(np.diff(r["trace"]["f"]) <= 1e-15)


def test_seeded_runs_repeat():
    a = qnewton.solve("cubic2d", method="lm-m", line_search="beta-grid", seed=3)
    b = qnewton.solve("cubic2d", method="lm-m", line_search="beta-grid", seed=3)
    assert a["deltas"] == b["deltas"] and a["beta"] == b["beta"]
    assert np.array_equal(a["trace"]["x"], b["trace"]["x"])


def test_config_errors():
    with pytest.raises(qnewton.ConfigError, match="tau"):
        qnewton.solve("quad1d", method="lm-m", tau=1.5)
    with pytest.raises(qnewton.ConfigError, match="problem"):
        qnewton.solve("nope")
    with pytest.raises(ValueError):
        qnewton.solve("overdet", det_eps=0.1)


def test_spectral():
    vals, vecs = qnewton.eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(vals, [1, 3])
    assert qnewton.minsp(np.diag([3.0, -2.0])) == pytest.approx(2)
    assert np.allclose(qnewton.reflected_solve(np.diag([2.0, -3.0]), np.array([2.0, 3.0])), [1, 1])
    with pytest.raises(qnewton.Error):
        qnewton.reflected_solve(np.diag([1.0, 0.0]), np.array([1.0, 1.0]))


def test_diagnostics():
    assert qnewton.estimate_order([10.0 ** -(2**k) for k in range(5)]) == pytest.approx(2.0)
    assert qnewton.classify_limit("saddle1d", [0.0])["kind"] == "SaddleStrong"
    assert qnewton.holder_conjugate_ok(1.0, 5)
    assert not qnewton.holder_conjugate_ok(2.0, 2)
    s = qnewton.saddle_escape("saddle1d", [0.0], 0.05, 100, seed=7)
    assert s["escapes"] >= 95


def test_basin():
    idx, iters = qnewton.basin_grid("cubic2d", (-2, 2, -2, 2), 15, 11)
    assert idx.shape == (11, 15) and iters.shape == (11, 15)
    assert set(np.unique(idx)) <= {-1, 0, 1, 2}


def test_python_residual():
    r = qnewton.solve_system(lambda x: np.array([x[0] ** 2 - 3.0, x[0] + x[1]]), np.array([2.0, 0.0]))
    assert r["termination"] == "RootFound"
    assert np.allclose(r["final_x"], [math.sqrt(3), -math.sqrt(3)], atol=1e-8)

import numpy as np
import pytest

from helpers import ROW1, periodic_env
from ladderwalk import (Environment, MalformedPath, WalkPath, decompose,
                        decompose_ensemble, run_ensemble, run_to_ladder,
                        verify_identity)


def _path(*positions):
    return WalkPath(positions=np.array(positions, dtype=np.int64),
                    stopped=True)


def test_one_step_ladder():
    dec = decompose(_path(0, 1))
    assert dec.u1 == (1, 0, 0)
    assert dec.t1 == 1
    assert all(sum(t.counts) == 0 for t in dec.tallies.values())
    assert dec.identity_holds()


def test_dip_then_jump():
    # 0 -> -1 opens A at 0; -1 -> 1 closes it with sub-type 3 and closes the
    # immigration excursion with sub-type 2
    dec = decompose(_path(0, -1, 1))
    assert dec.u1 == (0, 1, 0)
    assert dec.tallies[0].counts == (0, 0, 1, 0, 0, 0, 0, 0, 0)
    assert dec.identity_holds()


def test_double_dip_opens_b_and_c():
    # 0 -> -2 opens B at 0 and C at -1; -2 -> -1 closes the C (sub-type 1);
    # -1 -> 1 closes the B (sub-type 3) and the immigration (sub-type 2)
    dec = decompose(_path(0, -2, -1, 1))
    assert dec.u1 == (0, 1, 0)
    assert dec.tallies[0].counts == (0, 0, 0, 0, 0, 1, 0, 0, 0)
    assert dec.tallies[-1].counts == (0, 0, 0, 0, 0, 0, 1, 0, 0)
    assert dec.identity_holds()


def test_identity_on_simulated_paths():
    env = periodic_env()
    for r in range(100):
        path = run_to_ladder(env, 31, replica=r)
        dec = decompose(path)
        report = verify_identity(dec, path)
        assert report.ok, report.detail
        assert report.weight_total == report.t1 == report.dv_total


def test_malformed_paths_rejected():
    with pytest.raises(MalformedPath):
        decompose(WalkPath(positions=np.array([0, -1]), stopped=False))
    with pytest.raises(MalformedPath):
        decompose(_path(1, 2))          # must start at 0
    with pytest.raises(MalformedPath):
        decompose(_path(0, 3))          # illegal increment
    with pytest.raises(MalformedPath):
        decompose(_path(0, -1))         # never stopped above 0


def test_ensemble_decomposition_matches_python_decomposer():
    env = Environment.homogeneous(ROW1)
    out = decompose_ensemble(env, 555, 50, min_level=-6)
    for r in range(50):
        path = run_to_ladder(env, 555, replica=r)
        dec = decompose(path)
        assert out["t1"][r] == path.t1
        assert out["xt1"][r] == path.x_t1
        assert out["u1"][r] == dec.u1_subtype()
        for k in range(7):
            want = dec.tallies.get(-k)
            got = tuple(int(c) for c in out["tallies"][r, k])
            assert got == (want.counts if want is not None else (0,) * 9)


def test_ensemble_decomposition_matches_run_ensemble_streams():
    env = periodic_env()
    out = decompose_ensemble(env, 99, 5000, workers=4)
    stats = run_ensemble(env, 99, 5000)
    assert stats.t1_mean == pytest.approx(out["t1"].mean())
    assert stats.xt1_mean == pytest.approx(out["xt1"].mean())


def test_ensemble_decomposition_worker_invariance():
    env = Environment.homogeneous(ROW1)
    a = decompose_ensemble(env, 7, 2000, workers=1)
    b = decompose_ensemble(env, 7, 2000, workers=4)
    for key in ("t1", "xt1", "u1", "tallies", "status"):
        assert np.array_equal(a[key], b[key])


def test_min_level_validation():
    with pytest.raises(ValueError):
        decompose_ensemble(Environment.homogeneous(ROW1), 1, 10, min_level=1)

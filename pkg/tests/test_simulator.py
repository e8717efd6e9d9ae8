import numpy as np
import pytest

from helpers import ROW1, periodic_env
from ladderwalk import (Environment, replica_seed, run_ensemble, run_horizon,
                        run_to_ladder, splitmix64)
from ladderwalk.simulator import replica_seeds


def test_splitmix64_reference_vector():
    # first three outputs of the standard splitmix64 stream seeded with 0
    state, z = splitmix64(0)
    assert z == 0xE220A8397B1DCDAF
    state, z = splitmix64(state)
    assert z == 0x6E789E6AA1B965F4
    state, z = splitmix64(state)
    assert z == 0x06C45D188009454F


def test_replica_seeds_match_scalar_construction():
    got = replica_seeds(42, 100)
    assert got.dtype == np.uint64
    assert [int(s) for s in got] == [replica_seed(42, r) for r in range(100)]


def test_run_to_ladder_is_deterministic_and_stopped():
    env = Environment.homogeneous(ROW1)
    a = run_to_ladder(env, 7)
    b = run_to_ladder(env, 7)
    assert np.array_equal(a.positions, b.positions)
    assert a.stopped
    assert a.positions[0] == 0
    assert a.x_t1 in (1, 2)
    assert np.all(a.positions[:-1] <= 0)
    assert set(np.diff(a.positions)) <= {-2, -1, 1, 2}


def test_run_to_ladder_replica_matches_ensemble_slot():
    env = periodic_env()
    stats_seed = 2024
    t1 = []
    xt1 = []
    for r in range(200):
        p = run_to_ladder(env, stats_seed, replica=r)
        t1.append(p.t1)
        xt1.append(p.x_t1)
    stats = run_ensemble(env, stats_seed, 200)
    assert stats.t1_mean == pytest.approx(np.mean(t1))
    assert stats.xt1_mean == pytest.approx(np.mean(xt1))
    assert stats.xt1_hist[1] == sum(1 for x in xt1 if x == 1)


def test_run_ensemble_worker_invariance():
    env = Environment.homogeneous(ROW1)
    assert run_ensemble(env, 5, 20000, workers=1) == \
        run_ensemble(env, 5, 20000, workers=4)


def test_step_cap_returns_unstopped_path():
    env = Environment.homogeneous(ROW1)
    p = run_to_ladder(env, 7, step_cap=1)
    if not p.stopped:
        with pytest.raises(ValueError):
            p.t1
    else:  # the very first step may already be the ladder step
        assert p.t1 == 1


def test_ensemble_warns_when_cap_bites():
    env = Environment.homogeneous(ROW1)
    with pytest.warns(RuntimeWarning):
        stats = run_ensemble(env, 11, 5000, step_cap=2)
    assert stats.abandoned > 0
    assert stats.completed + stats.abandoned == 5000
    assert stats.bias_warning


def test_ensemble_raises_when_everything_capped():
    env = Environment.homogeneous(ROW1)
    # a walk cannot finish in zero steps
    with pytest.raises(ValueError):
        run_ensemble(env, 11, 10, step_cap=0)


def test_run_horizon_matches_direct_stream():
    env = Environment.homogeneous(ROW1)
    law = ROW1.as_array()
    state = replica_seed(9, 0)
    pos = 0
    lo = 0
    hi = 0
    for _ in range(5000):
        state, z = splitmix64(state)
        u = (z >> 11) * 1.1102230246251565e-16
        if u < law[0]:
            pos -= 2
        elif u < law[0] + law[1]:
            pos -= 1
        elif u < law[0] + law[1] + law[2]:
            pos += 1
        else:
            pos += 2
        lo = min(lo, pos)
        hi = max(hi, pos)
    res = run_horizon(env, 9, 5000)
    assert res.final_position == pos
    assert res.min_position == lo
    assert res.max_position == hi
    assert res.empirical_drift == pytest.approx(pos / 5000)


def test_run_horizon_long_run_tracks_drift():
    res = run_horizon(Environment.homogeneous(ROW1), 3, 10 ** 6)
    assert res.empirical_drift == pytest.approx(0.39, abs=0.01)


def test_ensemble_csv_shape():
    stats = run_ensemble(Environment.homogeneous(ROW1), 1, 100)
    header, row = stats.to_csv().splitlines()
    assert len(header.split(",")) == len(row.split(",")) == 12


def test_input_validation():
    env = Environment.homogeneous(ROW1)
    with pytest.raises(ValueError):
        run_ensemble(env, 0, 0)
    with pytest.raises(ValueError):
        run_horizon(env, 0, 0)

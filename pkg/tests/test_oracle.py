import numpy as np
import pytest

from helpers import ROW1, periodic_env
from ladderwalk import (Environment, shift, solve_exit, solve_exit_table,
                        solve_expected_exit_time, solve_expected_exit_times)


def test_absorption_probabilities_sum_to_one():
    table = solve_exit_table(periodic_env(), -8, 0)
    total = sum(table[t] for t in (-9, -8, 0, 1))
    assert np.allclose(total, 1.0, atol=1e-12)


def test_single_interior_site_hand_values():
    # interval [a+1, b-1] = {0}: one step decides everything
    env = Environment.homogeneous(ROW1)
    assert solve_exit(env, -1, 1, 0, -2) == pytest.approx(ROW1.q2)
    assert solve_exit(env, -1, 1, 0, -1) == pytest.approx(ROW1.q1)
    assert solve_exit(env, -1, 1, 0, 1) == pytest.approx(ROW1.p1)
    assert solve_exit(env, -1, 1, 0, 2) == pytest.approx(ROW1.p2)
    assert solve_expected_exit_time(env, -1, 1, 0) == pytest.approx(1.0)


def test_shift_invariance():
    env = periodic_env()
    for k in (1, 2, -3):
        a = solve_exit(env, -6, 0, -2, 1)
        b = solve_exit(shift(env, k), -6 - k, -k, -2 - k, 1 - k)
        assert a == pytest.approx(b, abs=1e-14)


def test_expected_times_positive_and_monotone_from_edges():
    times = solve_expected_exit_times(Environment.homogeneous(ROW1), -10, 0)
    assert np.all(times >= 1.0)
    # the deepest interior sites take the longest on average
    assert times.max() == pytest.approx(times[len(times) // 2], rel=0.5)


def test_start_validation():
    env = Environment.homogeneous(ROW1)
    with pytest.raises(ValueError):
        solve_exit(env, -5, 0, 0, 1)   # start must be <= b-1
    with pytest.raises(ValueError):
        solve_exit(env, -5, 0, -2, 7)  # target must be absorbing
    with pytest.raises(ValueError):
        solve_expected_exit_time(env, -5, 0, 5)


def test_exit_table_reports_starts():
    table = solve_exit_table(Environment.homogeneous(ROW1), -4, 0)
    assert table["starts"].tolist() == [-3, -2, -1]

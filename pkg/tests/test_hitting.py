import numpy as np
import pytest

from helpers import ROW1, ROW2, ROW4, ROWS, NEGATIVE_DRIFT, periodic_env
from ladderwalk import (DriftNegative, Environment, NotAdmissible, SiteLaw,
                        exit_probabilities, hit_from_below, homogeneous_root,
                        solve_exit_table)


def test_exit_table_matches_oracle_small_widths():
    env = periodic_env()
    for b in range(-2, 3):
        for width in range(2, 9):
            a = b - width - 1
            table = exit_probabilities(env, a, b)
            oracle = solve_exit_table(env, a, b)
            for j, k in enumerate(oracle["starts"]):
                for target in (b, b + 1):
                    assert table.prob(int(k), target) == pytest.approx(
                        oracle[target][j], abs=1e-12)


def test_small_widths_use_exact_arithmetic():
    assert exit_probabilities(periodic_env(), -10, 0).exact
    assert not exit_probabilities(Environment.homogeneous(ROW1),
                                  -60, 0).exact


def test_compound_path_matches_oracle_past_the_exact_width_limit():
    env = periodic_env()
    deep = exit_probabilities(env, -42, 0)      # width 41: compound floats
    assert not deep.exact
    oracle = solve_exit_table(env, -42, 0)
    starts = list(oracle["starts"])
    for k in range(-8, 0):                      # near-boundary starts
        for target in (0, 1):
            assert deep.prob(k, target) == pytest.approx(
                oracle[target][starts.index(k)], abs=1e-11)


def test_compound_interior_raises_instead_of_returning_garbage():
    # far below the top boundary the interior-fill cancellation exceeds
    # double precision; the probability clamp must catch it
    from ladderwalk import DegenerateSystem
    deep = exit_probabilities(periodic_env(), -80, 0)
    with pytest.raises(DegenerateSystem):
        deep.prob(-75, 0)


def test_exit_mass_at_most_one():
    table = exit_probabilities(Environment.homogeneous(ROW1), -30, 0)
    for k in table.starts():
        assert table.prob(k, 0) + table.prob(k, 1) <= 1.0 + 1e-12


def test_exit_table_argument_validation():
    table = exit_probabilities(Environment.homogeneous(ROW1), -5, 0)
    with pytest.raises(ValueError):
        table.prob(-1, 5)
    with pytest.raises(ValueError):
        table.prob(-9, 0)


def test_exit_rejects_inadmissible_law():
    env = Environment.homogeneous(SiteLaw(q2=0.0, q1=0.5, p1=0.3, p2=0.2))
    with pytest.raises(NotAdmissible):
        exit_probabilities(env, -5, 0)


def test_hit_from_below_homogeneous_matches_root():
    for law in ROWS[:4]:
        env = Environment.homogeneous(law)
        h, _ = homogeneous_root(law)
        prof = hit_from_below(env, 0, 0)
        assert prof.f1 == pytest.approx(1.0 + h, abs=1e-10)
        assert prof.f2 == pytest.approx(-h, abs=1e-10)
        assert prof.converged
        pair = hit_from_below(env, -1, 0)
        assert pair.f1 == pytest.approx(1.0 + h + h * h, abs=1e-10)
        assert pair.f2 == pytest.approx(-h - h * h, abs=1e-10)


def test_hit_total_mass_is_one_with_positive_drift():
    prof = hit_from_below(Environment.homogeneous(ROW1), 0, 0)
    assert prof.f1 + prof.f2 == pytest.approx(1.0, abs=1e-10)


def test_hit_chain_start_far_below():
    # a start below i-1 chains per-level pairs; homogeneous closed form
    # gives f_k(i, i+1) = 1 + h + ... + h^(i-k+1), f_k(i, i+2) = -(...)
    env = Environment.homogeneous(ROW1)
    h, _ = homogeneous_root(ROW1)
    prof = hit_from_below(env, -3, 0)
    geom = sum(h ** j for j in range(1, 5))
    assert prof.f1 == pytest.approx(1.0 + geom, abs=1e-10)
    assert prof.f2 == pytest.approx(-geom, abs=1e-10)


def test_hit_shift_invariance():
    env = periodic_env()
    a = hit_from_below(env, 0, 0)
    b = hit_from_below(env.shift(2), -2, -2)
    assert a.f1 == pytest.approx(b.f1, abs=1e-12)
    assert a.f2 == pytest.approx(b.f2, abs=1e-12)


def test_hit_requires_start_at_or_below_threshold():
    with pytest.raises(ValueError):
        hit_from_below(Environment.homogeneous(ROW1), 1, 0)


def test_homogeneous_root_basics():
    h, others_outside = homogeneous_root(ROW1)
    assert -1.0 < h < 0.0
    assert others_outside
    # the root solves the characteristic cubic
    q2 = ROW1.q2
    val = h ** 3 + (ROW1.q1 + q2) / q2 * h ** 2 \
        - (ROW1.p1 + ROW1.p2) / q2 * h - ROW1.p2 / q2
    assert val == pytest.approx(0.0, abs=1e-12)


def test_homogeneous_root_near_zero_drift():
    h, _ = homogeneous_root(ROW4)
    assert 1.0 - h == pytest.approx(1.000399840, abs=1e-9)


def test_homogeneous_root_rejects_negative_drift():
    with pytest.raises(DriftNegative):
        homogeneous_root(NEGATIVE_DRIFT)


def test_homogeneous_root_rejects_zero_q2():
    with pytest.raises(NotAdmissible):
        homogeneous_root(SiteLaw(q2=0.0, q1=0.4, p1=0.3, p2=0.3))


def test_deep_table_interior_probabilities_are_probabilities():
    table = exit_probabilities(Environment.homogeneous(ROW2), -300, 0)
    probs = np.array([[table.prob(k, t) for t in (0, 1)]
                      for k in range(-20, 0)])
    assert np.all(probs >= 0.0) and np.all(probs <= 1.0)

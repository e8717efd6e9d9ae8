import numpy as np
import pytest

from helpers import ROW1, ROW2, NEGATIVE_DRIFT, periodic_env
from ladderwalk import (Diverging, Environment, TIME_WEIGHTS,
                        excursion_indices, expected_t1, expected_tally,
                        immigration_law, level_mean_matrix, mean_matrix,
                        offspring_distribution, offspring_pmf,
                        offspring_sample, offspring_scalars)
from ladderwalk.branching import ExcursionTally


def _scalars(env, level=0, tol=1e-12):
    idx = excursion_indices(env, level, tol)
    up = excursion_indices(env, level + 1, tol)
    return offspring_scalars(idx, up.beta[1]), idx


def test_indices_partition_the_jump_masses():
    env = periodic_env()
    for i in (-2, -1, 0, 1):
        idx = excursion_indices(env, i)
        assert sum(idx.alpha) == pytest.approx(env.law_at(i).q1, abs=1e-12)
        assert sum(idx.beta) == pytest.approx(env.law_at(i).q2, abs=1e-12)
        assert sum(idx.gamma) == pytest.approx(env.law_at(i + 1).q2,
                                               abs=1e-12)
        assert all(v >= 0 for v in idx.alpha + idx.beta + idx.gamma)


def test_beta_split_weights_the_intermediate_return():
    # the B1/B3 shares carry the probability of first returning one level
    # down, which is strictly below one for a drifting walk
    env = Environment.homogeneous(ROW1)
    idx = excursion_indices(env, 0)
    assert idx.beta[0] + idx.beta[2] < (ROW1.q2 *
                                        (ROW1.p1 + ROW1.p2) / idx.denom)
    assert idx.beta[1] > 0.0


def test_immigration_law_is_alpha_ratio():
    env = Environment.homogeneous(ROW1)
    pi = immigration_law(env).pi
    idx = excursion_indices(env, 1)
    total = sum(idx.alpha)
    assert pi == pytest.approx(tuple(a / total for a in idx.alpha))
    assert sum(pi) == pytest.approx(1.0, abs=1e-10)


def test_mean_matrix_structure():
    scalars, _ = _scalars(Environment.homogeneous(ROW1))
    q = mean_matrix(scalars).q
    # the four plain parents share one row; s-parents and t-parents pair up
    for a, b in ((0, 2), (0, 6), (0, 8), (1, 7), (3, 5)):
        assert np.array_equal(q[a], q[b])
    # only a type-5 parent can produce a lone C3 child
    assert np.count_nonzero(q[:, 8]) == 1 and q[4, 8] > 0
    # plain parents never split into A3/B3 or C1/C2
    assert np.all(q[np.ix_([0, 2, 6, 8], [2, 5, 6, 7, 8])] == 0.0)


def test_offspring_distribution_normalizes_and_matches_mean():
    env = Environment.homogeneous(ROW1)
    scalars, idx = _scalars(env)
    q = mean_matrix(scalars).q
    for parent in (1, 2, 4, 5):
        dist = offspring_distribution(parent, scalars, idx, tail=1e-12)
        total = sum(dist.values())
        assert total == pytest.approx(1.0, abs=1e-9)
        mean = sum(p * np.array(k) for k, p in dist.items())
        assert np.allclose(mean, q[parent - 1], atol=1e-9)


def test_offspring_pmf_agrees_with_distribution():
    env = Environment.homogeneous(ROW2)
    scalars, idx = _scalars(env)
    for parent in (1, 2, 4, 5):
        dist = offspring_distribution(parent, scalars, idx, tail=1e-10)
        for counts, p in list(dist.items())[:40]:
            tal = ExcursionTally(level=0, counts=counts)
            assert offspring_pmf(parent, tal, scalars, idx) == \
                pytest.approx(p, rel=1e-9)


def test_offspring_pmf_rejects_impossible_children():
    env = Environment.homogeneous(ROW1)
    scalars, idx = _scalars(env)
    lone_c3 = ExcursionTally(level=0, counts=(0, 0, 0, 0, 0, 0, 0, 0, 1))
    assert offspring_pmf(1, lone_c3, scalars, idx) == 0.0
    assert offspring_pmf(5, lone_c3, scalars, idx) == \
        pytest.approx(1.0 - scalars.v)


def test_offspring_sample_mean_tracks_mean_matrix():
    env = Environment.homogeneous(ROW1)
    scalars, idx = _scalars(env)
    q = mean_matrix(scalars).q
    rng = np.random.default_rng(12345)
    for parent in (1, 2, 4, 5):
        draws = offspring_sample(parent, scalars, idx, rng, size=200000)
        assert np.allclose(draws.mean(axis=0), q[parent - 1], atol=0.01)


def test_expected_t1_homogeneous_closed_form_matches_series():
    # the same physical environment through both code paths
    closed = expected_t1(Environment.homogeneous(ROW1))
    series = expected_t1(Environment.periodic([ROW1]))
    assert closed.converged and series.converged
    assert closed.value == pytest.approx(series.value, abs=1e-9)


def test_expected_t1_periodic_converges():
    res = expected_t1(periodic_env())
    assert res.converged and res.value > 1.0


def test_expected_t1_diverges_for_negative_drift():
    with pytest.raises(Diverging):
        expected_t1(Environment.homogeneous(NEGATIVE_DRIFT))


def test_expected_tally_telescopes_to_expected_t1():
    env = periodic_env()
    res = expected_t1(env, tol=1e-13)
    total = 1.0 + sum(expected_tally(env, i) @ TIME_WEIGHTS
                      for i in range(0, -res.levels, -1))
    assert total == pytest.approx(res.value, abs=1e-9)


def test_expected_tally_rejects_positive_levels():
    with pytest.raises(ValueError):
        expected_tally(Environment.homogeneous(ROW1), 1)


def test_level_mean_matrix_is_cached():
    env = Environment.homogeneous(ROW1)
    assert level_mean_matrix(env, 0) is level_mean_matrix(env, -7)

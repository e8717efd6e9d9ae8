import json

import numpy as np
import pytest

from helpers import ROW1, ROW2, DIRICHLET_ALPHA
from ladderwalk import (EnvLaw, Environment, InvalidLaw, SiteLaw, local_drift,
                        sample_environment, shift)


def test_site_law_rejects_negative_probability():
    with pytest.raises(InvalidLaw):
        SiteLaw(q2=-0.1, q1=0.5, p1=0.3, p2=0.3)


def test_site_law_rejects_bad_sum():
    with pytest.raises(InvalidLaw):
        SiteLaw(q2=0.3, q1=0.3, p1=0.3, p2=0.3)


def test_site_law_array_order_is_by_jump_size():
    arr = ROW1.as_array()
    assert arr.tolist() == [ROW1.q2, ROW1.q1, ROW1.p1, ROW1.p2]


def test_local_drift_value():
    assert local_drift(ROW1) == pytest.approx(0.39, abs=1e-15)


def test_homogeneous_law_everywhere():
    env = Environment.homogeneous(ROW1)
    assert env.law_at(-1000) == env.law_at(1000) == ROW1


def test_periodic_wraps():
    env = Environment.periodic([ROW1, ROW2])
    for i in (-4, -2, 0, 2, 10):
        assert env.law_at(i) == ROW1
        assert env.law_at(i + 1) == ROW2


def test_explicit_uses_default_outside_window():
    env = Environment.explicit(-2, [ROW2, ROW2, ROW2], ROW1)
    assert env.law_at(-2) == ROW2
    assert env.law_at(0) == ROW2
    assert env.law_at(1) == ROW1
    assert env.law_at(-3) == ROW1


def test_materialize_matches_law_at():
    env = Environment.periodic([ROW1, ROW2])
    arr = env.materialize(-3, 3)
    for j, i in enumerate(range(-3, 4)):
        assert np.allclose(arr[j], env.law_at(i).as_array())


def test_shift_view():
    env = Environment.periodic([ROW1, ROW2])
    view = shift(env, 3)
    for i in range(-5, 5):
        assert view.law_at(i) == env.law_at(i + 3)


def test_iid_is_deterministic_in_seed():
    law = EnvLaw("dirichlet", alpha=DIRICHLET_ALPHA)
    a = Environment.iid(law, 7)
    b = Environment.iid(law, 7)
    c = Environment.iid(law, 8)
    assert np.array_equal(a.materialize(-50, 50), b.materialize(-50, 50))
    assert not np.array_equal(a.materialize(-50, 50), c.materialize(-50, 50))


def test_cache_key_collapses_by_structure():
    homog = Environment.homogeneous(ROW1)
    per = Environment.periodic([ROW1, ROW2])
    assert homog.cache_key(-5) == homog.cache_key(17)
    assert per.cache_key(-4) == per.cache_key(6)
    assert per.cache_key(0) != per.cache_key(1)


def test_shift_shares_caches():
    env = Environment.periodic([ROW1, ROW2])
    env.module_cache("probe")["k"] = 1
    assert shift(env, 2).module_cache("probe")["k"] == 1


def test_json_round_trip():
    for env in (Environment.homogeneous(ROW1),
                Environment.periodic([ROW1, ROW2]),
                Environment.explicit(-1, [ROW1, ROW2], ROW1),
                Environment.iid(EnvLaw("dirichlet", alpha=DIRICHLET_ALPHA),
                                3)):
        back = Environment.from_json(env.to_json())
        assert np.array_equal(back.materialize(-20, 20),
                              env.materialize(-20, 20))


def test_json_rejects_unknown_fields():
    with pytest.raises(InvalidLaw):
        Environment.from_json(json.dumps(
            {"kind": "homogeneous", "laws": [ROW1.to_dict()], "bogus": 1}))


def test_dirichlet_samples_clamped_and_stochastic():
    law = EnvLaw("dirichlet", alpha=(0.2, 0.2, 0.2, 0.2), margin=1e-3)
    block = law.sample_block(np.random.default_rng(0), 500)
    assert np.all(block > 0)
    assert np.allclose(block.sum(axis=1), 1.0)
    # clamping keeps even tiny coordinates a margin away from 0
    assert block.min() >= 1e-3 / (1 + 4e-3)


def test_mixture_env_law():
    law = EnvLaw("mixture", laws=(ROW1, ROW2), weights=(0.5, 0.5))
    block = law.sample_block(np.random.default_rng(1), 100)
    for row in block:
        assert (np.allclose(row, ROW1.as_array())
                or np.allclose(row, ROW2.as_array()))


def test_sample_environment_point_mass_is_homogeneous():
    env = sample_environment(EnvLaw("point_mass", law=ROW1), (-5, 5), 0)
    assert env.kind == "homogeneous"
    assert env.law_at(123) == ROW1


def test_admissible_on_flags_zero_q2():
    env = Environment.homogeneous(SiteLaw(q2=0.0, q1=0.5, p1=0.25, p2=0.25))
    assert not env.admissible_on(-5, 5)
    assert Environment.homogeneous(ROW1).admissible_on(-5, 5)

import numpy as np
import pytest

from helpers import ROW1, ROW3, NEGATIVE_DRIFT, DIRICHLET_ALPHA, periodic_env
from ladderwalk import (Diverging, EnvLaw, Environment, invariant_density,
                        local_drift, normalizer, velocity)
from ladderwalk.oracle import _checked_solve, _interior_system


def test_homogeneous_density_collapses():
    rep = invariant_density(Environment.homogeneous(ROW1))
    assert rep.pi_converged and rep.d_converged
    assert rep.pi_value == pytest.approx(rep.d_value, abs=1e-12)
    assert rep.pi_value >= 2.0


def test_homogeneous_density_is_total_conditional_occupation():
    # Pi must equal E[T1 | exit at 1] + E[T1 | exit at 2], which a deep
    # absorbing-chain solve computes independently
    env = Environment.homogeneous(ROW1)
    rep = invariant_density(env)
    a, b = -400, 1
    lhs, absorb, idx = _interior_system(env, a, b)
    green = np.linalg.inv(lhs)
    total = 0.0
    for target in (1, 2):
        phi = _checked_solve(lhs, absorb[target])
        total += (green @ phi)[idx[0]] / phi[idx[0]]
    assert rep.pi_value == pytest.approx(total, abs=1e-6)


def test_periodic_density_converges_with_distinct_pi_and_d():
    rep = invariant_density(periodic_env())
    assert rep.pi_converged and rep.d_converged
    assert rep.pi_value >= 2.0 and rep.d_value >= 2.0
    # inhomogeneity separates the two series
    assert abs(rep.pi_value - rep.d_value) > 1e-3


def test_normalizer_matches_density_report():
    env = periodic_env()
    assert normalizer(env) == pytest.approx(invariant_density(env).d_value)


def test_density_diverges_for_negative_drift():
    with pytest.raises(Diverging):
        invariant_density(Environment.homogeneous(NEGATIVE_DRIFT))


def test_point_mass_velocity_is_the_local_drift():
    for law in (ROW1, ROW3):
        rep = velocity(EnvLaw("point_mass", law=law), 1)
        assert rep.velocity_drift == pytest.approx(local_drift(law),
                                                   abs=1e-8)
        assert rep.converged_samples == 1
        assert rep.divergent_fraction == 0.0


def test_point_mass_velocity_abs_variant_is_jump_mass():
    # with Pi = D the verbatim numerator factor passes through unchanged
    rep = velocity(EnvLaw("point_mass", law=ROW1), 1)
    mass = 2 * ROW1.q2 + ROW1.q1 + ROW1.p1 + 2 * ROW1.p2
    assert rep.velocity_abs == pytest.approx(mass, abs=1e-8)
    assert rep.value("abs") == rep.velocity_abs
    assert rep.value("drift") == rep.velocity_drift


def test_velocity_ratio_consistency_under_tolerance_halving():
    law = EnvLaw("dirichlet", alpha=DIRICHLET_ALPHA)
    a = velocity(law, 5, tol=1e-10, seed=3)
    b = velocity(law, 5, tol=2e-10, seed=3)
    assert a.velocity_drift == pytest.approx(b.velocity_drift, abs=1e-6)


def test_velocity_reports_divergent_samples():
    with pytest.raises(Diverging):
        velocity(EnvLaw("point_mass", law=NEGATIVE_DRIFT), 1)


def test_velocity_input_validation():
    with pytest.raises(ValueError):
        velocity(EnvLaw("point_mass", law=ROW1), 0)
    with pytest.raises(ValueError):
        velocity(EnvLaw("point_mass", law=ROW1), 1).value("median")

"""Random-environment layer: invariant density, normalizer and velocity.

The environment viewed from the particle is a Markov chain on environments;
its invariant density Pi(omega) relative to the environment law, together
with the normalizer D(omega), expresses the walk's limiting velocity as a
ratio of environment expectations.  Both are geometric-type series in the
level mean matrices of the branching structure and are summed here by
truncation, with a closed form in the homogeneous case.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .branching import (DEFAULT_MAX_LEVELS, DEFAULT_TOL, _DIVERGENCE_RUN,
                        TIME_WEIGHTS, excursion_indices, level_mean_matrix)
from .environment import EnvLaw, Environment, local_drift
from .errors import Diverging

#: occupation weights: which of the nine types at level i (resp. i+1)
#: contribute visits to site i
V1 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
V2 = np.array([1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0])


@dataclass(frozen=True)
class DensityReport:
    """Invariant density Pi and normalizer D of one environment."""

    pi_value: float
    d_value: float
    pi_levels: int
    d_levels: int
    pi_converged: bool
    d_converged: bool


@dataclass(frozen=True)
class VelocityReport:
    """Monte Carlo estimate of the limiting velocity over environment draws.

    Two numerator variants are reported: `abs` uses the total jump-size mass
    2*w0(-2) + w0(-1) + w0(1) + 2*w0(2) = E|X_1| verbatim; `drift` uses the
    local drift E(X_1).  They coincide only for walks that cannot move down.
    """

    samples: int
    converged_samples: int
    divergent_fraction: float
    numerator_drift: float
    numerator_drift_se: float
    numerator_abs: float
    numerator_abs_se: float
    denominator: float
    denominator_se: float
    velocity_drift: float
    velocity_abs: float
    tol: float
    max_levels: int

    def value(self, factor: str = "drift") -> float:
        if factor == "drift":
            return self.velocity_drift
        if factor == "abs":
            return self.velocity_abs
        raise ValueError("factor must be 'drift' or 'abs'")


def _ratio_row(env: Environment, i: int, tol: float) -> np.ndarray:
    """Row vector (a1/(a1+a2), a2/(a1+a2), 1, 0, ..., 0) from the A-indices
    at level i; it aggregates the two ladder-height conditionals."""
    a1, a2, _ = excursion_indices(env, i, tol).alpha
    total = a1 + a2
    if total <= 0.0:
        raise Diverging(f"level-{i} one-step ladder weight vanishes")
    out = np.zeros(9)
    out[0] = a1 / total
    out[1] = a2 / total
    out[2] = 1.0
    return out


def _check_term(term: float, what: str) -> float:
    if term < -1e-12:
        raise Diverging(f"negative {what} series term {term!r}")
    return max(term, 0.0)


def _homogeneous_density(env: Environment, tol: float) -> DensityReport:
    """Closed form of the collapsed geometric series 2 + rho Q (I-Q)^-1 w."""
    rho = _ratio_row(env, 1, tol)
    q = level_mean_matrix(env, 0, tol).q
    if np.max(np.abs(np.linalg.eigvals(q))) >= 1.0 - 1e-12:
        raise Diverging("mean-matrix spectral radius is not below 1")
    w = TIME_WEIGHTS.astype(float)
    val = 2.0 + float(rho @ q @ np.linalg.solve(np.eye(9) - q, w))
    return DensityReport(pi_value=val, d_value=val, pi_levels=0, d_levels=0,
                         pi_converged=True, d_converged=True)


def invariant_density(env: Environment, tol: float = DEFAULT_TOL,
                      max_levels: int = DEFAULT_MAX_LEVELS) -> DensityReport:
    """Invariant density Pi(omega) and normalizer D(omega).

    Pi sums, over i >= 0, the expected visits to the origin of walks started
    i sites above it, read off the mean matrices at levels i..0 with the
    ladder-height ratio row at level 1+i; D is the analogous sum over the
    walk started at the origin itself (levels 0, -1, ...).  Both series are
    truncated at the first term below tol; fifty consecutive non-decreasing
    terms raise Diverging, and hitting max_levels clears the converged flag.
    """
    if env.kind == "homogeneous":
        return _homogeneous_density(env, tol)
    w = TIME_WEIGHTS.astype(float)

    # Pi: term i = rho_{1+i} (Q_i...Q_0 v2 + Q_i...Q_1 v1)
    c2 = level_mean_matrix(env, 0, tol).q @ V2
    c1 = None
    pi_total = 2.0 + _check_term(float(_ratio_row(env, 1, tol) @ c2),
                                 "density")
    pi_levels = 1
    pi_conv = False
    prev = np.inf
    rising = 0
    for i in range(1, max_levels + 1):
        q_i = level_mean_matrix(env, i, tol).q
        c2 = q_i @ c2
        c1 = q_i @ V1 if c1 is None else q_i @ c1
        term = _check_term(float(_ratio_row(env, 1 + i, tol) @ (c2 + c1)),
                           "density")
        pi_total += term
        pi_levels = i + 1
        if term >= prev:
            rising += 1
            if rising >= _DIVERGENCE_RUN:
                raise Diverging(
                    f"{_DIVERGENCE_RUN} consecutive non-decreasing density "
                    f"terms (last {term!r})")
        else:
            rising = 0
        prev = term
        if term < tol:
            pi_conv = True
            break

    # D: term k = rho_1 Q_0 Q_{-1} ... Q_{-k} w
    row = _ratio_row(env, 1, tol) @ level_mean_matrix(env, 0, tol).q
    d_total = 2.0 + _check_term(float(row @ w), "normalizer")
    d_levels = 1
    d_conv = False
    prev = np.inf
    rising = 0
    for k in range(1, max_levels + 1):
        row = row @ level_mean_matrix(env, -k, tol).q
        term = _check_term(float(row @ w), "normalizer")
        d_total += term
        d_levels = k + 1
        if term >= prev:
            rising += 1
            if rising >= _DIVERGENCE_RUN:
                raise Diverging(
                    f"{_DIVERGENCE_RUN} consecutive non-decreasing "
                    f"normalizer terms (last {term!r})")
        else:
            rising = 0
        prev = term
        if term < tol:
            d_conv = True
            break

    return DensityReport(pi_value=pi_total, d_value=d_total,
                         pi_levels=pi_levels, d_levels=d_levels,
                         pi_converged=pi_conv, d_converged=d_conv)


def normalizer(env: Environment, tol: float = DEFAULT_TOL,
               max_levels: int = DEFAULT_MAX_LEVELS) -> float:
    """The normalizer D(omega) alone (the denominator integrand)."""
    return invariant_density(env, tol, max_levels).d_value


def _jump_mass(law) -> float:
    """Total jump-size mass 2*q2 + q1 + p1 + 2*p2 = E|X_1|, always in [1, 2]."""
    m = 2.0 * law.q2 + law.q1 + law.p1 + 2.0 * law.p2
    assert 1.0 - 1e-12 <= m <= 2.0 + 1e-12, f"jump-size mass {m!r} not in [1,2]"
    return m


def velocity(env_law: EnvLaw, env_samples: int, tol: float = DEFAULT_TOL,
             seed: int = 0, max_levels: int = DEFAULT_MAX_LEVELS,
             workers: int = 4) -> VelocityReport:
    """Limiting velocity as a ratio of environment expectations.

    Draws env_samples i.i.d. environments, evaluates Pi(omega) times the
    one-step factor at the origin (both variants) and D(omega) on each, and
    returns the ratio of sample means with standard errors.  Divergent draws
    are counted and excluded; a point-mass law needs only one draw.
    """
    if env_samples < 1:
        raise ValueError("need at least one environment sample")
    if env_law.kind == "point_mass":
        env_samples = 1

    seeds = np.random.SeedSequence(seed).generate_state(env_samples)

    def one(k: int):
        if env_law.kind == "point_mass":
            env = Environment.homogeneous(env_law.law)
        else:
            env = Environment.iid(env_law, int(seeds[k]))
        try:
            rep = invariant_density(env, tol, max_levels)
        except Diverging:
            return None
        if not (rep.pi_converged and rep.d_converged):
            return None
        law0 = env.law_at(0)
        return (rep.pi_value * local_drift(law0),
                rep.pi_value * _jump_mass(law0), rep.d_value)

    if env_samples == 1 or workers <= 1:
        rows = [one(k) for k in range(env_samples)]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, env_samples)) as ex:
            rows = list(ex.map(one, range(env_samples)))

    kept = np.array([r for r in rows if r is not None])
    n = len(kept)
    if n == 0:
        raise Diverging("every environment sample diverged")
    means = kept.mean(axis=0)
    ses = (kept.std(axis=0, ddof=1) / np.sqrt(n)) if n > 1 else np.zeros(3)
    if means[2] <= 0.0:
        raise Diverging("normalizer sample mean is not positive")
    return VelocityReport(
        samples=env_samples, converged_samples=n,
        divergent_fraction=1.0 - n / env_samples,
        numerator_drift=float(means[0]), numerator_drift_se=float(ses[0]),
        numerator_abs=float(means[1]), numerator_abs_se=float(ses[1]),
        denominator=float(means[2]), denominator_se=float(ses[2]),
        velocity_drift=float(means[0] / means[2]),
        velocity_abs=float(means[1] / means[2]),
        tol=tol, max_levels=max_levels,
    )

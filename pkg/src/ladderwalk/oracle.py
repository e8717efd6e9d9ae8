"""Exact finite-chain reference answers via dense linear algebra.

These solvers treat the walk restricted to a finite window as an absorbing
Markov chain and answer hitting questions by one dense solve.  They are
deliberately independent of the transfer-matrix machinery so the two can
cross-check each other.
"""
from __future__ import annotations

import numpy as np

from .environment import Environment
from .errors import SingularSystem

RESIDUAL_TOL = 1e-9


def _interior_system(env: Environment, a: int, b: int):
    """Transient block (I - T) and per-state jump rows for starts a+1..b-1.

    Absorbing states are a-1, a (below) and b, b+1 (above).
    """
    starts = list(range(a + 1, b))
    n = len(starts)
    idx = {s: j for j, s in enumerate(starts)}
    trans = np.zeros((n, n))
    absorb = {a - 1: np.zeros(n), a: np.zeros(n),
              b: np.zeros(n), b + 1: np.zeros(n)}
    for j, s in enumerate(starts):
        law = env.law_at(s)
        row = law.as_array()  # probabilities of jumps -2, -1, +1, +2
        total = 0.0
        for jump, p in zip((-2, -1, 1, 2), row):
            total += p
            dest = s + jump
            if dest in idx:
                trans[j, idx[dest]] += p
            else:
                absorb[dest][j] += p
        assert abs(total - 1.0) < 1e-9, "site law row not stochastic"
    return np.eye(n) - trans, absorb, idx


def _checked_solve(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    residual = np.max(np.abs(lhs @ sol - rhs))
    if residual > RESIDUAL_TOL:
        raise SingularSystem(f"linear solve residual {residual!r} exceeds "
                             f"{RESIDUAL_TOL!r}")
    return sol


def solve_exit_table(env: Environment, a: int, b: int) -> dict:
    """Absorption probabilities at each of a-1, a, b, b+1, keyed by
    absorbing site, each value an array over starts a+1..b-1."""
    lhs, absorb, idx = _interior_system(env, a, b)
    out = {}
    for site, vec in absorb.items():
        out[site] = _checked_solve(lhs, vec)
    mass = sum(out.values())
    if np.max(np.abs(mass - 1.0)) > 1e-8:
        raise SingularSystem("absorption probabilities do not sum to 1")
    out["starts"] = np.arange(a + 1, b)
    return out


def solve_exit(env: Environment, a: int, b: int, start: int,
               target: int) -> float:
    """Probability the walk from `start` leaves [a+1, b-1] at `target`."""
    if not a + 1 <= start <= b - 1:
        raise ValueError(f"start {start} outside [{a + 1}, {b - 1}]")
    if target not in (a - 1, a, b, b + 1):
        raise ValueError(f"target {target} not an absorbing site")
    table = solve_exit_table(env, a, b)
    return float(table[target][start - (a + 1)])


def solve_expected_exit_times(env: Environment, a: int, b: int) -> np.ndarray:
    """Expected steps to leave [a+1, b-1], for every start a+1..b-1."""
    lhs, _, _ = _interior_system(env, a, b)
    return _checked_solve(lhs, np.ones(lhs.shape[0]))


def solve_expected_exit_time(env: Environment, a: int, b: int,
                             start: int) -> float:
    """Expected number of steps for the walk from `start` to leave
    [a+1, b-1]."""
    if not a + 1 <= start <= b - 1:
        raise ValueError(f"start {start} outside [{a + 1}, {b - 1}]")
    return float(solve_expected_exit_times(env, a, b)[start - (a + 1)])

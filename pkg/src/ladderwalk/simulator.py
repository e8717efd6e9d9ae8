"""Seeded Monte Carlo simulation of the walk.

Reproducibility contract: every replica owns a splitmix64 counter stream
derived from (master_seed, replica index), so results are bit-identical for
any worker count and any materialization depth of the environment.  If a
path wanders outside the materialized site window, the window is widened and
the replica is re-run from its original stream — same uniforms, same path.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .environment import Environment

GOLDEN = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF
DEFAULT_STEP_CAP = 10 ** 8
BIAS_WARN_RATE = 1e-4

_STATUS_OK = 0
_STATUS_CAPPED = 1
_STATUS_LOW = 2       # breached the bottom of the site window
_STATUS_HIGH = 3      # breached the top of the site window
_STATUS_OVERFLOW = 4  # path buffer too small


def splitmix64(state: int) -> tuple:
    """One step of the splitmix64 stream: (new_state, 64-bit output)."""
    state = (state + GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def replica_seed(master_seed: int, replica: int) -> int:
    """Starting stream state for one replica, decorrelated from neighbors."""
    _, z = splitmix64((master_seed ^ 0x5851F42D4C957F2D) & _MASK)
    _, z2 = splitmix64((z + (replica + 1) * GOLDEN) & _MASK)
    return z2


def replica_seeds(master_seed: int, n: int) -> np.ndarray:
    """Vectorized replica_seed for replicas 0..n-1 (exact same values)."""
    _, z = splitmix64((master_seed ^ 0x5851F42D4C957F2D) & _MASK)
    idx = np.arange(1, n + 1, dtype=np.uint64)
    s = np.uint64(z) + idx * np.uint64(GOLDEN) + np.uint64(GOLDEN)
    s = (s ^ (s >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    s = (s ^ (s >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return s ^ (s >> np.uint64(31))


def _ladder_kernel(laws, lo, state, step_cap, path):
    """Walk from 0 until the first site > 0.

    laws rows cover sites lo..lo+len-1 with columns (q2, q1, p1, p2).
    path is an int64 buffer receiving X_0.. (path[0] is already 0); pass a
    length-1 buffer to skip recording.  Returns (status, steps, position,
    state).
    """
    record = path.shape[0] > 1
    pos = 0
    steps = 0
    top = laws.shape[0] + lo - 1
    while True:
        if pos - 2 < lo:
            return _STATUS_LOW, steps, pos, state
        if pos > top:
            return _STATUS_HIGH, steps, pos, state
        if steps >= step_cap:
            return _STATUS_CAPPED, steps, pos, state
        state = (state + GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z = z ^ (z >> 31)
        u = (z >> 11) * 1.1102230246251565e-16
        row = pos - lo
        if u < laws[row, 0]:
            pos -= 2
        elif u < laws[row, 0] + laws[row, 1]:
            pos -= 1
        elif u < laws[row, 0] + laws[row, 1] + laws[row, 2]:
            pos += 1
        else:
            pos += 2
        steps += 1
        if record:
            if steps >= path.shape[0]:
                return _STATUS_OVERFLOW, steps, pos, state
            path[steps] = pos
        if pos > 0:
            return _STATUS_OK, steps, pos, state


def _ensemble_kernel(laws, lo, seeds, step_cap, t1, xt1, status):
    """Ladder times for many replicas; one output slot per replica."""
    dummy = np.zeros(1, dtype=np.int64)
    for r in prange(seeds.shape[0]):
        if status[r] == _STATUS_LOW:  # only (re)run pending replicas
            st, steps, pos, _ = _ladder_kernel(
                laws, lo, seeds[r], step_cap, dummy)
            t1[r] = steps
            xt1[r] = pos
            status[r] = st


def _horizon_kernel(laws, lo, state, pos, steps_left, mn, mx):
    """Run at most steps_left steps inside the window; returns
    (status, steps_done, position, state, min, max) — status OK means steps
    exhausted, LOW/HIGH mean the window must move."""
    top = laws.shape[0] + lo - 1
    done = 0
    while done < steps_left:
        if pos - 2 < lo:
            return _STATUS_LOW, done, pos, state, mn, mx
        if pos + 2 > top:
            return _STATUS_HIGH, done, pos, state, mn, mx
        state = (state + GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z = z ^ (z >> 31)
        u = (z >> 11) * 1.1102230246251565e-16
        row = pos - lo
        if u < laws[row, 0]:
            pos -= 2
        elif u < laws[row, 0] + laws[row, 1]:
            pos -= 1
        elif u < laws[row, 0] + laws[row, 1] + laws[row, 2]:
            pos += 1
        else:
            pos += 2
        done += 1
        if pos < mn:
            mn = pos
        elif pos > mx:
            mx = pos
    return _STATUS_OK, done, pos, state, mn, mx


import numba as _numba  # noqa: E402  (hard dependency of the kernels)

prange = _numba.prange
_ladder_kernel = _numba.njit(cache=True)(_ladder_kernel)
_horizon_kernel = _numba.njit(cache=True)(_horizon_kernel)
_ensemble_kernel = _numba.njit(cache=True, parallel=True)(_ensemble_kernel)


def _set_workers(workers: int):
    _numba.set_num_threads(
        max(1, min(workers, _numba.config.NUMBA_NUM_THREADS)))


@dataclass
class WalkPath:
    """A simulated trajectory from 0 until its first strict ascent."""

    positions: np.ndarray
    stopped: bool

    @property
    def t1(self) -> int:
        if not self.stopped:
            raise ValueError("path was abandoned before the ladder time")
        return len(self.positions) - 1

    @property
    def x_t1(self) -> int:
        if not self.stopped:
            raise ValueError("path was abandoned before the ladder time")
        return int(self.positions[-1])


@dataclass
class EnsembleStats:
    """Aggregated ladder-time statistics over independent replicas."""

    replicas: int
    completed: int
    abandoned: int
    t1_mean: float
    t1_var: float
    t1_se: float
    xt1_mean: float
    xt1_var: float
    xt1_se: float
    xt1_hist: dict
    bias_warning: bool

    def to_csv(self) -> str:
        header = ("replicas,completed,abandoned,t1_mean,t1_var,t1_se,"
                  "xt1_mean,xt1_var,xt1_se,xt1_at_1,xt1_at_2,bias_warning")
        row = (f"{self.replicas},{self.completed},{self.abandoned},"
               f"{self.t1_mean:.12g},{self.t1_var:.12g},{self.t1_se:.12g},"
               f"{self.xt1_mean:.12g},{self.xt1_var:.12g},{self.xt1_se:.12g},"
               f"{self.xt1_hist.get(1, 0)},{self.xt1_hist.get(2, 0)},"
               f"{int(self.bias_warning)}")
        return header + "\n" + row


@dataclass
class HorizonResult:
    """Outcome of a fixed-length trajectory."""

    steps: int
    final_position: int
    min_position: int
    max_position: int

    @property
    def empirical_drift(self) -> float:
        return self.final_position / self.steps


def _window_laws(env: Environment, lo: int, hi: int) -> np.ndarray:
    return np.ascontiguousarray(env.materialize(lo, hi))


def run_to_ladder(env: Environment, seed: int,
                  step_cap: int = DEFAULT_STEP_CAP,
                  replica: int = 0) -> WalkPath:
    """One path from 0 to its ladder time, deterministic in (env, seed,
    replica); replica r follows the same stream as slot r of run_ensemble.

    If the cap is reached the unstopped path is returned (stopped=False);
    callers that need an error can check the flag.
    """
    state = np.uint64(replica_seed(seed, replica))
    lo = -256
    buf_len = 1 << 12
    while True:
        laws = _window_laws(env, lo, 2)
        buf = np.zeros(min(buf_len, step_cap + 1) + 1, dtype=np.int64)
        st, steps, pos, _ = _ladder_kernel(laws, lo, state, step_cap, buf)
        if st == _STATUS_LOW:
            lo *= 4
        elif st == _STATUS_OVERFLOW:
            buf_len *= 8
        elif st == _STATUS_CAPPED:
            return WalkPath(positions=buf[:steps + 1].copy(), stopped=False)
        else:
            return WalkPath(positions=buf[:steps + 1].copy(), stopped=True)


def run_ensemble(env: Environment, master_seed: int, replicas: int,
                 workers: int = 1,
                 step_cap: int = DEFAULT_STEP_CAP) -> EnsembleStats:
    """Ladder-time statistics over independent replicas.

    Bit-identical for any worker count: replica r's stream depends only on
    (master_seed, r) and aggregation happens in replica order.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    _set_workers(workers)
    seeds = replica_seeds(master_seed, replicas)
    t1 = np.zeros(replicas, dtype=np.int64)
    xt1 = np.zeros(replicas, dtype=np.int64)
    # LOW doubles as "pending": replicas needing a (re)run with a wider window
    status = np.full(replicas, _STATUS_LOW, dtype=np.int64)
    lo = -256
    while True:
        laws = _window_laws(env, lo, 2)
        _ensemble_kernel(laws, lo, seeds, step_cap, t1, xt1, status)
        if not np.any(status == _STATUS_LOW):
            break
        lo *= 4
    done = status == _STATUS_OK
    abandoned = int(np.sum(~done))
    completed = int(np.sum(done))
    if completed == 0:
        raise ValueError("all replicas hit the step cap")
    t1d = t1[done].astype(np.float64)
    xtd = xt1[done].astype(np.float64)
    t1_var = float(np.var(t1d, ddof=1)) if completed > 1 else 0.0
    xt_var = float(np.var(xtd, ddof=1)) if completed > 1 else 0.0
    bias = abandoned / replicas > BIAS_WARN_RATE
    if bias:
        warnings.warn(
            f"{abandoned}/{replicas} replicas abandoned at the step cap; "
            "reported means are biased toward fast ladder epochs",
            RuntimeWarning, stacklevel=2)
    return EnsembleStats(
        replicas=replicas, completed=completed, abandoned=abandoned,
        t1_mean=float(np.mean(t1d)), t1_var=t1_var,
        t1_se=math.sqrt(t1_var / completed),
        xt1_mean=float(np.mean(xtd)), xt1_var=xt_var,
        xt1_se=math.sqrt(xt_var / completed),
        xt1_hist={1: int(np.sum(xt1[done] == 1)),
                  2: int(np.sum(xt1[done] == 2))},
        bias_warning=bias,
    )


def run_horizon(env: Environment, seed: int, n_steps: int) -> HorizonResult:
    """Exactly n_steps of the walk from 0; the site window slides with the
    trajectory so memory stays bounded on long runs."""
    if n_steps < 1:
        raise ValueError("need at least one step")
    state = np.uint64(replica_seed(seed, 0))
    pos = 0
    done = 0
    min_pos = 0
    max_pos = 0
    half = 1 << 15
    base = -half
    while done < n_steps:
        laws = _window_laws(env, base, base + 2 * half)
        # numba boxes the returned state to a Python int; re-wrap so the
        # kernel always sees uint64 (int64 would promote the stream to float)
        st, k, pos, state, min_pos, max_pos = _horizon_kernel(
            laws, base, np.uint64(state), pos, n_steps - done,
            min_pos, max_pos)
        done += k
        base = pos - half
    return HorizonResult(steps=n_steps, final_position=int(pos),
                         min_position=int(min_pos), max_position=int(max_pos))

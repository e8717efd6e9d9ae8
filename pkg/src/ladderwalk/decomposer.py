"""Excursion decomposition of stopped paths and the exact ladder identity.

Every downward crossing of a level m <= 1 opens exactly one excursion at m
(type A, B or C depending on the step's size and origin) and the next upward
crossing closes it (sub-type 1, 2 or 3 read off the closing step).  The
virtual step X_{-1} = 1 -> X_0 = 0 opens the immigration excursion at level
1; its closing sub-type is the seed U_1.  Counting per level reproduces
T_1 = 1 + sum_{i<=0} U_i . (2,2,1,1,1,0,2,2,1) as an exact integer identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .branching import TIME_WEIGHTS, ExcursionTally
from .environment import Environment
from .errors import MalformedPath
from .simulator import (GOLDEN, _MASK, _STATUS_LOW, _STATUS_OK, WalkPath,
                        _set_workers, _window_laws, replica_seeds)

# tally coordinate of (type, sub-type), both 1-based: (t-1)*3 + (s-1)


@dataclass
class Decomposition:
    """Per-level tallies plus the immigration record of one stopped path."""

    tallies: dict          # level i (<= 0) -> ExcursionTally
    u1: tuple              # unit vector over closing sub-types 1..3
    t1: int

    def u1_subtype(self) -> int:
        return 1 + self.u1.index(1)

    def identity_holds(self) -> bool:
        total = 1 + sum(t.time_weight() for t in self.tallies.values())
        return total == self.t1


def decompose(path: WalkPath) -> Decomposition:
    """Classify every excursion of a stopped path, per level and sub-type."""
    if not path.stopped:
        raise MalformedPath("cannot decompose an abandoned path")
    pos = np.asarray(path.positions, dtype=np.int64)
    if pos[0] != 0:
        raise MalformedPath("path must start at 0")
    lo = int(pos.min())
    open_type = np.zeros(2 - lo, dtype=np.int64)  # levels lo .. 1
    open_type[1 - lo] = 1  # virtual A at level 1 (immigration)
    rows = -lo
    tally = np.zeros((rows + 1, 9), dtype=np.int64)  # row -i holds level i
    u1_sub = 0

    def close(m: int, sub: int):
        nonlocal u1_sub
        if m > 1:
            return  # nothing can open above the immigration level
        t = open_type[m - lo]
        if t == 0:
            return
        open_type[m - lo] = 0
        if m == 1:
            u1_sub = sub
        elif m <= 0:
            tally[-m, (t - 1) * 3 + (sub - 1)] += 1

    for n in range(len(pos) - 1):
        x, y = int(pos[n]), int(pos[n + 1])
        d = y - x
        if d == -1:
            open_type[x - lo] = 1
        elif d == -2:
            open_type[x - lo] = 2
            open_type[x - 1 - lo] = 3
        elif d == 1:
            close(y, 1)
        elif d == 2:
            close(y - 1, 3)
            close(y, 2)
        else:
            raise MalformedPath(f"increment {d} at step {n}")
    if u1_sub == 0 or open_type.any():
        raise MalformedPath("path did not close its excursions (not stopped?)")
    u1 = tuple(int(j == u1_sub) for j in (1, 2, 3))
    tallies = {-r: ExcursionTally(level=-r,
                                  counts=tuple(int(c) for c in tally[r]))
               for r in range(rows + 1)}
    return Decomposition(tallies=tallies, u1=u1, t1=len(pos) - 1)


@dataclass
class IdentityReport:
    ok: bool
    t1: int
    weight_total: int
    dv_total: int
    first_bad_level: int | None
    detail: str


def verify_identity(dec: Decomposition, path: WalkPath) -> IdentityReport:
    """Re-derive the ladder identity two independent ways.

    Checks (a) T1 = 1 + sum U_i . weights, (b) the same via the
    descent/ascent split D_{i,1} + V_{i,1} + V_{i,2}, and (c) that each
    level's D and V counts match direct step counts on the raw path.
    """
    pos = np.asarray(path.positions, dtype=np.int64)
    t1 = len(pos) - 1
    weight_total = 1 + sum(t.time_weight() for t in dec.tallies.values())

    # one pass over the raw steps: per-level counts of descents into i-1
    # from {i, i+1} and of ascents into i from i-1 / i-2
    x, y = pos[:-1], pos[1:]
    down = y < x
    d_counts = dict(zip(*np.unique(y[down] + 1, return_counts=True)))
    up1 = y == x + 1
    up2 = y == x + 2
    v1_counts = dict(zip(*np.unique(y[up1], return_counts=True)))
    v2_counts = dict(zip(*np.unique(y[up2], return_counts=True)))

    first_bad = None
    detail = "ok"
    dv_total = 1
    for i, tal in sorted(dec.tallies.items()):
        a = tal.counts
        d_i = a[0] + a[1] + a[2] + a[6] + a[7] + a[8]      # all A + all C
        v_i1 = a[0] + a[3] + a[6]
        v_i2 = a[1] + a[4] + a[7]
        dv_total += d_i + v_i1 + v_i2
        d_direct = int(d_counts.get(i, 0))
        v1_direct = int(v1_counts.get(i, 0))
        v2_direct = int(v2_counts.get(i, 0))
        if (d_i, v_i1, v_i2) != (d_direct, v1_direct, v2_direct):
            if first_bad is None:
                first_bad = i
                detail = (f"level {i}: tally D/V = {(d_i, v_i1, v_i2)}, "
                          f"path counts = {(d_direct, v1_direct, v2_direct)}")
    ok = (weight_total == t1 and dv_total == t1 and first_bad is None
          and sum(dec.u1) == 1)
    if ok is False and detail == "ok":
        detail = (f"T1 = {t1}, weight identity gives {weight_total}, "
                  f"D/V identity gives {dv_total}")
    return IdentityReport(ok=ok, t1=t1, weight_total=weight_total,
                          dv_total=dv_total, first_bad_level=first_bad,
                          detail=detail)


def _tally_kernel(laws, lo, seeds, step_cap, n_levels, t1, xt1, u1,
                  tallies, status):
    """Fused walk + streaming decomposition for many replicas.

    tallies[r, k] receives the 9 counts of level -k for k < n_levels.
    Levels deeper than -(n_levels-1) are walked but not recorded.
    """
    span = laws.shape[0] + 2
    top = laws.shape[0] + lo - 1
    for r in prange(seeds.shape[0]):
        if status[r] != _STATUS_LOW:
            continue
        open_type = np.zeros(span, dtype=np.int64)
        open_type[1 - lo] = 1
        pos = 0
        steps = 0
        state = seeds[r]
        bad = False
        while True:
            if pos - 2 < lo:
                break  # window too shallow; stays pending
            if steps >= step_cap:
                status[r] = 1  # capped
                bad = True
                break
            state = (state + GOLDEN) & _MASK
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            z = z ^ (z >> 31)
            u = (z >> 11) * 1.1102230246251565e-16
            row = pos - lo
            if u < laws[row, 0]:
                jump = -2
            elif u < laws[row, 0] + laws[row, 1]:
                jump = -1
            elif u < laws[row, 0] + laws[row, 1] + laws[row, 2]:
                jump = 1
            else:
                jump = 2
            if jump == -1:
                open_type[pos - lo] = 1
            elif jump == -2:
                open_type[pos - lo] = 2
                open_type[pos - 1 - lo] = 3
            else:
                y = pos + jump
                if jump == 2:
                    m = y - 1
                    t = open_type[m - lo]
                    if t != 0:
                        open_type[m - lo] = 0
                        if m == 1:
                            u1[r] = 3
                        elif m <= 0 and -m < n_levels:
                            tallies[r, -m, (t - 1) * 3 + 2] += 1
                m = y
                sub = jump  # 1-step close is sub-type 1, 2-step is 2
                t = open_type[m - lo]
                if t != 0:
                    open_type[m - lo] = 0
                    if m == 1:
                        u1[r] = sub
                    elif m <= 0 and -m < n_levels:
                        tallies[r, -m, (t - 1) * 3 + (sub - 1)] += 1
            pos += jump
            steps += 1
            if pos > 0:
                t1[r] = steps
                xt1[r] = pos
                status[r] = _STATUS_OK
                break
        if bad:
            continue


import numba as _numba  # noqa: E402  (hard dependency of the kernel)

prange = _numba.prange
_tally_kernel = _numba.njit(cache=True, parallel=True)(_tally_kernel)


def decompose_ensemble(env: Environment, master_seed: int, replicas: int,
                       min_level: int = -3, workers: int = 1,
                       step_cap: int = 10 ** 8) -> dict:
    """Simulate replicas and stream-decompose them in one pass.

    Returns per-replica arrays: 't1', 'xt1', 'u1' (closing sub-type of the
    immigration excursion) and 'tallies' of shape (replicas, 1-min_level, 9)
    where row k of a replica holds level -k.  Streams are identical to
    run_ensemble's, so t1/xt1 match it replica for replica.
    """
    if min_level > 0:
        raise ValueError("min_level must be <= 0")
    _set_workers(workers)
    n_levels = 1 - min_level
    seeds = replica_seeds(master_seed, replicas)
    t1 = np.zeros(replicas, dtype=np.int64)
    xt1 = np.zeros(replicas, dtype=np.int64)
    u1 = np.zeros(replicas, dtype=np.int64)
    tallies = np.zeros((replicas, n_levels, 9), dtype=np.int64)
    status = np.full(replicas, _STATUS_LOW, dtype=np.int64)
    lo = -256
    while True:
        laws = _window_laws(env, lo, 2)
        pending = status == _STATUS_LOW
        tallies[pending] = 0
        u1[pending] = 0
        _tally_kernel(laws, lo, seeds, step_cap, n_levels, t1, xt1, u1,
                      tallies, status)
        if not np.any(status == _STATUS_LOW):
            break
        lo *= 4
    return {"t1": t1, "xt1": xt1, "u1": u1, "tallies": tallies,
            "status": status}

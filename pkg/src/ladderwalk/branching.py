"""The intrinsic 9-type branching structure of the ladder epoch.

Every down-excursion of the walk before its first strict ascent is one of
nine types: the level it hangs from, whether it opened with a size-1 or
size-2 down-step (A / B), or as the lower twin of a size-2 step from one
level up (C), and which of three step shapes closed it.  Counting excursions
per level gives a branching process with immigration whose mean structure
determines E[T1] and, through it, the walk's velocity.

Coordinate order of a tally is fixed as
(A1, A2, A3, B1, B2, B3, C1, C2, C3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import Environment
from .errors import DegenerateDenominator, Diverging
from .hitting import _deep_pair

#: step cost of each excursion type in the ladder-time identity
#: T1 = 1 + sum_i U_i . TIME_WEIGHTS
TIME_WEIGHTS = np.array([2, 2, 1, 1, 1, 0, 2, 2, 1])

_BASE_PARENTS = frozenset({1, 3, 7, 9})
_S_PARENTS = frozenset({2, 8})
_T_PARENTS = frozenset({4, 6})

DEFAULT_TOL = 1e-12
DEFAULT_MAX_LEVELS = 10 ** 5
_DIVERGENCE_RUN = 50


@dataclass(frozen=True)
class ExcursionIndices:
    """Per-level opening/closing weights of the three excursion types."""

    level: int
    alpha: tuple  # (alpha1, alpha2, alpha3), summing to w_i(-1)
    beta: tuple   # (beta1, beta2, beta3), summing to w_i(-2)
    gamma: tuple  # (gamma1, gamma2, gamma3), summing to w_{i+1}(-2)
    denom: float


@dataclass(frozen=True)
class OffspringScalars:
    """Derived offspring parameters of the level-i mean matrix."""

    level: int
    x: float
    y: float
    z: float
    w: float
    s: float
    t: float
    v: float


@dataclass(frozen=True)
class ExcursionTally:
    """Excursion counts of the nine types at one level."""

    level: int
    counts: tuple

    def __post_init__(self):
        if len(self.counts) != 9 or any(c < 0 for c in self.counts):
            raise ValueError("a tally is nine nonnegative integers")

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)

    def time_weight(self) -> int:
        return int(self.as_array() @ TIME_WEIGHTS)


@dataclass(frozen=True)
class MeanMatrix:
    """9x9 matrix of expected child counts per parent type at one level."""

    level: int
    q: np.ndarray


@dataclass(frozen=True)
class ImmigrationLaw:
    """Law of the seed tally U_1 over the unit vectors e1, e2, e3."""

    pi: tuple

    def as_vector(self) -> np.ndarray:
        out = np.zeros(9)
        out[:3] = self.pi
        return out


def _clip_weight(v: float, what: str) -> float:
    if v < -1e-12:
        raise DegenerateDenominator(f"{what} = {v!r} is negative")
    return max(v, 0.0)


def excursion_indices(env: Environment, i: int,
                      tol: float = DEFAULT_TOL) -> ExcursionIndices:
    """Opening/closing weights alpha, beta, gamma at level i.

    Uses the deep-limit hitting pair below level i-2: an excursion hanging
    from level i closes through i-1, and the geometric factor 1/denom
    accounts for arbitrarily deep dips below i-1 in between.
    """
    cache = env.module_cache("branching")
    key = ("idx", env.cache_key(i - 2), env.cache_key(i - 1),
           env.cache_key(i), env.cache_key(i + 1), tol)
    got = cache.get(key)
    if got is not None:
        return got

    w_i = env.law_at(i)
    w_im1 = env.law_at(i - 1)
    w_ip1 = env.law_at(i + 1)
    f_near, _, _ = _deep_pair(env, i - 2, 1, tol, 2 ** 20, 1e-12)
    f_far, _, _ = _deep_pair(env, i - 2, 2, tol, 2 ** 20, 1e-12)
    denom = 1.0 - w_im1.q1 * f_near - w_im1.q2 * f_far
    if denom <= 1e-14:
        raise DegenerateDenominator(
            f"closing denominator {denom!r} at level {i} is not positive")

    a1 = w_i.q1 * w_im1.p1 / denom
    a3 = w_i.q1 * w_im1.p2 / denom
    a2 = _clip_weight(w_i.q1 - a1 - a3, "alpha2")
    b1 = w_i.q2 * f_near * w_im1.p1 / denom
    b3 = w_i.q2 * f_near * w_im1.p2 / denom
    b2 = _clip_weight(w_i.q2 - b1 - b3, "beta2")
    g1 = w_ip1.q2 * w_im1.p1 / denom
    g3 = w_ip1.q2 * w_im1.p2 / denom
    g2 = _clip_weight(w_ip1.q2 - g1 - g3, "gamma2")

    out = ExcursionIndices(level=i, alpha=(a1, a2, a3), beta=(b1, b2, b3),
                           gamma=(g1, g2, g3), denom=denom)
    cache[key] = out
    return out


def offspring_scalars(indices: ExcursionIndices,
                      beta2_next: float) -> OffspringScalars:
    """Negative-multinomial means x, y, z, w and branch splits s, t, v.

    beta2_next is the beta2 weight one level up; 1 - v is the share of
    B2 parents there that are really closed twins producing a lone C3
    child here.
    """
    a1, a2, a3 = indices.alpha
    b1, b2, b3 = indices.beta
    g1, g2, g3 = indices.gamma
    stop = 1.0 - a1 - a2 - b1 - b2
    if stop <= 1e-14:
        raise DegenerateDenominator(f"stop probability {stop!r} not positive")
    if a3 + b3 <= 1e-14:
        raise DegenerateDenominator("alpha3 + beta3 vanishes; s undefined")
    if g1 + g2 <= 1e-14:
        raise DegenerateDenominator("gamma1 + gamma2 vanishes; t undefined")
    if beta2_next <= 1e-14:
        raise DegenerateDenominator("beta2 at the next level vanishes; "
                                    "v undefined")
    v = 1.0 - g3 / beta2_next
    if not -1e-10 <= v <= 1.0 + 1e-10:
        raise DegenerateDenominator(f"v = {v!r} outside [0,1]")
    return OffspringScalars(
        level=indices.level,
        x=a1 / stop, y=a2 / stop, z=b1 / stop, w=b2 / stop,
        s=a3 / (a3 + b3), t=g1 / (g1 + g2),
        v=min(max(v, 0.0), 1.0),
    )


def mean_matrix(scalars: OffspringScalars) -> MeanMatrix:
    """Expected child tally per parent type, rows in tally order."""
    x, y, z, w = scalars.x, scalars.y, scalars.z, scalars.w
    s, t, v = scalars.s, scalars.t, scalars.v
    base = np.array([x, y, 0.0, z, w, 0.0, 0.0, 0.0, 0.0])
    row_s = np.array([x, y, s, z, w, 1.0 - s, 0.0, 0.0, 0.0])
    row_t = np.array([x, y, 0.0, z, w, 0.0, t, 1.0 - t, 0.0])
    row_5 = v * np.array([x, y, s, z, w, 1.0 - s, t, 1.0 - t, 0.0])
    row_5[8] = 1.0 - v
    q = np.stack([base, row_s, base, row_t, row_5, row_t,
                  base, row_s, base])
    return MeanMatrix(level=scalars.level, q=q)


def _base_log_prob(counts, indices: ExcursionIndices) -> float:
    """Log of the negative-multinomial mass for (a, b, c, d) base children."""
    a, b, c, d = counts
    a1, a2, _ = indices.alpha
    b1, b2, _ = indices.beta
    stop = 1.0 - a1 - a2 - b1 - b2
    lg = math.lgamma(a + b + c + d + 1) - math.lgamma(a + 1) - \
        math.lgamma(b + 1) - math.lgamma(c + 1) - math.lgamma(d + 1)
    for n, p in ((a, a1), (b, a2), (c, b1), (d, b2)):
        if n:
            if p == 0.0:
                return -math.inf
            lg += n * math.log(p)
    return lg + math.log(stop)


def offspring_pmf(parent_type: int, child: ExcursionTally,
                  scalars: OffspringScalars,
                  indices: ExcursionIndices) -> float:
    """Exact probability that a type-`parent_type` parent one level up
    produces exactly `child` at this level."""
    if parent_type not in range(1, 10):
        raise ValueError("parent_type must be 1..9")
    c = child.counts
    base = (c[0], c[1], c[3], c[4])
    extras = (c[2], c[5], c[6], c[7], c[8])
    s, t, v = scalars.s, scalars.t, scalars.v
    if parent_type in _BASE_PARENTS:
        if extras != (0, 0, 0, 0, 0):
            return 0.0
        return math.exp(_base_log_prob(base, indices))
    if parent_type in _S_PARENTS:
        if extras[2:] != (0, 0, 0) or extras[0] + extras[1] != 1:
            return 0.0
        split = s if extras[0] == 1 else 1.0 - s
        return split * math.exp(_base_log_prob(base, indices))
    if parent_type in _T_PARENTS:
        if extras[:2] != (0, 0) or extras[4] != 0 or \
                extras[2] + extras[3] != 1:
            return 0.0
        split = t if extras[2] == 1 else 1.0 - t
        return split * math.exp(_base_log_prob(base, indices))
    # parent 5: either a lone C3 child, or a full v-branch with both splits
    if c == (0, 0, 0, 0, 0, 0, 0, 0, 1):
        return 1.0 - v
    if extras[4] != 0 or extras[0] + extras[1] != 1 or \
            extras[2] + extras[3] != 1:
        return 0.0
    split = (s if extras[0] == 1 else 1.0 - s) * \
        (t if extras[2] == 1 else 1.0 - t)
    return v * split * math.exp(_base_log_prob(base, indices))


def offspring_distribution(parent_type: int, scalars: OffspringScalars,
                           indices: ExcursionIndices,
                           tail: float = 1e-9) -> dict:
    """Full offspring law as {tally tuple: probability}, truncated once the
    un-enumerated tail mass falls below `tail`."""
    a1, a2, _ = indices.alpha
    b1, b2, _ = indices.beta
    stop = 1.0 - a1 - a2 - b1 - b2
    ratio = 1.0 - stop
    # smallest N with P(base total > N) = ratio^(N+1) < tail
    if ratio <= 0.0:
        nmax = 0
    else:
        nmax = max(0, int(math.ceil(math.log(tail) / math.log(ratio))) + 1)
    out = {}

    def emit(base_counts, weight):
        a, b, c, d = base_counts
        p = weight * math.exp(_base_log_prob(base_counts, indices))
        if p == 0.0:
            return
        if parent_type in _BASE_PARENTS:
            keys = [((a, b, 0, c, d, 0, 0, 0, 0), p)]
        elif parent_type in _S_PARENTS:
            keys = [((a, b, 1, c, d, 0, 0, 0, 0), p * scalars.s),
                    ((a, b, 0, c, d, 1, 0, 0, 0), p * (1 - scalars.s))]
        elif parent_type in _T_PARENTS:
            keys = [((a, b, 0, c, d, 0, 1, 0, 0), p * scalars.t),
                    ((a, b, 0, c, d, 0, 0, 1, 0), p * (1 - scalars.t))]
        else:
            keys = [((a, b, e3, c, d, 1 - e3, e7, 1 - e7, 0),
                     p * scalars.v
                     * (scalars.s if e3 else 1 - scalars.s)
                     * (scalars.t if e7 else 1 - scalars.t))
                    for e3 in (1, 0) for e7 in (1, 0)]
        for k, kp in keys:
            if kp > 0.0:
                out[k] = out.get(k, 0.0) + kp

    for total in range(nmax + 1):
        for a in range(total + 1):
            for b in range(total - a + 1):
                for c in range(total - a - b + 1):
                    emit((a, b, c, total - a - b - c), 1.0)
    if parent_type == 5:
        key = (0, 0, 0, 0, 0, 0, 0, 0, 1)
        out[key] = out.get(key, 0.0) + (1.0 - scalars.v)
    return out


def offspring_sample(parent_type: int, scalars: OffspringScalars,
                     indices: ExcursionIndices, rng: np.random.Generator,
                     size: int = 1) -> np.ndarray:
    """Draw `size` child tallies; returns a (size, 9) integer array.

    The sequential next-event construction (repeatedly picking one of the
    four child-producing events or stopping) is equivalent to a geometric
    total split multinomially, which is what is vectorized here.
    """
    if parent_type not in range(1, 10):
        raise ValueError("parent_type must be 1..9")
    a1, a2, _ = indices.alpha
    b1, b2, _ = indices.beta
    stop = 1.0 - a1 - a2 - b1 - b2
    out = np.zeros((size, 9), dtype=np.int64)

    live = np.ones(size, dtype=bool)
    if parent_type == 5:
        live = rng.random(size) < scalars.v
        out[~live, 8] = 1
    n_live = int(live.sum())
    if n_live:
        go = 1.0 - stop
        if go > 0.0:
            totals = rng.geometric(stop, size=n_live) - 1
            probs = np.array([a1, a2, b1, b2]) / go
            base = rng.multinomial(totals, probs)
        else:
            base = np.zeros((n_live, 4), dtype=np.int64)
        out[live, 0] = base[:, 0]
        out[live, 1] = base[:, 1]
        out[live, 3] = base[:, 2]
        out[live, 4] = base[:, 3]
        if parent_type in _S_PARENTS or parent_type == 5:
            hi = rng.random(n_live) < scalars.s
            out[live, 2] = hi
            out[live, 5] = ~hi
        if parent_type in _T_PARENTS or parent_type == 5:
            hi = rng.random(n_live) < scalars.t
            out[live, 6] = hi
            out[live, 7] = ~hi
    return out


def immigration_law(env: Environment, tol: float = DEFAULT_TOL) -> ImmigrationLaw:
    """Law of U_1: the virtual opening step 1 -> 0 closes with sub-type
    probabilities proportional to the level-1 A-indices."""
    idx = excursion_indices(env, 1, tol)
    total = sum(idx.alpha)
    if total <= 0.0:
        raise DegenerateDenominator("level-1 A-excursion never closes")
    return ImmigrationLaw(pi=tuple(a / total for a in idx.alpha))


def level_mean_matrix(env: Environment, i: int,
                      tol: float = DEFAULT_TOL) -> MeanMatrix:
    """Mean matrix Q_i mapping level-(i+1) parents to level-i children."""
    cache = env.module_cache("branching")
    key = ("q", env.cache_key(i - 2), env.cache_key(i - 1), env.cache_key(i),
           env.cache_key(i + 1), env.cache_key(i + 2), tol)
    got = cache.get(key)
    if got is not None:
        return got
    idx = excursion_indices(env, i, tol)
    idx_up = excursion_indices(env, i + 1, tol)
    out = mean_matrix(offspring_scalars(idx, idx_up.beta[1]))
    cache[key] = out
    return out


def expected_tally(env: Environment, i: int,
                   tol: float = DEFAULT_TOL) -> np.ndarray:
    """Expected tally E[U_i] = u1 Q_0 Q_{-1} ... Q_i for i <= 0."""
    if i > 0:
        raise ValueError("tallies live at levels <= 0 (plus the seed at 1)")
    vec = immigration_law(env, tol).as_vector()
    for j in range(0, i - 1, -1):
        vec = vec @ level_mean_matrix(env, j, tol).q
    return vec


@dataclass(frozen=True)
class T1Result:
    value: float
    converged: bool
    levels: int


def expected_t1(env: Environment, tol: float = DEFAULT_TOL,
                max_levels: int = DEFAULT_MAX_LEVELS) -> T1Result:
    """Mean ladder time 1 + sum_{i<=0} E[U_i] . TIME_WEIGHTS.

    Homogeneous environments use the closed form of the geometric matrix
    series (exact up to the linear solve), since plain truncation converges
    too slowly near zero drift.  Otherwise terms are accumulated level by
    level until one falls below tol; fifty consecutive non-decreasing terms
    raise Diverging.
    """
    u1 = immigration_law(env, tol).as_vector()
    w = TIME_WEIGHTS.astype(float)
    if env.kind == "homogeneous":
        q = level_mean_matrix(env, 0, tol).q
        if np.max(np.abs(np.linalg.eigvals(q))) >= 1.0 - 1e-12:
            raise Diverging("mean-matrix spectral radius is not below 1")
        total = 1.0 + u1 @ q @ np.linalg.solve(np.eye(9) - q, w)
        return T1Result(value=float(total), converged=True, levels=0)

    total = 1.0
    vec = u1
    prev_term = math.inf
    rising = 0
    for count in range(1, max_levels + 1):
        i = 1 - count
        vec = vec @ level_mean_matrix(env, i, tol).q
        term = float(vec @ w)
        total += term
        if term >= prev_term:
            rising += 1
            if rising >= _DIVERGENCE_RUN:
                raise Diverging(
                    f"{_DIVERGENCE_RUN} consecutive non-decreasing level "
                    f"terms (last {term!r})")
        else:
            rising = 0
        prev_term = term
        if term < tol:
            return T1Result(value=total, converged=True, levels=count)
    return T1Result(value=total, converged=False, levels=max_levels)

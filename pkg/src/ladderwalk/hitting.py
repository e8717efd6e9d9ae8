"""Transfer-matrix exit probabilities and their deep-interval limits.

The boundary values P_{b-1}(.), P_{b-2}(.) come from a 2x2 linear system whose
coefficients are sums of products of 3x3 step-matrix chains.  Evaluated
naively those sums share a common dominant growth mode that cancels in every
numerator and denominator, destroying precision past modest depths.  Two
complementary evaluation strategies are used:

* narrow intervals (width <= 40): site laws are dyadic rationals, so the
  whole table — boundary solve and interior back-substitution — is computed
  in exact big-integer arithmetic over a common denominator and rounded once
  at the end.  This is what the linear-solve oracle is compared against.

* wide intervals: the post-cancellation quantities are accumulated directly.
  Each term of a Cramer numerator/denominator is a product of a
  forward-propagated row vector and a 2x2 minor of the backward chain, the
  minors being propagated with the second compound matrix (minors of a
  product are products of minor matrices).  All chains carry a power-of-two
  scale exponent so arbitrary depths neither overflow nor underflow.  This
  yields boundary starts to near machine precision at any depth; interior
  starts fall back to the summed recursion, whose accuracy degrades with
  depth (they are not consumed at depth — see hit_from_below).

Deep-limit hitting probabilities with a start far below the threshold are
composed from per-level boundary pairs by the strong Markov property rather
than read off one huge table, so no deep interior value is ever needed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .environment import DEFAULT_ADMISSIBILITY_FLOOR, Environment, SiteLaw, local_drift
from .errors import DegenerateSystem, DriftNegative, NotAdmissible, NotConverged

PROB_SLACK = 1e-10
EXACT_WIDTH_LIMIT = 40
DEGENERACY_TOL = 1e-13

# determinant patterns d_S(x, y) over column pairs S = (1,2), (1,3), (2,3)
# for the vectors u = e1, q = e1-e2, c = e2-e3, cc = e3 appearing in the
# boundary formulas.
_D_CU = np.array([-1.0, 1.0, 0.0])    # (c, u)
_D_QU = np.array([1.0, 0.0, 0.0])     # (q, u)
_D_CCU = np.array([0.0, -1.0, 0.0])   # (cc, u)
_D_CQ = np.array([-1.0, 1.0, -1.0])   # (c, q)
_D_CCQ = np.array([0.0, -1.0, 1.0])   # (cc, q)


def build_step_matrix(law: SiteLaw,
                      floor: float = DEFAULT_ADMISSIBILITY_FLOOR) -> np.ndarray:
    """3x3 companion-form matrix propagating boundary-probability differences."""
    if not law.is_admissible(floor):
        raise NotAdmissible(f"q2 = {law.q2!r} below ellipticity floor {floor!r}")
    q2 = law.q2
    return np.array([
        [-(law.q1 + q2) / q2, (law.p1 + law.p2) / q2, law.p2 / q2],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
    ])


def _second_compound(m: np.ndarray) -> np.ndarray:
    """Matrix of 2x2 minors over ordered row/column pairs (1,2), (1,3), (2,3)."""
    a, b, c = m[0]
    # rows 2 and 3 of a step matrix are the fixed unit patterns
    return np.array([
        [-b, -c, 0.0],
        [a, 0.0, -c],
        [1.0, 0.0, 0.0],
    ])


def _renorm(mat: np.ndarray, exp: int) -> tuple[np.ndarray, int]:
    peak = np.max(np.abs(mat))
    if peak == 0.0 or not np.isfinite(peak):
        return mat, exp
    _, e = math.frexp(peak)
    if e:
        mat = np.ldexp(mat, -e)
    return mat, exp + e


class _ScaledSum:
    """Accumulates terms (mantissa, exp2) representing mantissa * 2**exp2."""

    __slots__ = ("m", "e", "peak")

    def __init__(self):
        self.m = 0.0
        self.e = 0
        self.peak = -math.inf  # log2 of the largest |term| seen

    def add(self, v: float, e: int):
        if v == 0.0:
            return
        self.peak = max(self.peak, math.log2(abs(v)) + e)
        if self.m == 0.0:
            self.m, self.e = v, e
        elif e >= self.e:
            self.m = math.ldexp(self.m, self.e - e) + v
            self.e = e
        else:
            self.m += math.ldexp(v, e - self.e)
        am = abs(self.m)
        if am != 0.0 and (am > 2.0**512 or am < 2.0**-512):
            _, k = math.frexp(am)
            self.m = math.ldexp(self.m, -k)
            self.e += k

    @property
    def log2(self) -> float:
        return math.log2(abs(self.m)) + self.e if self.m else -math.inf


def _clamp_prob(x: float, what: str) -> float:
    if not np.isfinite(x) or x < -PROB_SLACK or x > 1.0 + PROB_SLACK:
        raise DegenerateSystem(f"{what} = {x!r} outside [0,1] beyond slack")
    return min(max(x, 0.0), 1.0)


@dataclass
class ExitProbTable:
    """Exit probabilities from the interval [a+1, b-1] to b and b+1.

    prob(start, target) answers P_start(exit at target) for start inside
    the interval and target in {b, b+1}.
    """

    a: int
    b: int
    p_b1_b: float        # P_{b-1}(b)
    p_b2_b: float        # P_{b-2}(b)
    p_b1_b1: float       # P_{b-1}(b+1)
    p_b2_b1: float       # P_{b-2}(b+1)
    exact: bool = False
    _w: list = field(repr=False, default_factory=list)  # per-site (w1, wq, wc, wcc, exp)
    _interior: dict = field(repr=False, default_factory=dict)

    @property
    def width(self) -> int:
        return self.b - self.a - 1

    def prob(self, start: int, target: int) -> float:
        if target not in (self.b, self.b + 1):
            raise ValueError("target must be b or b+1")
        up = target == self.b
        if start == self.b - 1:
            return self.p_b1_b if up else self.p_b1_b1
        if start == self.b - 2:
            return self.p_b2_b if up else self.p_b2_b1
        if not (self.a + 1 <= start <= self.b - 3):
            raise ValueError(f"start {start} outside [{self.a + 1}, {self.b - 1}]")
        if start not in self._interior:
            self._fill_interior(start)
        return self._interior[start][0 if up else 1]

    def _fill_interior(self, start: int):
        # P_k(z) = P_{b-2}(z) (1 + S1) - P_{b-1}(z) Sq - Sc(z), sums over
        # l = k+2 .. b-1; self._w[j] holds site a+1+j.
        s1, sq, sc, scc = _ScaledSum(), _ScaledSum(), _ScaledSum(), _ScaledSum()
        for l in range(start + 2, self.b):
            w1, wq, wc, wcc, e = self._w[l - (self.a + 1)]
            s1.add(w1, e)
            sq.add(wq, e)
            sc.add(wc, e)
            scc.add(wcc, e)
        v1 = math.ldexp(s1.m, s1.e)
        vq = math.ldexp(sq.m, sq.e)
        pk_b = self.p_b2_b * (1.0 + v1) - self.p_b1_b * vq - math.ldexp(sc.m, sc.e)
        pk_b1 = (self.p_b2_b1 * (1.0 + v1) - self.p_b1_b1 * vq
                 - math.ldexp(scc.m, scc.e))
        self._interior[start] = (
            _clamp_prob(pk_b, f"P_{start}({self.b})"),
            _clamp_prob(pk_b1, f"P_{start}({self.b + 1})"),
        )

    def starts(self) -> range:
        return range(self.a + 1, self.b)

    def check_monotone(self, tol: float = 1e-9) -> None:
        """Soft check: P_k(b) + P_k(b+1) nondecreasing in k on the interior."""
        prev = None
        for k in self.starts():
            s = self.prob(k, self.b) + self.prob(k, self.b + 1)
            if prev is not None and s < prev - tol:
                warnings.warn(
                    f"exit mass not monotone at start {k}: {s} < {prev}",
                    RuntimeWarning, stacklevel=2)
            prev = s


def _exact_table(laws: list, a: int, b: int) -> ExitProbTable:
    """Whole exit table in exact dyadic-rational (big integer) arithmetic."""
    n = len(laws)
    rows = []   # integer first rows of the scaled step matrices
    qts = []    # matching integer denominators (scaled q2)
    for law in laws:
        fa = -(Fraction(law.q1) + Fraction(law.q2))
        fb = Fraction(law.p1) + Fraction(law.p2)
        fc = Fraction(law.p2)
        fq = Fraction(law.q2)
        den = max(f.denominator for f in (fa, fb, fc, fq))
        vals = [int(f * den) for f in (fa, fb, fc, fq)]
        rows.append(vals[:3])
        qts.append(vals[3])

    # backward integer chain G_l = Bt_l ... Bt_{b-1}; keep first rows
    g = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    first_rows: list = [None] * n
    for j in range(n - 1, -1, -1):
        ra, rb, rc = rows[j]
        qt = qts[j]
        top = [ra * g[0][0] + rb * g[1][0] + rc * g[2][0],
               ra * g[0][1] + rb * g[1][1] + rc * g[2][1],
               ra * g[0][2] + rb * g[1][2] + rc * g[2][2]]
        g = [top, [qt * v for v in g[0]], [qt * v for v in g[1]]]
        first_rows[j] = top

    # weights over the common denominator Q = prod qts:
    # W_x(l) * Q = (first row of G_l) . x * prod_{m < l} qt_m
    pref = 1
    w1 = [0] * n
    wq = [0] * n
    wc = [0] * n
    wcc = [0] * n
    for j in range(n):
        r0, r1, r2 = first_rows[j]
        w1[j] = r0 * pref
        wq[j] = (r0 - r1) * pref
        wc[j] = (r1 - r2) * pref
        wcc[j] = r2 * pref
        pref *= qts[j]
    q_all = pref

    s1 = sum(w1[1:])
    sq = sum(wq[1:])
    sc = sum(wc[1:])
    scc = sum(wcc[1:])

    det = -wq[0] * (q_all + s1) + w1[0] * sq
    if det == 0:
        raise DegenerateSystem("boundary system exactly singular")
    p1b = Fraction(wc[0] * (q_all + s1) - w1[0] * sc, det)
    p2b = Fraction(wc[0] * sq - wq[0] * sc, det)
    p1b1 = Fraction(wcc[0] * (q_all + s1) - w1[0] * scc, det)
    p2b1 = Fraction(wcc[0] * sq - wq[0] * scc, det)

    table = ExitProbTable(
        a=a, b=b, exact=True,
        p_b1_b=_clamp_prob(float(p1b), "P_{b-1}(b)"),
        p_b2_b=_clamp_prob(float(p2b), "P_{b-2}(b)"),
        p_b1_b1=_clamp_prob(float(p1b1), "P_{b-1}(b+1)"),
        p_b2_b1=_clamp_prob(float(p2b1), "P_{b-2}(b+1)"),
    )
    # interior starts k = a+1 .. b-3 via exact suffix sums
    t1 = t_q = t_c = t_cc = 0
    for k in range(b - 3, a, -1):
        j = k + 2 - (a + 1)
        t1 += w1[j]
        t_q += wq[j]
        t_c += wc[j]
        t_cc += wcc[j]
        pk_b = (p2b * (q_all + t1) - p1b * t_q - Fraction(t_c)) / q_all
        pk_b1 = (p2b1 * (q_all + t1) - p1b1 * t_q - Fraction(t_cc)) / q_all
        table._interior[k] = (
            _clamp_prob(float(pk_b), f"P_{k}({b})"),
            _clamp_prob(float(pk_b1), f"P_{k}({b + 1})"),
        )
    return table


def _compound_core(rows):
    """Scaled forward/backward sweeps of the compound-matrix accumulation.

    rows is the (n, 3) array of step-matrix top rows (A, B, C) per site
    a+1 .. b-1.  Returns per-site weight rows (w1, wq, wc, wcc) with a shared
    power-of-two exponent per site, and the five pair-determinant sums as
    (mantissa, exponent, log2-peak-term) triples in the fixed order
    (c,u), (q,u), (cc,u), (c,q), (cc,q).

    The step matrix is companion-form, so every matrix product is a row
    shift plus one fresh row; second-compound products shift the same way.
    """
    n = rows.shape[0]

    # forward pass: components 2 and 3 of r(l) = e1 * M_{a+1} ... M_{l-1}
    r2s = np.empty(n)
    r3s = np.empty(n)
    res = np.zeros(n, dtype=np.int64)
    r0, r1, r2 = 1.0, 0.0, 0.0
    re = 0
    for j in range(n):
        r2s[j] = r1
        r3s[j] = r2
        res[j] = re
        if j < n - 1:
            a_, b_, c_ = rows[j, 0], rows[j, 1], rows[j, 2]
            r0, r1, r2 = r0 * a_ + r1, r0 * b_ + r2, r0 * c_
            peak = max(abs(r0), abs(r1), abs(r2))
            if peak > 2.0**500 or 0.0 < peak < 2.0**-500:
                _, k = math.frexp(peak)
                r0 = math.ldexp(r0, -k)
                r1 = math.ldexp(r1, -k)
                r2 = math.ldexp(r2, -k)
                re += k

    # backward pass: G = M_l ... M_{b-1} and its second compound
    w = np.empty((n, 4))
    wexp = np.zeros(n, dtype=np.int64)
    g = np.eye(3)
    ge = 0
    c2 = np.eye(3)
    ce = 0
    sm = np.zeros(5)
    se = np.zeros(5, dtype=np.int64)
    speak = np.full(5, -np.inf)
    term = np.empty(5)
    for j in range(n - 1, -1, -1):
        a_, b_, c_ = rows[j, 0], rows[j, 1], rows[j, 2]
        for col in range(3):
            top = a_ * g[0, col] + b_ * g[1, col] + c_ * g[2, col]
            g[2, col] = g[1, col]
            g[1, col] = g[0, col]
            g[0, col] = top
        peak = max(abs(g[0, 0]), abs(g[0, 1]), abs(g[0, 2]),
                   abs(g[1, 0]), abs(g[1, 1]), abs(g[1, 2]))
        if peak > 2.0**500 or 0.0 < peak < 2.0**-500:
            _, k = math.frexp(peak)
            for row in range(3):
                for col in range(3):
                    g[row, col] = math.ldexp(g[row, col], -k)
            ge += k
        for col in range(3):
            t0 = -b_ * c2[0, col] - c_ * c2[1, col]
            t1 = a_ * c2[0, col] - c_ * c2[2, col]
            c2[2, col] = c2[0, col]
            c2[0, col] = t0
            c2[1, col] = t1
        peak = max(abs(c2[0, 0]), abs(c2[0, 1]), abs(c2[0, 2]),
                   abs(c2[1, 0]), abs(c2[1, 1]), abs(c2[1, 2]))
        if peak > 2.0**500 or 0.0 < peak < 2.0**-500:
            _, k = math.frexp(peak)
            for row in range(3):
                for col in range(3):
                    c2[row, col] = math.ldexp(c2[row, col], -k)
            ce += k
        w[j, 0] = g[0, 0]
        w[j, 1] = g[0, 0] - g[0, 1]
        w[j, 2] = g[0, 1] - g[0, 2]
        w[j, 3] = g[0, 2]
        wexp[j] = ge
        if j > 0:
            rr2 = r2s[j]
            rr3 = r3s[j]
            te = res[j] + ce
            # dot products of compound rows (1,2), (1,3) with the d patterns
            term[0] = -(rr2 * (-c2[0, 0] + c2[0, 1])
                        + rr3 * (-c2[1, 0] + c2[1, 1]))          # (c, u)
            term[1] = -(rr2 * c2[0, 0] + rr3 * c2[1, 0])         # (q, u)
            term[2] = -(rr2 * (-c2[0, 1]) + rr3 * (-c2[1, 1]))   # (cc, u)
            term[3] = -(rr2 * (-c2[0, 0] + c2[0, 1] - c2[0, 2])
                        + rr3 * (-c2[1, 0] + c2[1, 1] - c2[1, 2]))  # (c, q)
            term[4] = -(rr2 * (-c2[0, 1] + c2[0, 2])
                        + rr3 * (-c2[1, 1] + c2[1, 2]))          # (cc, q)
            for t in range(5):
                v = term[t]
                if v == 0.0:
                    continue
                lg = math.log(abs(v)) * 1.4426950408889634 + te
                if lg > speak[t]:
                    speak[t] = lg
                if sm[t] == 0.0:
                    sm[t] = v
                    se[t] = te
                elif te >= se[t]:
                    sm[t] = math.ldexp(sm[t], int(se[t] - te)) + v
                    se[t] = te
                else:
                    sm[t] += math.ldexp(v, int(te - se[t]))
                am = abs(sm[t])
                if am > 2.0**500 or 0.0 < am < 2.0**-500:
                    _, k = math.frexp(am)
                    sm[t] = math.ldexp(sm[t], -k)
                    se[t] += k
    return w, wexp, sm, se, speak


try:  # pragma: no cover - exercised indirectly
    from numba import njit as _njit

    _compound_core_jit = _njit(cache=True)(_compound_core)
except ImportError:  # pragma: no cover
    _compound_core_jit = _compound_core


def _compound_table(rows: np.ndarray, a: int, b: int) -> ExitProbTable:
    """Boundary starts via scaled compound-matrix accumulation (any depth)."""
    w, wexp, sm, se, speak = _compound_core_jit(rows)
    w_list = [(w[j, 0], w[j, 1], w[j, 2], w[j, 3], int(wexp[j]))
              for j in range(rows.shape[0])]
    w1a, wqa, wca, wcca, ea = w_list[0]
    s_cu, s_qu, s_ccu, s_cq, s_ccq = (
        (sm[t], int(se[t]), speak[t]) for t in range(5))

    den = _ScaledSum()
    den.add(-wqa, ea)
    den.add(-s_qu[0], s_qu[1])
    peak = max(s_qu[2], math.log2(abs(wqa)) + ea if wqa else -math.inf)
    if den.m == 0.0 or den.log2 < peak + math.log2(DEGENERACY_TOL):
        raise DegenerateSystem("boundary system singular beyond tolerance")

    num_b = _ScaledSum()
    num_b.add(wca, ea)
    num_b.add(s_cu[0], s_cu[1])
    num_b1 = _ScaledSum()
    num_b1.add(wcca, ea)
    num_b1.add(s_ccu[0], s_ccu[1])
    num_2b = _ScaledSum()
    num_2b.add(s_cq[0], s_cq[1])
    num_2b1 = _ScaledSum()
    num_2b1.add(s_ccq[0], s_ccq[1])

    def ratio(num: _ScaledSum) -> float:
        if num.m == 0.0:
            return 0.0
        return math.ldexp(num.m / den.m, num.e - den.e)

    return ExitProbTable(
        a=a, b=b,
        p_b1_b=_clamp_prob(ratio(num_b), "P_{b-1}(b)"),
        p_b1_b1=_clamp_prob(ratio(num_b1), "P_{b-1}(b+1)"),
        p_b2_b=_clamp_prob(ratio(num_2b), "P_{b-2}(b)"),
        p_b2_b1=_clamp_prob(ratio(num_2b1), "P_{b-2}(b+1)"),
        _w=w_list,
    )


def exit_probabilities(env: Environment, a: int, b: int,
                       floor: float = DEFAULT_ADMISSIBILITY_FLOOR) -> ExitProbTable:
    """Exit probabilities of the walk from [a+1, b-1] at b and b+1."""
    if a + 2 > b:
        raise ValueError("need a + 2 <= b")
    if b - a - 1 <= EXACT_WIDTH_LIMIT:
        laws = [env.law_at(i) for i in range(a + 1, b)]
        for law in laws:
            if not law.is_admissible(floor):
                raise NotAdmissible(
                    f"q2 = {law.q2!r} below ellipticity floor {floor!r}")
        return _exact_table(laws, a, b)
    arr = env.materialize(a + 1, b - 1)  # columns q2, q1, p1, p2
    q2, q1, p1, p2 = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    if np.min(q2) < floor:
        raise NotAdmissible(
            f"q2 = {np.min(q2)!r} below ellipticity floor {floor!r}")
    rows = np.column_stack([-(q1 + q2) / q2, (p1 + p2) / q2, p2 / q2])
    return _compound_table(rows, a, b)


@dataclass(frozen=True)
class HitProfile:
    """Probabilities of first entering (i, inf) at i+1 (f1) and i+2 (f2)."""

    start: int
    threshold: int
    f1: float
    f2: float
    depth: int
    converged: bool


def _deep_pair(env: Environment, m: int, start_offset: int, tol: float,
               max_depth: int, floor: float) -> tuple[float, float, int]:
    """Deep-interval limit of the boundary pair at threshold m.

    start_offset 1 gives f_m(m, .) (start b-1 of the table with b = m+1),
    start_offset 2 gives f_{m-1}(m, .) (start b-2).  Depth is doubled from 16
    until two consecutive values agree within tol.  Results are memoized on
    the environment (keyed by its per-site cache key), so homogeneous and
    periodic environments pay for each distinct level once.
    """
    cache = env.module_cache("hitting")
    key = ("pair", env.cache_key(m), start_offset, tol, floor)
    got = cache.get(key)
    if got is not None:
        return got
    b = m + 1
    depth = 16
    prev = None
    cur = None
    while depth <= max_depth:
        a = b - 1 - depth
        table = exit_probabilities(env, a, b, floor)
        cur = (table.p_b1_b, table.p_b1_b1, table.p_b2_b, table.p_b2_b1)
        if max(cur[0] + cur[1], cur[2] + cur[3]) > 1.0 + PROB_SLACK:
            raise DegenerateSystem("f1 + f2 exceeds 1 beyond slack")
        if prev is not None and all(abs(c - p) < tol
                                    for c, p in zip(cur, prev)):
            # one doubling run settles both start offsets; cache each
            for off, (f1, f2) in ((1, cur[:2]), (2, cur[2:])):
                cache[("pair", env.cache_key(m), off, tol, floor)] = (
                    f1, f2, depth)
            if start_offset == 1:
                return cur[0], cur[1], depth
            return cur[2], cur[3], depth
        prev = cur
        depth *= 2
    raise NotConverged(
        f"deep boundary pair at level {m} did not stabilize by depth "
        f"{max_depth}", last=cur, previous=prev)


def hit_from_below(env: Environment, k: int, i: int, tol: float = 1e-12,
                   max_depth: int = 2 ** 20,
                   floor: float = DEFAULT_ADMISSIBILITY_FLOOR) -> HitProfile:
    """f_k(i, i+1), f_k(i, i+2): first entrance of (i, inf) from k <= i with
    the interval unbounded below.

    Each level's boundary pair is resolved by depth doubling; a start below
    i-1 is handled by chaining the per-level pairs with the strong Markov
    property (entering (m, inf) at m+2 already settles level m+1).
    """
    if k > i:
        raise ValueError("need start k <= threshold i")
    if k == i:
        f1, f2, depth = _deep_pair(env, i, 1, tol, max_depth, floor)
        return HitProfile(k, i, f1, f2, depth, True)
    if k == i - 1:
        f1, f2, depth = _deep_pair(env, i, 2, tol, max_depth, floor)
        return HitProfile(k, i, f1, f2, depth, True)
    v1, v2, depth = _deep_pair(env, k, 1, tol, max_depth, floor)
    for m in range(k + 1, i + 1):
        p1, p2, d = _deep_pair(env, m, 1, tol, max_depth, floor)
        depth = max(depth, d)
        v1, v2 = v1 * p1 + v2, v1 * p2
    return HitProfile(k, i, v1, v2, depth, True)


def homogeneous_root(law: SiteLaw,
                     floor: float = DEFAULT_ADMISSIBILITY_FLOOR) -> tuple[float, bool]:
    """Root h in (-1, 0) of the cubic characteristic polynomial of the
    homogeneous step matrix, plus whether the two remaining roots have
    modulus >= 1.

    The exit law of the ladder step is (1+h, -h), so E[X_T1] = 1 - h.
    """
    if not law.is_admissible(floor):
        raise NotAdmissible(f"q2 = {law.q2!r} below ellipticity floor")
    if local_drift(law) < 0.0:
        raise DriftNegative(f"local drift {local_drift(law)!r} is negative")
    q2 = law.q2
    ca = (law.q1 + q2) / q2
    cb = -(law.p1 + law.p2) / q2
    cc = -law.p2 / q2

    def f(x: float) -> float:
        return ((x + ca) * x + cb) * x + cc

    lo, hi = -1.0, 0.0
    if f(hi) == 0.0:  # p2 == 0 degenerate limit
        h = 0.0
    else:
        # f(-1) > 0 > f(0) under admissibility and nonnegative drift
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14:
                break
        h = 0.5 * (lo + hi)
    # deflate: x^3 + ca x^2 + cb x + cc = (x - h)(x^2 + (ca + h) x - cc / h)
    if h == 0.0:
        g_abs_ge_1 = True
    else:
        rest = np.roots([1.0, ca + h, -cc / h])
        g_abs_ge_1 = bool(np.all(np.abs(rest) >= 1.0 - 1e-9))
    return h, g_abs_ge_1

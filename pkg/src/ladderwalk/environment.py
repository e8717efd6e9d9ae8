"""Site laws and environments for the (2-2) bounded-jump walk on Z.

A site law assigns probabilities to the four jumps (-2, -1, +1, +2).  An
environment is a total assignment of site laws to integer sites; it may be
homogeneous, periodic, explicit over a finite window (with a default law
outside), or i.i.d. with per-site draws from an environment law.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass

import numpy as np

from .errors import InvalidLaw

SUM_TOL = 1e-12
DEFAULT_ADMISSIBILITY_FLOOR = 1e-12
DEFAULT_CLAMP_MARGIN = 1e-6

_IID_BLOCK = 4096


@dataclass(frozen=True)
class SiteLaw:
    """Jump probabilities at one site: q2 -> -2, q1 -> -1, p1 -> +1, p2 -> +2."""

    q2: float
    q1: float
    p1: float
    p2: float

    def __post_init__(self):
        vals = (self.q2, self.q1, self.p1, self.p2)
        if any(v < 0.0 for v in vals):
            raise InvalidLaw(f"negative jump probability in {vals}")
        total = self.q2 + self.q1 + self.p1 + self.p2
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidLaw(f"jump probabilities sum to {total!r}, not 1")

    def is_admissible(self, floor: float = DEFAULT_ADMISSIBILITY_FLOOR) -> bool:
        """Whether the transfer-matrix construction applies (q2 bounded away from 0)."""
        return self.q2 >= floor

    def as_array(self) -> np.ndarray:
        """Probabilities ordered by jump size (-2, -1, +1, +2)."""
        return np.array([self.q2, self.q1, self.p1, self.p2])

    def to_dict(self) -> dict:
        return {"q2": self.q2, "q1": self.q1, "p1": self.p1, "p2": self.p2}

    @classmethod
    def from_dict(cls, d: dict) -> "SiteLaw":
        extra = set(d) - {"q2", "q1", "p1", "p2"}
        if extra:
            raise InvalidLaw(f"unknown site-law fields: {sorted(extra)}")
        return cls(float(d["q2"]), float(d["q1"]), float(d["p1"]), float(d["p2"]))


def local_drift(law: SiteLaw) -> float:
    """Mean one-step displacement p1 + 2*p2 - q1 - 2*q2."""
    return law.p1 + 2.0 * law.p2 - law.q1 - 2.0 * law.q2


def _laws_from_array(arr: np.ndarray) -> list[SiteLaw]:
    return [SiteLaw(float(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in arr]


@dataclass(frozen=True)
class EnvLaw:
    """Distribution over site laws: point mass, clamped Dirichlet, or a finite
    mixture of point masses.

    Dirichlet concentration parameters follow the (q2, q1, p1, p2) order.
    Samples are clamped a margin away from the simplex boundary and
    renormalized, which keeps every draw matrix-admissible.
    """

    kind: str
    law: SiteLaw | None = None
    alpha: tuple | None = None
    margin: float = DEFAULT_CLAMP_MARGIN
    laws: tuple | None = None
    weights: tuple | None = None

    def __post_init__(self):
        if self.kind == "point_mass":
            if self.law is None:
                raise InvalidLaw("point_mass EnvLaw needs a law")
        elif self.kind == "dirichlet":
            if self.alpha is None or len(self.alpha) != 4:
                raise InvalidLaw("dirichlet EnvLaw needs 4 concentration parameters")
            if any(a <= 0 for a in self.alpha):
                raise InvalidLaw("dirichlet concentrations must be positive")
            if not (0 < self.margin < 0.25):
                raise InvalidLaw("clamp margin must lie in (0, 0.25)")
        elif self.kind == "mixture":
            if not self.laws or not self.weights or len(self.laws) != len(self.weights):
                raise InvalidLaw("mixture EnvLaw needs matching laws and weights")
            if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
                raise InvalidLaw("mixture weights must be a probability vector")
        else:
            raise InvalidLaw(f"unknown EnvLaw kind {self.kind!r}")

    def sample_block(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n site laws as an (n, 4) array in (q2, q1, p1, p2) order."""
        if self.kind == "point_mass":
            return np.tile(self.law.as_array(), (n, 1))
        if self.kind == "dirichlet":
            x = rng.dirichlet(np.asarray(self.alpha, dtype=float), size=n)
            x = np.clip(x, self.margin, None)
            x /= x.sum(axis=1, keepdims=True)
            return x
        # mixture of point masses
        table = np.stack([l.as_array() for l in self.laws])
        idx = rng.choice(len(self.laws), size=n, p=np.asarray(self.weights))
        return table[idx]

    @classmethod
    def from_dict(cls, d: dict) -> "EnvLaw":
        known = {"kind", "law", "alpha", "margin", "laws", "weights"}
        extra = set(d) - known
        if extra:
            raise InvalidLaw(f"unknown EnvLaw fields: {sorted(extra)}")
        kind = d.get("kind")
        return cls(
            kind=kind,
            law=SiteLaw.from_dict(d["law"]) if "law" in d else None,
            alpha=tuple(d["alpha"]) if "alpha" in d else None,
            margin=float(d.get("margin", DEFAULT_CLAMP_MARGIN)),
            laws=tuple(SiteLaw.from_dict(x) for x in d["laws"]) if "laws" in d else None,
            weights=tuple(float(w) for w in d["weights"]) if "weights" in d else None,
        )


class Environment:
    """Total map from integer sites to SiteLaws.

    Immutable after construction.  ``shift(k)`` returns a view satisfying
    ``view.law_at(i) == self.law_at(i + k)``; views share the base caches so
    shifted computations follow the exact same arithmetic path.
    """

    def __init__(self, kind, *, laws=None, period=None, lo=None, hi=None,
                 default=None, env_law=None, seed=None, _offset=0, _shared=None):
        self.kind = kind
        self._laws = laws
        self._period = period
        self._lo = lo
        self._hi = hi
        self._default = default
        self.env_law = env_law
        self.seed = seed
        self._offset = _offset
        if _shared is None:
            _shared = {"blocks": {}, "lock": threading.Lock(), "modules": {}}
        self._shared = _shared

    # -- constructors -------------------------------------------------------

    @classmethod
    def homogeneous(cls, law: SiteLaw) -> "Environment":
        return cls("homogeneous", laws=(law,))

    @classmethod
    def periodic(cls, laws) -> "Environment":
        laws = tuple(laws)
        if not laws:
            raise InvalidLaw("periodic environment needs at least one law")
        return cls("periodic", laws=laws, period=len(laws))

    @classmethod
    def explicit(cls, lo: int, laws, default: SiteLaw) -> "Environment":
        laws = tuple(laws)
        if not laws:
            raise InvalidLaw("explicit environment needs at least one law")
        return cls("explicit", laws=laws, lo=lo, hi=lo + len(laws) - 1, default=default)

    @classmethod
    def iid(cls, env_law: EnvLaw, seed: int) -> "Environment":
        return cls("iid", env_law=env_law, seed=int(seed))

    # -- site access --------------------------------------------------------

    def _iid_block(self, block: int) -> np.ndarray:
        blocks = self._shared["blocks"]
        got = blocks.get(block)
        if got is None:
            with self._shared["lock"]:
                got = blocks.get(block)
                if got is None:
                    rng = np.random.default_rng(np.random.SeedSequence((self.seed, block & 0xFFFFFFFF, block >> 32 & 0xFFFFFFFF)))
                    got = self.env_law.sample_block(rng, _IID_BLOCK)
                    got.setflags(write=False)
                    blocks[block] = got
        return got

    def law_at(self, i: int) -> SiteLaw:
        j = i + self._offset
        if self.kind == "homogeneous":
            return self._laws[0]
        if self.kind == "periodic":
            return self._laws[j % self._period]
        if self.kind == "explicit":
            if self._lo <= j <= self._hi:
                return self._laws[j - self._lo]
            return self._default
        block, off = divmod(j, _IID_BLOCK)
        row = self._iid_block(block)[off]
        return SiteLaw(float(row[0]), float(row[1]), float(row[2]), float(row[3]))

    def materialize(self, lo: int, hi: int) -> np.ndarray:
        """Site laws for lo..hi inclusive as an (hi-lo+1, 4) array."""
        n = hi - lo + 1
        if n <= 0:
            raise ValueError("empty site range")
        if self.kind == "iid":
            out = np.empty((n, 4))
            j0 = lo + self._offset
            for k in range(n):
                j = j0 + k
                block, off = divmod(j, _IID_BLOCK)
                out[k] = self._iid_block(block)[off]
            return out
        if self.kind == "homogeneous":
            return np.tile(self._laws[0].as_array(), (n, 1))
        if self.kind == "periodic":
            base = np.stack([law.as_array() for law in self._laws])
            idx = np.arange(lo + self._offset, hi + self._offset + 1)
            return base[idx % self._period]
        return np.stack([self.law_at(i).as_array() for i in range(lo, hi + 1)])

    # -- structure ----------------------------------------------------------

    def shift(self, k: int) -> "Environment":
        """Environment with law_at(i) = self.law_at(i + k)."""
        if k == 0:
            return self
        return Environment(
            self.kind, laws=self._laws, period=self._period, lo=self._lo,
            hi=self._hi, default=self._default, env_law=self.env_law,
            seed=self.seed, _offset=self._offset + k, _shared=self._shared,
        )

    def cache_key(self, i: int):
        """Canonical key for per-level memoization, shared across shifts.

        Homogeneous environments collapse to one key, periodic ones to the
        residue class; otherwise the absolute base index is the key.
        """
        j = i + self._offset
        if self.kind == "homogeneous":
            return ("H",)
        if self.kind == "periodic":
            return ("P", j % self._period)
        return ("I", j)

    def module_cache(self, name: str) -> dict:
        caches = self._shared["modules"]
        got = caches.get(name)
        if got is None:
            with self._shared["lock"]:
                got = caches.setdefault(name, {})
        return got

    def admissible_on(self, lo: int, hi: int,
                      floor: float = DEFAULT_ADMISSIBILITY_FLOOR) -> bool:
        if self.kind == "homogeneous":
            return self._laws[0].is_admissible(floor)
        if self.kind == "periodic":
            return all(l.is_admissible(floor) for l in self._laws)
        return all(self.law_at(i).is_admissible(floor) for i in range(lo, hi + 1))

    # -- serialization ------------------------------------------------------

    _JSON_FIELDS = {"kind", "laws", "period", "range", "default", "seed",
                    "dirichlet_alpha", "margin"}

    def to_dict(self) -> dict:
        if self._offset != 0:
            raise ValueError("serialize the unshifted base environment")
        if self.kind == "homogeneous":
            return {"kind": "homogeneous", "laws": [self._laws[0].to_dict()]}
        if self.kind == "periodic":
            return {"kind": "periodic", "period": self._period,
                    "laws": [l.to_dict() for l in self._laws]}
        if self.kind == "explicit":
            return {"kind": "explicit", "range": [self._lo, self._hi],
                    "laws": [l.to_dict() for l in self._laws],
                    "default": self._default.to_dict()}
        out = {"kind": "iid", "seed": self.seed}
        if self.env_law.kind == "dirichlet":
            out["dirichlet_alpha"] = list(self.env_law.alpha)
            out["margin"] = self.env_law.margin
        else:
            raise ValueError("only dirichlet iid environments serialize to JSON")
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Environment":
        extra = set(d) - cls._JSON_FIELDS
        if extra:
            raise InvalidLaw(f"unknown environment fields: {sorted(extra)}")
        kind = d.get("kind")
        if kind == "homogeneous":
            return cls.homogeneous(SiteLaw.from_dict(d["laws"][0]))
        if kind == "periodic":
            laws = [SiteLaw.from_dict(x) for x in d["laws"]]
            if "period" in d and int(d["period"]) != len(laws):
                raise InvalidLaw("period does not match number of laws")
            return cls.periodic(laws)
        if kind == "explicit":
            lo, hi = (int(x) for x in d["range"])
            laws = [SiteLaw.from_dict(x) for x in d["laws"]]
            if hi - lo + 1 != len(laws):
                raise InvalidLaw("range does not match number of laws")
            return cls.explicit(lo, laws, SiteLaw.from_dict(d["default"]))
        if kind == "iid":
            env_law = EnvLaw(
                "dirichlet",
                alpha=tuple(float(a) for a in d["dirichlet_alpha"]),
                margin=float(d.get("margin", DEFAULT_CLAMP_MARGIN)),
            )
            return cls.iid(env_law, int(d["seed"]))
        raise InvalidLaw(f"unknown environment kind {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "Environment":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def shift(env: Environment, k: int) -> Environment:
    """Shifted view: shift(env, k).law_at(i) == env.law_at(i + k)."""
    return env.shift(k)


def sample_environment(env_law: EnvLaw, site_range: tuple, seed: int) -> Environment:
    """Materialize an environment with independent per-site draws on site_range.

    Deterministic in (env_law, seed).  A point-mass law yields a homogeneous
    environment; otherwise an explicit environment over the range is returned,
    whose default law (used outside the range) is one extra draw.
    """
    lo, hi = int(site_range[0]), int(site_range[1])
    if hi < lo:
        raise ValueError("site_range is empty")
    if env_law.kind == "point_mass":
        return Environment.homogeneous(env_law.law)
    base = Environment.iid(env_law, seed)
    arr = base.materialize(lo, hi)
    default = base.law_at(hi + 1)
    return Environment.explicit(lo, _laws_from_array(arr), default)

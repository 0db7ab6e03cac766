"""Asymptotic geodesicity: near-midpoints, equipartitions and ball absorption.

A metric oracle exposes ``distance(x, y)`` and a vectorized
``distances_from(x, pts)``; Monte Carlo backed oracles also report standard
errors. Deficiencies are multiplicative: an additive defect divided by the
distance between the endpoints.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .average import DistanceMap, mean_distance_map
from .engine import geodesic_waypoint, omega_distance, search
from .errors import EmptySearchRegion, ResourceLimit, ThresholdViolation
from .lattice import CayleyLattice, as_point, graph_distance, word_ball, word_distance_map
from .weights import OmegaField, WeightLaw, law_max, law_mean, law_min, replica_seed

log = logging.getLogger(__name__)

DEFAULT_ALPHA0 = 8.0


# ---------------------------------------------------------------- oracles

class MetricOracle:
    """Base class; subclasses implement ``_offsets`` for invariant metrics."""

    lattice: CayleyLattice
    exact: bool = True
    lower: float = 1.0     # delta >= lower * word distance
    upper: float = 1.0     # delta <= upper * word distance (the conversion constant G)

    def distance(self, x, y) -> float:
        return float(self.distances_from(x, np.atleast_2d(np.asarray(y, dtype=np.int64)))[0])

    def distances_from(self, x, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        return self._offsets(pts - np.asarray(x, dtype=np.int64))

    def errors_from(self, x, pts) -> np.ndarray:
        return np.zeros(len(np.atleast_2d(pts)))

    def _offsets(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class WordMetric(MetricOracle):
    def __init__(self, lattice: CayleyLattice):
        self.lattice = lattice
        self._cache = None

    def _offsets(self, v):
        kind = self.lattice._kind
        if kind == "l1":
            return np.abs(v).sum(axis=1).astype(float)
        if kind == "linf":
            return np.abs(v).max(axis=1).astype(float)
        return np.array([graph_distance((0,) * self.lattice.dim, row, self.lattice)
                         for row in v.tolist()], dtype=float)


class NormMetric(MetricOracle):
    """An exact norm (``l1``, ``l2`` or ``linf``) restricted to Z^d."""

    def __init__(self, norm: str, dim: int, lattice: CayleyLattice | None = None):
        if norm not in ("l1", "l2", "linf"):
            raise ValueError(f"unknown norm {norm!r}")
        self.norm = norm
        self.lattice = lattice or CayleyLattice.standard(dim)
        d = self.lattice.dim
        self.lower = {"l1": 1.0, "l2": 1 / math.sqrt(d), "linf": 1.0 / d}[norm]
        self.upper = 1.0

    def _offsets(self, v):
        p = {"l1": 1, "l2": 2, "linf": np.inf}[self.norm]
        return np.linalg.norm(v.astype(float), ord=p, axis=1)

    @property
    def covering_radius(self) -> float:
        """sup over R^d of the distance to Z^d in this norm."""
        d = self.lattice.dim
        return {"l1": d / 2, "l2": math.sqrt(d) / 2, "linf": 0.5}[self.norm]


class OmegaMetric(MetricOracle):
    """d_omega for one fixed environment (not translation invariant)."""

    def __init__(self, field: OmegaField):
        self.field = field
        self.lattice = field.lattice
        self.lower = law_min(field.law)
        self.upper = law_max(field.law)

    def distances_from(self, x, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        return search(self.field, as_point(x), pts).distance_at(pts)


class AverageMetric(MetricOracle):
    """Monte Carlo d-bar through a symmetrized distance map from the origin."""

    exact = False

    def __init__(self, dmap: DistanceMap, lattice: CayleyLattice, law: WeightLaw | None = None):
        self.dmap = dmap
        self.lattice = lattice
        if law is not None:
            self.lower = law_min(law)
            self.upper = law_mean(law)

    @classmethod
    def estimate(cls, lattice: CayleyLattice, law: WeightLaw, base_seed: int, R: int, radius: int,
                 threads: int | None = None) -> "AverageMetric":
        return cls(mean_distance_map(lattice, law, base_seed, R, radius, threads=threads), lattice, law)

    def _offsets(self, v):
        return self.dmap.lookup(v)

    def errors_from(self, x, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        idx = self.dmap.index()
        v = pts - np.asarray(x, dtype=np.int64)
        return self.dmap.std_error[[idx[tuple(r)] for r in v.tolist()]]


# ------------------------------------------------------------ SAG* queries

@dataclass(frozen=True)
class SagStarResult:
    z: tuple
    eps: float
    total: float
    std_error: float = 0.0

    @property
    def additive(self) -> float:
        return self.eps * self.total


def _round_half_up(v) -> tuple:
    return tuple(int(math.floor(c + 0.5)) for c in v)


def sagstar_deficiency(x, y, lam: float, oracle: MetricOracle, search_radius: int = 3) -> SagStarResult:
    """Best near-lambda-point z in the word ball around the rounded interpolation point.

    Ties resolve to the lexicographically smallest z.
    """
    if search_radius < 0:
        raise EmptySearchRegion("search radius must be nonnegative")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    x, y = as_point(x), as_point(y)
    D = oracle.distance(x, y)
    if D <= 0:
        raise ValueError("endpoints must be at positive distance")
    centre = _round_half_up(np.asarray(x) + lam * (np.asarray(y) - np.asarray(x)))
    cand = word_ball(centre, search_radius, oracle.lattice).points
    dxz = oracle.distances_from(x, cand)
    dzy = oracle.distances_from(y, cand)
    score = np.maximum(np.abs(dxz - lam * D), np.abs(dzy - (1 - lam) * D))
    k = int(np.argmin(score))   # cand is sorted, so the first minimum is the smallest point
    se = 0.0
    if not oracle.exact:
        ex = oracle.errors_from(x, cand[k:k + 1])[0]
        ey = oracle.errors_from(y, cand[k:k + 1])[0]
        se = float(math.hypot(max(ex, ey), lam * oracle.errors_from(x, [y])[0])) / D
    return SagStarResult(tuple(int(c) for c in cand[k]), float(score[k] / D), D, se)


@dataclass
class EmpiricalSagStar:
    """Deficiency of the best geodesic waypoint, estimated on independent replicas."""

    z: tuple
    eps: float
    std_error: float
    mean_total: float
    waypoints: list = field(repr=False, default_factory=list)
    candidates: np.ndarray = field(repr=False, default=None)
    candidate_eps: np.ndarray = field(repr=False, default=None)


def empirical_sagstar_via_geodesics(x, y, lam: float, law: WeightLaw, base_seed: int, R: int,
                                    lattice: CayleyLattice | None = None) -> EmpiricalSagStar:
    """Constructive near-lambda-points for d-bar from omega-geodesics.

    Replicas 0..R-1 each contribute the lambda-waypoint of an omega-geodesic
    from x to y. Every distinct waypoint is then scored on replicas R..2R-1
    (independent of the selection) through paired differences
    d(x,z) - lambda d(x,y) and d(z,y) - (1-lambda) d(x,y).
    """
    x, y = as_point(x), as_point(y)
    lat = lattice or CayleyLattice.standard(len(x))
    way = []
    for i in range(R):
        f = OmegaField(law, replica_seed(base_seed, i), lat)
        _, path = omega_distance(x, y, f)
        way.append(geodesic_waypoint(path, lam))
    cand = np.unique(np.array(way, dtype=np.int64).reshape(-1, lat.dim), axis=0)
    yx = np.array([y], dtype=np.int64)
    a = np.empty((R, len(cand)))
    b = np.empty((R, len(cand)))
    tot = np.empty(R)
    for j in range(R):
        f = OmegaField(law, replica_seed(base_seed, R + j), lat)
        rx = search(f, x, np.vstack([cand, yx]))
        ry = search(f, y, cand)
        dxy = float(rx.distance_at(yx)[0])
        a[j] = rx.distance_at(cand) - lam * dxy
        b[j] = ry.distance_at(cand) - (1 - lam) * dxy
        tot[j] = dxy
    ma, mb = np.abs(a.mean(axis=0)), np.abs(b.mean(axis=0))
    dev = np.maximum(ma, mb)
    k = int(np.argmin(dev))
    se_part = (a if ma[k] >= mb[k] else b)[:, k].std(ddof=1) / math.sqrt(R)
    Dbar = float(tot.mean())
    return EmpiricalSagStar(tuple(int(c) for c in cand[k]), float(dev[k] / Dbar), float(se_part / Dbar),
                            Dbar, way, cand, dev / Dbar)


# ------------------------------------------------------------- subdivisions

@dataclass
class SubdivisionResult:
    points: list
    distances: np.ndarray        # delta(x_i, x_{i+1})
    total: float                 # delta(x, y)
    eps: float
    levels: list = field(default_factory=list)    # (k, r_k, r'_k) for dyadic constructions
    A: float = 1.0
    budget: float = 0.0          # summed additive defects of the SAG* queries used, / (total/m)

    @property
    def parts(self) -> int:
        return len(self.points) - 1

    def recompute_eps(self) -> float:
        return _deficiency(self.distances, self.total)


def _deficiency(steps: np.ndarray, total: float) -> float:
    m = len(steps)
    if total == 0:
        return 0.0
    return float(np.max(np.abs(steps * m / total - 1.0)))


def _steps(points, oracle) -> np.ndarray:
    return np.array([oracle.distance(a, b) for a, b in zip(points[:-1], points[1:])], dtype=float)


def _finish(points, oracle, total, **kw) -> SubdivisionResult:
    steps = _steps(points, oracle)
    return SubdivisionResult(points, steps, total, _deficiency(steps, total), **kw)


def dyadic_subdivision(x, y, k: int, oracle: MetricOracle, search_radius: int = 3,
                       alpha0: float = DEFAULT_ALPHA0) -> SubdivisionResult:
    """2^k-part sequence by repeated near-midpoints.

    Records the longest and shortest segment at every level and the smallest
    A with r_0 2^-k / A <= r'_k <= r_k <= A r_0 2^-k.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    x, y = as_point(x), as_point(y)
    D = oracle.distance(x, y)
    if D / 2**k < alpha0:
        raise ThresholdViolation(f"delta(x,y)/2^k = {D / 2**k:g} below alpha0 = {alpha0:g}")
    pts = [x, y]
    levels = [(0, D, D)]
    A = 1.0
    spent = 0.0
    for lev in range(1, k + 1):
        new = [pts[0]]
        worst = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if a == b:
                z = a
            else:
                res = sagstar_deficiency(a, b, 0.5, oracle, search_radius)
                z = res.z
                worst = max(worst, res.additive)
            new += [z, b]
        pts = new
        spent += worst
        seg = _steps(pts, oracle)
        rk, rk_ = float(seg.max()), float(seg.min())
        levels.append((lev, rk, rk_))
        scale = D / 2**lev
        A = max(A, rk / scale, scale / rk_ if rk_ > 0 else math.inf)
    log.info("dyadic subdivision: k=%d fitted A=%.4g levels=%s", k, A, levels)
    return _finish(pts, oracle, D, levels=levels, A=A, budget=spent * 2**k / D if D else 0.0)


def dyadic_level_constant(levels: list) -> float:
    """Smallest C with A_k <= A_{k-1} (1 + C 2^{-k/3}) along logged levels.

    A_k = 2^k r_k / r_0.
    """
    r0 = levels[0][1]
    Ak = [2**lev * rk / r0 for lev, rk, _ in levels]
    C = 0.0
    for lev in range(1, len(Ak)):
        C = max(C, (Ak[lev] / Ak[lev - 1] - 1) * 2 ** (lev / 3))
    return C


def sag_sequence(x, y, m: int, oracle: MetricOracle, search_radius: int = 3,
                 alpha0: float = DEFAULT_ALPHA0) -> SubdivisionResult:
    """m-part near-equipartition built from a dyadic skeleton plus one SAG* query per point.

    With h = 2^-k and 2^k in [4m, 8m], the fraction i/m is written as
    t nu + (1-t) mu for the dyadic fractions mu = floor(i/(m h)) h - h and
    nu = mu + 3h, which forces t in [1/3, 2/3).
    """
    if m < 1:
        raise ValueError("m must be positive")
    x, y = as_point(x), as_point(y)
    D = oracle.distance(x, y)
    if D / m < alpha0:
        raise ThresholdViolation(f"delta(x,y)/m = {D / m:g} below alpha0 = {alpha0:g}")
    if m == 1:
        return _finish([x, y], oracle, D)
    if m & (m - 1) == 0:
        return dyadic_subdivision(x, y, m.bit_length() - 1, oracle, search_radius, alpha0=0.0)
    k = math.ceil(math.log2(4 * m))
    skel = dyadic_subdivision(x, y, k, oracle, search_radius, alpha0=0.0)
    n = 2**k
    pts = [x]
    spent = skel.budget * D / n
    worst = 0.0
    for i in range(1, m):
        # integer arithmetic on the grid of 1/(m n)
        lo = (i * n) // m - 1
        mu, nu = lo, lo + 3
        t = (i * n / m - mu) / 3.0
        a, b = skel.points[mu], skel.points[nu]
        if a == b:
            pts.append(a)
            continue
        res = sagstar_deficiency(a, b, t, oracle, search_radius)
        worst = max(worst, res.additive)
        pts.append(res.z)
    pts.append(y)
    return _finish(pts, oracle, D, levels=skel.levels, A=skel.A, budget=(spent + 2 * worst) * m / D)


def segment_rounding_sequence(x, y, m: int, oracle: NormMetric,
                              alpha0: float = DEFAULT_ALPHA0) -> SubdivisionResult:
    """Lattice roundings of m+1 equally spaced points of the straight segment [x, y].

    For a norm oracle every step lies within 2K of delta(x,y)/m (K the covering
    radius), which is asserted.
    """
    if m < 1:
        raise ValueError("m must be positive")
    x, y = as_point(x), as_point(y)
    D = oracle.distance(x, y)
    alpha = D / m
    if alpha < alpha0:
        raise ThresholdViolation(f"||y-x||/m = {alpha:g} below alpha0 = {alpha0:g}")
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    pts = [x] + [_round_half_up(xa + i * (ya - xa) / m) for i in range(1, m)] + [y]
    res = _finish(pts, oracle, D)
    K = oracle.covering_radius
    slack = 2 * K / alpha
    lo, hi = (1 - 4 * slack) * alpha, (1 + 5 * slack) * alpha
    assert np.all(res.distances >= lo - 1e-9) and np.all(res.distances <= hi + 1e-9)
    res.budget = slack
    return res


# ---------------------------------------------------------- ball absorption

@dataclass(frozen=True)
class SagProfile:
    """N(alpha) = c alpha^u (log alpha)^v on [alpha0, inf)."""

    c: float = 1.0
    u: float = 0.5
    v: float = -0.5
    alpha0: float = DEFAULT_ALPHA0

    def __post_init__(self):
        if self.c <= 0 or self.alpha0 <= 1:
            raise ValueError("need c > 0 and alpha0 > 1")
        if self.u < 0 or (self.u == 0 and self.v <= 0):
            raise ValueError("N must be increasing and unbounded")

    def __call__(self, alpha: float) -> float:
        return self.c * alpha**self.u * math.log(alpha) ** self.v


@dataclass(frozen=True)
class MonotoneBallReport:
    status: str                  # "holds", "fails" or "skipped"
    worst_defect: float          # G times the largest word distance to the small ball
    allowed: float               # 6 r / N(r)
    big_ball: int = 0
    small_ball: int = 0

    @property
    def holds(self) -> bool:
        return self.status != "fails"


def _word_gap(pts: np.ndarray, small: np.ndarray, lat: CayleyLattice) -> np.ndarray:
    """Word distance from each row of ``pts`` to the set ``small``."""
    out = np.empty(len(pts))
    if lat._kind in ("l1", "linf"):
        ordv = 1 if lat._kind == "l1" else np.inf
        for s in range(0, len(pts), 256):
            diff = pts[s:s + 256, None, :] - small[None, :, :]
            out[s:s + 256] = np.linalg.norm(diff, ord=ordv, axis=2).min(axis=1)
        return out
    # general generators: BFS distances to the small ball, restricted to a window
    span = int(np.abs(pts).max() + np.abs(small).max()) * 2 + 2
    wd = word_distance_map(lat, span)
    for i, p in enumerate(pts.tolist()):
        out[i] = min(wd[tuple(a - b for a, b in zip(p, s))] for s in small.tolist())
    return out


def monotone_ball_check(o, r: float, profile: SagProfile, oracle: MetricOracle,
                        G: float | None = None) -> MonotoneBallReport:
    """Whether B(o, (1+1/N(r)) r) lies in the word neighbourhood of B(o, r) of size 6r/(G N(r))."""
    if r < profile.alpha0:
        return MonotoneBallReport("skipped", 0.0, math.nan)
    o = as_point(o)
    G = oracle.upper if G is None else G
    N = profile(r)
    big_r = (1 + 1 / N) * r
    scan = int(math.floor(big_r / oracle.lower)) if oracle.lower > 0 else None
    if scan is None:
        raise ResourceLimit("oracle has no lower Lipschitz constant; the scan region is unbounded")
    region = word_ball(o, scan, oracle.lattice).points
    d = oracle.distances_from(o, region)
    big = region[d <= big_r + 1e-12]
    small = region[d <= r + 1e-12]
    gap = _word_gap(big, small, oracle.lattice)
    worst = G * float(gap.max()) if len(gap) else 0.0
    allowed = 6 * r / N
    return MonotoneBallReport("holds" if worst <= allowed + 1e-12 else "fails", worst, allowed,
                              len(big), len(small))

"""Convex geometry of balls: hull identities, Cauchy defects and limit shapes."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ResourceLimit
from .geodesicity import AverageMetric, MetricOracle
from .geometry import (PointCloud, Polytope, cloud_polytope_hausdorff, convex_hull,
                       convex_hull_float, direction_set, hausdorff_distance, minkowski_power,
                       minkowski_sum)
from .lattice import word_ball

log = logging.getLogger(__name__)

__all__ = [
    "PointCloud", "Polytope", "minkowski_sum", "minkowski_power", "convex_hull", "hausdorff_distance",
    "hull_identity_check", "ball_power_sandwich", "cauchy_defect", "limit_norm_estimate",
    "shape_error_series", "DoublingProfile", "hr_trace", "oracle_ball", "exact_norm_ball",
    "cauchy_defect_with_error", "LimitNorm",
]


# ------------------------------------------------------------------ balls

def _scan_radius(oracle: MetricOracle, r: float) -> int:
    if oracle.lower <= 0:
        raise ResourceLimit("oracle has no lower Lipschitz constant; ball scan unbounded")
    return int(math.floor(r / oracle.lower + 1e-12))


def _region_and_values(oracle: MetricOracle, r: float, values: np.ndarray | None = None):
    origin = (0,) * oracle.lattice.dim
    region = word_ball(origin, _scan_radius(oracle, r), oracle.lattice).points
    if values is None:
        values = oracle.distances_from(origin, region)
    return region, values


def oracle_ball(oracle: MetricOracle, r: float) -> PointCloud:
    """B(0, r) = {z : delta(0, z) <= r}."""
    region, vals = _region_and_values(oracle, r)
    return PointCloud(region[vals <= r + 1e-12], oracle.lattice.dim)


def _jackknife_oracles(oracle: MetricOracle):
    """Leave-one-group-out copies of a d-bar oracle (empty for exact oracles)."""
    if not isinstance(oracle, AverageMetric):
        return []
    out = []
    for m in oracle.dmap.jackknife_means():
        dm = type(oracle.dmap)(oracle.dmap.points, m, oracle.dmap.std_error, oracle.dmap.replicas,
                               oracle.dmap.group_sums, oracle.dmap.group_counts, oracle.dmap._index)
        o = AverageMetric(dm, oracle.lattice)
        o.lower, o.upper = oracle.lower, oracle.upper
        out.append(o)
    return out


def _jackknife(stat: Callable[[MetricOracle], float], oracle: MetricOracle):
    value = stat(oracle)
    reps = [stat(o) for o in _jackknife_oracles(oracle)]
    if not reps:
        return value, 0.0
    reps = np.asarray(reps, dtype=float)
    g = len(reps)
    return value, float(math.sqrt((g - 1) / g * np.sum((reps - reps.mean()) ** 2)))


# ------------------------------------------------------------ hull identity

@dataclass
class HullIdentityReport:
    n: int
    support_gap: float               # max |h_lhs - h_rhs| over the direction set
    raster_ok: bool | None           # every grid point of n conv(K) lies in K^{n-d} + d conv(K)
    dh_power: Fraction | float       # d_H(K^n, n conv(K))
    dh_base: Fraction | float        # d_H(K, conv(K))
    inequality_ok: bool

    @property
    def passed(self) -> bool:
        return self.support_gap <= 1e-9 and self.raster_ok is not False and self.inequality_ok


def hull_identity_check(K: PointCloud, n: int, raster_scale: int = 2) -> HullIdentityReport:
    """Check conv(K)^n = K^{n-d} conv(K)^d and d_H(K^n, conv(K)^n) <= d d_H(K, conv(K)).

    The set identity is tested on support functions and, in the plane, by
    exact membership of every point of (1/raster_scale) Z^2 inside n conv(K).
    """
    d = K.dim
    if n < d:
        raise ValueError("n must be at least the dimension")
    if not K.is_symmetric():
        raise ValueError("K must be symmetric")
    hull = convex_hull(K)
    Kpow = minkowski_power(K, n - d) if n > d else PointCloud(np.zeros((1, d), dtype=np.int64), d)
    dirs = direction_set(d)
    h_rhs = convex_hull(Kpow).support(dirs) + d * hull.support(dirs)
    h_lhs = n * hull.support(dirs)
    gap = float(np.max(np.abs(h_lhs - h_rhs)))

    raster = None
    if d == 2 and len(hull.vertices) >= 3:
        s = raster_scale
        big = hull.scale(n)
        lo, hi = big.vertices.min(axis=0) * s, big.vertices.max(axis=0) * s
        gx, gy = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
        grid = np.column_stack([gx.ravel(), gy.ravel()]).astype(np.int64)
        grid = grid[big.contains(grid, scale=s)]
        small = hull.scale(d)
        covered = np.zeros(len(grid), dtype=bool)
        for k in Kpow.points:
            todo = ~covered
            covered[todo] = small.contains(grid[todo] - s * k, scale=s)
            if covered.all():
                break
        raster = bool(covered.all())

    if d <= 2:
        power = minkowski_power(K, n)
        dh_n = cloud_polytope_hausdorff(power, hull.scale(n), "linf")
        dh_1 = cloud_polytope_hausdorff(K, hull, "linf")
    else:
        power = minkowski_power(K, n)
        dh_n = _support_gap(power, n, hull, dirs)
        dh_1 = _support_gap(K, 1, hull, dirs)
    return HullIdentityReport(n, gap, raster, dh_n, dh_1, dh_n <= d * dh_1)


def _support_gap(cloud: PointCloud, n: int, hull: Polytope, dirs) -> float:
    # support-function lower bound for d_H when no exact routine exists
    return float(np.max(n * hull.support(dirs) - cloud.points @ dirs.T.max(axis=0)))


# ------------------------------------------------------------ ball powers

@dataclass
class SandwichReport:
    r: float
    M: int
    left_ok: bool                     # B(r/M)^M inside B(r)
    equal: bool                       # B(r/M)^M == B(r)
    eps_needed: float                 # smallest eps with B(r) inside B((1+eps) r/M)^M
    defect: float                     # d_H((1/r) B(r/M)^M, (1/r) B(r)) in sup-norm
    std_error: float = 0.0


def ball_power_sandwich(oracle: MetricOracle, r: float, M: int, eps_grid=None) -> SandwichReport:
    if M < 1:
        raise ValueError("M must be positive")
    small = oracle_ball(oracle, r / M)
    full = oracle_ball(oracle, r)
    power = minkowski_power(small, M)
    left = power.issubset(full)
    # first candidate radius whose M-th power swallows B(r)
    eps_needed = math.inf
    grid = np.linspace(0, 1, 41)[1:] if eps_grid is None else eps_grid
    if full.issubset(power):
        eps_needed = 0.0
    else:
        for e in grid:
            if full.issubset(minkowski_power(oracle_ball(oracle, (1 + e) * r / M), M)):
                eps_needed = float(e)
                break

    def dh(o):
        a = minkowski_power(oracle_ball(o, r / M), M)
        b = oracle_ball(o, r)
        return hausdorff_distance(a, b, "linf") / r

    defect, se = _jackknife(dh, oracle)
    return SandwichReport(r, M, left, power == full, eps_needed, float(defect), se)


# ---------------------------------------------------------------- cauchy

def _cauchy_value(oracle: MetricOracle, r1: float, r2: float, norm: str):
    b1 = oracle_ball(oracle, r1)
    b2 = oracle_ball(oracle, r2)
    if float(r1).is_integer() and float(r2).is_integer() and norm == "linf":
        # exact: compare r2 B1 with r1 B2 on integers, then divide by r1 r2
        i1, i2 = int(r1), int(r2)
        raw = hausdorff_distance(b1.scale(i2), b2.scale(i1), "linf")
        return Fraction(int(round(raw)), i1 * i2)
    return hausdorff_distance(b1.points / r1, b2.points / r2, norm)


def cauchy_defect(oracle: MetricOracle, r1: float, r2: float, norm: str = "linf"):
    """d_H((1/r1) B(0, r1), (1/r2) B(0, r2)); exact Fraction for integer radii in sup-norm."""
    if r1 < 1 or r2 < 1:
        raise ValueError("radii must be at least 1")
    return _cauchy_value(oracle, r1, r2, norm)


def cauchy_defect_with_error(oracle: MetricOracle, r1: float, r2: float, norm: str = "linf"):
    """Cauchy defect and its delete-a-group jackknife standard error."""
    return _jackknife(lambda o: float(_cauchy_value(o, r1, r2, norm)), oracle)


# ------------------------------------------------------------ limit norm

class LimitNorm:
    """Symmetric convex body used as the unit ball of an estimated norm."""

    def __init__(self, body: Polytope, radius: float):
        self.body = body
        self.radius = radius
        d = body.dim
        if d == 1:
            self._eq = None
            self._half = float(np.max(np.abs(body.vertices)))
        else:
            h = ConvexHull(np.asarray(body.vertices, dtype=float))
            self._eq = h.equations          # a . x + b <= 0 inside

    @property
    def dim(self) -> int:
        return self.body.dim

    def __call__(self, v) -> np.ndarray:
        v = np.atleast_2d(np.asarray(v, dtype=float))
        if self._eq is None:
            return np.abs(v[:, 0]) / self._half
        a, b = self._eq[:, :-1], self._eq[:, -1]
        return np.max((v @ a.T) / (-b), axis=1)

    def support(self, directions) -> np.ndarray:
        return self.body.support(directions)


def limit_norm_estimate(oracle: MetricOracle, r_max: float, directions=None) -> LimitNorm:
    """Unit ball of the limit norm estimated as conv((1/r_max) B(0, r_max)), symmetrized."""
    ball = oracle_ball(oracle, r_max).points.astype(float) / r_max
    pts = np.vstack([ball, -ball])
    body = convex_hull_float(pts)
    if directions is not None:
        body._dirs = np.asarray(directions)
        body._hvals = body.support(directions)
    return LimitNorm(body, r_max)


def exact_norm_ball(norm: str, dim: int) -> LimitNorm:
    """Unit ball of l1 or linf as a LimitNorm."""
    if norm == "l1":
        v = np.vstack([np.eye(dim), -np.eye(dim)])
    elif norm == "linf":
        v = np.array(np.meshgrid(*[[-1.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1).T
    else:
        raise ValueError("only l1 and linf have polytope unit balls")
    return LimitNorm(convex_hull_float(v), math.inf)


# ------------------------------------------------------------ error series

@dataclass
class ShapeSeries:
    radii: list
    delta_in: np.ndarray
    delta_out: np.ndarray
    std_error: np.ndarray
    C: float = math.nan              # least squares delta ~ C sqrt(n log n)
    residuals: np.ndarray = field(default=None, repr=False)
    exponent: float = math.nan       # exploratory fit of log delta against log n

    @property
    def delta(self) -> np.ndarray:
        return np.maximum(self.delta_in, self.delta_out)

    @property
    def normalized(self) -> np.ndarray:
        n = np.asarray(self.radii, dtype=float)
        return self.delta / np.sqrt(n * np.log(n))


def _defects(oracle: MetricOracle, n: float, norm: LimitNorm):
    # scan far enough to see every lattice point of the norm ball of radius n
    region, vals = _region_and_values(oracle, n)
    reach = _scan_radius(oracle, n)
    nv = norm(region)
    inside = vals <= n + 1e-12
    d_out = max(0.0, float(nv[inside].max()) - n)
    outside = ~inside
    # points beyond the scan radius are outside the ball; bound their norm from below
    far = (reach + 1) * float(norm(_unit_lower_points(oracle)).min())
    nearest_out = min(float(nv[outside].min()) if outside.any() else math.inf, far)
    d_in = max(0.0, n - nearest_out + 0.0)
    return d_in, d_out


def _unit_lower_points(oracle: MetricOracle) -> np.ndarray:
    # the word sphere of radius 1 scaled down: any z at word distance k has norm >= k * min over S
    return np.asarray(oracle.lattice.generators, dtype=float)


def shape_error_series(oracle: MetricOracle, radii, norm_est: LimitNorm) -> ShapeSeries:
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly ascending")
    d_in, d_out, se = [], [], []
    for n in radii:
        (a, b) = _defects(oracle, n, norm_est)
        _, s = _jackknife(lambda o: max(_defects(o, n, norm_est)), oracle)
        d_in.append(a)
        d_out.append(b)
        se.append(s)
    out = ShapeSeries(radii, np.array(d_in), np.array(d_out), np.array(se))
    n = np.asarray(radii, dtype=float)
    x = np.sqrt(n * np.log(n))
    y = out.delta
    if np.any(y > 0):
        out.C = float(x @ y / (x @ x))
        out.residuals = y - out.C * x
        pos = y > 0
        if pos.sum() >= 2:
            out.exponent = float(np.polyfit(np.log(n[pos]), np.log(y[pos]), 1)[0])
    else:
        out.C = 0.0
        out.residuals = np.zeros_like(y)
    return out


# --------------------------------------------------- doubling and HR trace

@dataclass(frozen=True)
class DoublingProfile:
    """phi(a) = c a^u (log a)^v, with doubling modulus eta estimated on a grid."""

    c: float = 1.0
    u: float = 0.5
    v: float = -0.5
    a0: float = 8.0

    def phi(self, a):
        a = np.asarray(a, dtype=float)
        return self.c * a**self.u * np.log(a) ** self.v

    def eta(self, lam: float, grid=None) -> float:
        grid = np.geomspace(self.a0, self.a0 * 2**20, 200) if grid is None else np.asarray(grid)
        return float(np.max(self.phi(lam * grid) / self.phi(grid)))

    def check(self) -> dict:
        grid = np.geomspace(self.a0, self.a0 * 2**20, 200)
        ph = self.phi(grid)
        lams = 2.0 ** np.arange(1, 16)
        ratio = np.array([self.eta(l) / l for l in lams])
        return {
            "increasing": bool(np.all(np.diff(ph) > 0)),
            "at_least_one": bool(ph.min() >= 1.0),
            "sublinear": bool(ratio[-1] < ratio[0] and ratio[-1] < 0.05),
            "eta_over_lambda": ratio.tolist(),
        }


@dataclass
class HRTrace:
    C_prime: float
    C_second: float
    L: float
    C: float
    levels: list                     # (k, r, measured defect, bound, ok)
    estimated_G: bool = True

    @property
    def holds(self) -> bool:
        return all(ok for *_, ok in self.levels)


def hr_trace(defects: dict, profile: DoublingProfile, G: float, c: float, dim: int,
             C0: float = 0.0) -> HRTrace:
    """Recompute the induction constants and check measured Cauchy defects level by level.

    ``defects`` maps a radius r to the measured d_H((1/r)B(r), (1/(L r))B(L r))
    for the L chosen here; radii not of the form L^k are checked against
    the bound at the nearest smaller power.
    """
    Cp = 6 * G / c
    L = 2.0
    while dim * profile.eta(L) / L > 0.25:
        L *= 2
        if L > 2**40:
            raise ValueError("profile is not sublinearly doubling on the grid")
    Cs = L * Cp
    C = max(C0, Cs / 4)
    levels = []
    for r in sorted(defects):
        k = max(0, math.floor(math.log(r, L) + 1e-12))
        bound = 2 * C / float(profile.phi(max(L**k, profile.a0)))
        levels.append((k, r, float(defects[r]), bound, float(defects[r]) <= bound))
    return HRTrace(Cp, Cs, L, C, levels)

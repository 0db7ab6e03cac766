"""Lattice point clouds, convex hulls, Minkowski sums and Hausdorff distances.

Hulls are exact in dimension <= 2 (integer arithmetic), computed with qhull
in dimension 3, and represented by sampled support functions beyond that.
Hausdorff distances between a finite lattice set and a lattice polygon in
the sup-norm are computed exactly: the distance-to-set function is linear on
the cells cut out by the lines x, y in Z/2 and x +- y in Z, so its maximum
over the polygon sits at a half-integer point or on an edge crossing.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import ResourceLimit

DEFAULT_SUMSET_BUDGET = 50_000_000


class PointCloud:
    """Finite subset of Z^d stored sorted (lexicographically) without duplicates."""

    __slots__ = ("points", "dim", "_set")

    def __init__(self, points, dim: int | None = None):
        arr = np.asarray(points, dtype=np.int64)
        if arr.size == 0:
            if dim is None:
                raise ValueError("empty cloud needs an explicit dim")
            arr = arr.reshape(0, dim)
        else:
            arr = np.atleast_2d(arr)
            if dim is not None and arr.shape[1] != dim:
                raise ValueError("dimension mismatch")
        self.points = np.unique(arr, axis=0) if len(arr) else arr
        self.dim = int(self.points.shape[1])
        self._set = None

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return (tuple(int(c) for c in row) for row in self.points)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.all(self.points == other.points))

    def __hash__(self):
        return hash(self.points.tobytes())

    def __repr__(self):
        return f"PointCloud(dim={self.dim}, n={len(self)})"

    def as_set(self) -> frozenset:
        if self._set is None:
            self._set = frozenset(map(tuple, self.points.tolist()))
        return self._set

    def __contains__(self, p):
        return tuple(int(c) for c in p) in self.as_set()

    def issubset(self, other: "PointCloud") -> bool:
        return self.as_set() <= other.as_set()

    def translate(self, v) -> "PointCloud":
        return PointCloud(self.points + np.asarray(v, dtype=np.int64), self.dim)

    def scale(self, t: int) -> "PointCloud":
        return PointCloud(self.points * int(t), self.dim)

    def is_symmetric(self) -> bool:
        return self.as_set() == frozenset(map(tuple, (-self.points).tolist()))


def minkowski_sum(A: PointCloud, B: PointCloud, budget: int = DEFAULT_SUMSET_BUDGET) -> PointCloud:
    """Exact sumset {a + b}."""
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    if len(A) * len(B) > budget:
        raise ResourceLimit(f"sumset of {len(A)}x{len(B)} points exceeds the budget")
    s = (A.points[:, None, :] + B.points[None, :, :]).reshape(-1, A.dim)
    return PointCloud(s, A.dim)


def minkowski_power(A: PointCloud, n: int, budget: int = DEFAULT_SUMSET_BUDGET) -> PointCloud:
    """n-fold sumset A + ... + A by repeated squaring."""
    if n < 1:
        raise ValueError("power must be >= 1")
    result = None
    base = A
    while n:
        if n & 1:
            result = base if result is None else minkowski_sum(result, base, budget)
        n >>= 1
        if n:
            base = minkowski_sum(base, base, budget)
    return result


# ---------------------------------------------------------------- directions

@lru_cache(maxsize=None)
def _directions_cached(dim: int, count: int, seed: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def direction_set(dim: int, count: int | None = None, seed: int = 0) -> np.ndarray:
    """256 equally spaced angles in the plane; a seeded quasi-uniform set otherwise."""
    if count is None:
        count = 256 if dim == 2 else 4096
    out = _directions_cached(dim, count, seed)
    out.flags.writeable = False
    return out


# ------------------------------------------------------------------- hulls

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull2d(pts: list) -> list:
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


class Polytope:
    """Convex hull of finitely many points.

    ``vertices`` holds the extreme points (counter-clockwise in the plane).
    In dimension > 3 the body is represented by its support values on a
    fixed direction set and ``vertices`` lists the maximizers found there.
    """

    def __init__(self, vertices, dim: int, exact: bool = True, directions=None, support_values=None):
        self.vertices = np.asarray(vertices).reshape(-1, dim)
        self.dim = dim
        self.exact = exact
        self._dirs = directions
        self._hvals = support_values

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)}, exact={self.exact})"

    def support(self, directions) -> np.ndarray:
        """h(theta) = max over the body of <x, theta>."""
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        return np.max(self.vertices @ directions.T, axis=0)

    def vertex_set(self) -> frozenset:
        return frozenset(map(tuple, self.vertices.tolist()))

    def scale(self, t) -> "Polytope":
        return Polytope(self.vertices * t, self.dim, self.exact)

    def __add__(self, other: "Polytope") -> "Polytope":
        s = (self.vertices[:, None, :] + other.vertices[None, :, :]).reshape(-1, self.dim)
        if np.issubdtype(s.dtype, np.integer):
            return convex_hull(PointCloud(s, self.dim))
        return convex_hull_float(s)

    def edges(self):
        """Consecutive vertex pairs of a plane polygon (degenerate cases included)."""
        if self.dim != 2:
            raise ValueError("edges are defined for plane polygons only")
        v = [tuple(r) for r in self.vertices.tolist()]
        if len(v) == 1:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return list(zip(v, v[1:] + v[:1]))

    def halfplanes(self):
        """Integer (normal, offset) pairs with  normal . x <= offset  on the polygon.

        Only for full-dimensional polygons with integer vertices.
        """
        out = []
        for a, b in self.edges():
            nx, ny = b[1] - a[1], a[0] - b[0]
            out.append(((nx, ny), nx * a[0] + ny * a[1]))
        return out

    def contains(self, pts, scale: int = 1) -> np.ndarray:
        """Membership of ``pts / scale`` (exact for integer data, plane only)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        if self.dim == 1:
            lo, hi = self.vertices.min(), self.vertices.max()
            return (pts[:, 0] >= lo * scale) & (pts[:, 0] <= hi * scale)
        if self.dim != 2:
            raise NotImplementedError("membership implemented for d <= 2")
        if len(self.vertices) <= 2:
            return _on_segment(pts, self.vertices, scale)
        ok = np.ones(len(pts), dtype=bool)
        for (nx, ny), off in self.halfplanes():
            ok &= pts[:, 0] * nx + pts[:, 1] * ny <= off * scale
        return ok


def _on_segment(pts, verts, scale):
    a = np.asarray(verts[0], dtype=np.int64) * scale
    b = np.asarray(verts[-1], dtype=np.int64) * scale
    d = b - a
    rel = pts - a
    col = rel[:, 0] * d[1] - rel[:, 1] * d[0] == 0
    dot = rel @ d
    return col & (dot >= 0) & (dot <= d @ d)


def convex_hull(A: PointCloud, directions=None) -> Polytope:
    """Convex hull of a lattice point cloud."""
    if len(A) == 0:
        raise ValueError("hull of an empty set")
    d = A.dim
    if d == 1:
        return Polytope(np.array([[A.points.min()], [A.points.max()]]) if len(A) > 1
                        else A.points.copy(), 1)
    if d == 2:
        hull = _hull2d([tuple(p) for p in A.points.tolist()])
        return Polytope(np.array(hull, dtype=np.int64), 2)
    if d == 3:
        return _hull3d(A.points)
    if directions is None:
        directions = direction_set(d)
    vals = A.points @ directions.T
    arg = np.unique(np.argmax(vals, axis=0))
    return Polytope(A.points[arg], d, exact=False, directions=directions,
                    support_values=vals.max(axis=0))


def _hull3d(points: np.ndarray) -> Polytope:
    pts = np.unique(points, axis=0)
    if len(pts) <= 3:
        return Polytope(pts, 3)
    try:
        h = ConvexHull(pts.astype(float))
        return Polytope(pts[np.sort(h.vertices)], 3)
    except QhullError:
        # flat set: hull inside its affine span
        c = pts - pts[0]
        _, s, vt = np.linalg.svd(c.astype(float))
        rank = int(np.sum(s > 1e-9 * s[0]))
        proj = c @ vt[:rank].T
        if rank == 1:
            idx = [int(np.argmin(proj[:, 0])), int(np.argmax(proj[:, 0]))]
        else:
            idx = ConvexHull(proj).vertices
        return Polytope(pts[np.sort(idx)], 3)


def convex_hull_float(points) -> Polytope:
    pts = np.unique(np.atleast_2d(np.asarray(points, dtype=float)), axis=0)
    d = pts.shape[1]
    if d == 1 or len(pts) <= d:
        if d == 1:
            return Polytope(np.array([[pts.min()], [pts.max()]]), 1)
        return Polytope(pts, d)
    try:
        h = ConvexHull(pts)
        v = pts[h.vertices]
        return Polytope(v, d)
    except QhullError:
        return Polytope(pts, d, exact=False)


# --------------------------------------------------------------- hausdorff

def _norm_p(norm: str) -> float:
    if norm in ("linf", "Linf", "inf"):
        return np.inf
    if norm in ("l2", "L2"):
        return 2.0
    if norm in ("l1", "L1"):
        return 1.0
    raise ValueError(f"unsupported norm {norm}")


def directed_hausdorff_points(A: np.ndarray, B: np.ndarray, norm: str = "linf") -> float:
    """sup over a in A of the distance from a to B."""
    tree = cKDTree(np.asarray(B, dtype=float))
    dist, _ = tree.query(np.asarray(A, dtype=float), p=_norm_p(norm))
    return float(np.max(dist))


def _cloud_points(X):
    return X.points if isinstance(X, PointCloud) else np.asarray(X)


def hausdorff_distance(A, B, norm: str = "linf"):
    """Hausdorff distance between point clouds and/or polytopes.

    Cloud/cloud is exact. Polygon/polygon uses support functions on the
    finitely many directions where the difference can peak. Cloud/polygon
    is exact (as a Fraction) in the sup-norm in the plane.
    """
    a_poly = isinstance(A, Polytope)
    b_poly = isinstance(B, Polytope)
    if not a_poly and not b_poly:
        pa, pb = _cloud_points(A), _cloud_points(B)
        return max(directed_hausdorff_points(pa, pb, norm), directed_hausdorff_points(pb, pa, norm))
    if a_poly and b_poly:
        return polytope_hausdorff(A, B, norm)
    cloud, poly = (B, A) if a_poly else (A, B)
    return cloud_polytope_hausdorff(cloud, poly, norm)


def polytope_hausdorff(P: Polytope, Q: Polytope, norm: str = "linf") -> float:
    """d_H of two convex bodies = max over dual-unit directions of |h_P - h_Q|."""
    d = P.dim
    if d == 1:
        return float(max(abs(P.vertices.min() - Q.vertices.min()), abs(P.vertices.max() - Q.vertices.max())))
    if d == 2:
        dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([-1.0, 0.0]), np.array([0.0, -1.0])]
        for poly in (P, Q):
            for a, b in poly.edges():
                n = np.array([b[1] - a[1], a[0] - b[0]], dtype=float)
                if np.any(n):
                    dirs.append(n)
                    dirs.append(-n)
        dirs = np.array(dirs)
        if norm in ("l2", "L2"):
            dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
            base = float(np.max(np.abs(P.support(dirs) - Q.support(dirs))))
            # the difference can also peak inside an arc, at +-(v_P - v_Q)
            extra = []
            for vp in P.vertices:
                for vq in Q.vertices:
                    w = np.asarray(vp, float) - np.asarray(vq, float)
                    nw = np.linalg.norm(w)
                    if nw > 0:
                        extra.extend([w / nw, -w / nw])
            if extra:
                ex = np.array(extra)
                base = max(base, float(np.max(np.abs(P.support(ex) - Q.support(ex)))))
            return base
        dirs = dirs / np.sum(np.abs(dirs), axis=1, keepdims=True)
        return float(np.max(np.abs(P.support(dirs) - Q.support(dirs))))
    dirs = direction_set(d)
    if norm not in ("l2", "L2"):
        dirs = dirs / np.sum(np.abs(dirs), axis=1, keepdims=True)
    return float(np.max(np.abs(P.support(dirs) - Q.support(dirs))))


def _point_polygon_distance(p, poly: Polytope, norm: str) -> float:
    """Distance from a point to a convex polygon (0 inside)."""
    x = np.asarray(p, dtype=float)
    if len(poly.vertices) >= 3 and poly.contains(np.asarray([p], dtype=np.int64))[0]:
        return 0.0
    verts = poly.vertices.astype(float)
    if len(verts) == 1:
        return float(np.linalg.norm(x - verts[0], ord=_norm_p(norm)))
    best = math.inf
    for a, b in poly.edges():
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        dvec = b - a
        ts = [0.0, 1.0]
        if norm in ("l2", "L2"):
            dd = dvec @ dvec
            if dd > 0:
                ts.append(float(np.clip((x - a) @ dvec / dd, 0, 1)))
        else:
            r = x - a
            # kinks of max(|r0 - t d0|, |r1 - t d1|)
            for s in (1.0, -1.0):
                den = dvec[0] - s * dvec[1]
                if den != 0:
                    ts.append((r[0] - s * r[1]) / den)
            for k in range(2):
                if dvec[k] != 0:
                    ts.append(r[k] / dvec[k])
        for t in ts:
            t = min(1.0, max(0.0, t))
            best = min(best, float(np.linalg.norm(x - (a + t * dvec), ord=_norm_p(norm))))
    return best


def _edge_crossings_linf(a, b) -> list:
    """Points where segment a-b crosses x, y in Z/2 or x +- y in Z (exact Fractions)."""
    ax, ay = Fraction(a[0]), Fraction(a[1])
    dx, dy = Fraction(b[0] - a[0]), Fraction(b[1] - a[1])
    ts = {Fraction(0), Fraction(1)}

    def add_family(f0, fd, step):
        # solutions t in [0,1] of f0 + t*fd = k*step
        if fd == 0:
            return
        lo, hi = sorted((f0, f0 + fd))
        k0 = math.ceil(lo / step)
        k1 = math.floor(hi / step)
        for k in range(k0, k1 + 1):
            ts.add((k * step - f0) / fd)

    half = Fraction(1, 2)
    add_family(ax, dx, half)
    add_family(ay, dy, half)
    add_family(ax + ay, dx + dy, Fraction(1))
    add_family(ax - ay, dx - dy, Fraction(1))
    return [(ax + t * dx, ay + t * dy) for t in ts if 0 <= t <= 1]


def _half_integer_points(poly: Polytope) -> np.ndarray:
    """All points of (Z/2)^2 inside the polygon, returned doubled (integers)."""
    v = poly.vertices
    lo = 2 * v.min(axis=0)
    hi = 2 * v.max(axis=0)
    gx, gy = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()]).astype(np.int64)
    return pts[poly.contains(pts, scale=2)]


def sup_distance_to_cloud_linf(poly: Polytope, cloud: PointCloud) -> Fraction:
    """Exact max over the polygon of the sup-norm distance to ``cloud``."""
    if poly.dim == 1:
        lo, hi = int(poly.vertices.min()), int(poly.vertices.max())
        xs = np.sort(cloud.points[:, 0])
        cands = [Fraction(lo), Fraction(hi)]
        for u, w in zip(xs[:-1], xs[1:]):
            m = Fraction(int(u) + int(w), 2)
            if lo <= m <= hi:
                cands.append(m)
        return max(min(abs(c - int(x)) for x in xs) for c in cands)
    if poly.dim != 2:
        raise NotImplementedError("exact cloud/polytope distance only in d <= 2")
    tree = cKDTree(cloud.points.astype(float))
    cands = []
    if len(poly.vertices) >= 3:
        doubled = _half_integer_points(poly)
        dist, _ = tree.query(doubled / 2.0, p=np.inf)
        cands.extend(zip(map(tuple, doubled.tolist()), dist.tolist(), [2] * len(dist)))
    v0 = tuple(int(c) for c in poly.vertices[0])
    for a, b in poly.edges() or [(v0, v0)]:
        for px, py in _edge_crossings_linf(a, b):
            den = math.lcm(px.denominator, py.denominator)
            cands.append(((int(px * den), int(py * den)), None, den))
    float_pts = np.array([[c[0][0] / c[2], c[0][1] / c[2]] for c in cands])
    dist, _ = tree.query(float_pts, p=np.inf)
    top = float(np.max(dist))
    # exact re-evaluation of everything that could be the maximum
    best = Fraction(0)
    for (num, _, den), fd in zip(cands, dist):
        if fd < top - 1e-7:
            continue
        px, py = Fraction(num[0], den), Fraction(num[1], den)
        near = tree.query_ball_point([float(px), float(py)], r=fd + 1e-6, p=np.inf)
        val = min(max(abs(px - int(cloud.points[i, 0])), abs(py - int(cloud.points[i, 1]))) for i in near)
        best = max(best, val)
    return best


def cloud_polytope_hausdorff(cloud: PointCloud, poly: Polytope, norm: str = "linf"):
    """Hausdorff distance between a lattice cloud and a lattice polygon."""
    out_dist = max(_point_polygon_distance(p, poly, norm) for p in cloud.points.tolist()) \
        if poly.dim == 2 else float(max(
            max(0, int(poly.vertices.min()) - int(x), int(x) - int(poly.vertices.max()))
            for x in cloud.points[:, 0]))
    if norm in ("linf", "Linf", "inf"):
        return max(sup_distance_to_cloud_linf(poly, cloud), Fraction(out_dist))
    if norm in ("l2", "L2") and poly.dim == 2:
        return max(_sup_distance_to_cloud_l2(poly, cloud), out_dist)
    raise NotImplementedError(f"cloud/polytope distance for norm {norm} in dim {poly.dim}")


def _sup_distance_to_cloud_l2(poly: Polytope, cloud: PointCloud) -> float:
    from scipy.spatial import Voronoi

    pts = cloud.points.astype(float)
    tree = cKDTree(pts)
    cands = [np.asarray(v, float) for v in poly.vertices]
    pairs = []
    try:
        if len(pts) < 4:
            raise QhullError("too few points")
        vor = Voronoi(pts)
        pairs = vor.ridge_points.tolist()
        for v in vor.vertices:
            cands.append(v)
    except (QhullError, ValueError):
        pairs = [(i, j) for i in range(len(pts)) for j in range(i + 1, len(pts))]
    for i, j in pairs:
        m = 0.5 * (pts[i] + pts[j])
        n = pts[j] - pts[i]
        for a, b in poly.edges():
            a = np.asarray(a, float)
            b = np.asarray(b, float)
            den = n @ (b - a)
            if den != 0:
                t = n @ (m - a) / den
                if 0 <= t <= 1:
                    cands.append(a + t * (b - a))
    cands = np.array(cands)
    if len(poly.vertices) >= 3:
        inside = np.array([
            all((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) >= -1e-9
                for a, b in poly.edges())
            for c in cands
        ])
        cands = cands[inside]
    dist, _ = tree.query(cands, p=2)
    return float(np.max(dist))

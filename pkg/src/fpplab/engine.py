"""Exact first-passage distances d_omega on the implicit lattice.

Every query runs Dijkstra on a finite box of Z^d. The answer is certified
exact when no vertex touching the box boundary was settled before the
queried distance; otherwise the box grows, and past ``max_volume`` the
query fails with ResourceLimit rather than returning a wrong value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ResourceLimit
from .lattice import as_point, canonical_edge
from .weights import OmegaField, edge_weight, law_min

DEFAULT_MAX_VOLUME = 4_000_000
GROWTH = 1.6


@dataclass(frozen=True)
class Box:
    lo: tuple
    shape: tuple

    @classmethod
    def around(cls, points: np.ndarray, margin: int) -> "Box":
        points = np.atleast_2d(np.asarray(points, dtype=np.int64))
        lo = points.min(axis=0) - margin
        hi = points.max(axis=0) + margin
        return cls(tuple(int(c) for c in lo), tuple(int(c) for c in hi - lo + 1))

    @classmethod
    def from_bounds(cls, lo, hi) -> "Box":
        lo = tuple(int(c) for c in lo)
        return cls(lo, tuple(int(h) - l + 1 for l, h in zip(lo, hi)))

    @property
    def volume(self) -> int:
        return int(np.prod(self.shape))

    @property
    def strides(self) -> np.ndarray:
        s = np.ones(len(self.shape), dtype=np.int64)
        for k in range(len(self.shape) - 2, -1, -1):
            s[k] = s[k + 1] * self.shape[k + 1]
        return s

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo = np.array(self.lo)
        return np.all((pts >= lo) & (pts < lo + np.array(self.shape)), axis=1)

    def flat(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        if not np.all(self.contains(pts)):
            raise ValueError("point outside the search box")
        return (pts - np.array(self.lo)) @ self.strides

    def unflat(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.empty(idx.shape + (len(self.shape),), dtype=np.int64)
        rem = idx.copy()
        for k, s in enumerate(self.strides):
            out[..., k] = rem // s
            rem = rem - out[..., k] * s
        return out + np.array(self.lo)

    def grown(self, factor: float) -> "Box":
        pad = [max(2, int(math.ceil(n * (factor - 1) / 2))) for n in self.shape]
        return Box(tuple(l - p for l, p in zip(self.lo, pad)),
                   tuple(n + 2 * p for n, p in zip(self.shape, pad)))


@dataclass(frozen=True)
class PathRecord:
    """A lattice path with its omega-length (summed left to right) and hop count."""

    vertices: tuple
    omega_length: float
    hops: int
    weights: tuple = field(default=(), repr=False)

    @property
    def cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.weights)])


@dataclass
class OmegaBall:
    center: tuple
    radius: float
    points: "PointCloud"
    distances: np.ndarray

    def __len__(self):
        return len(self.points)


@dataclass
class SearchResult:
    """Certified single-source distances on a box."""

    box: Box
    dist: np.ndarray
    pred: np.ndarray
    source: tuple
    pops: int

    def distance_at(self, pts) -> np.ndarray:
        return self.dist[self.box.flat(pts)]

    def path_to(self, target) -> list:
        idx = int(self.box.flat([target])[0])
        src = int(self.box.flat([self.source])[0])
        chain = [idx]
        while chain[-1] != src:
            p = int(self.pred[chain[-1]])
            if p < 0:
                raise RuntimeError("target not reached")
            chain.append(p)
        chain.reverse()
        return [tuple(int(c) for c in row) for row in self.box.unflat(np.array(chain))]


def _initial_box(field: OmegaField, src, targets: np.ndarray, radius: float) -> Box:
    lat = field.lattice
    pts = np.vstack([np.atleast_2d(np.array(src, dtype=np.int64)), targets]) if len(targets) else \
        np.atleast_2d(np.array(src, dtype=np.int64))
    amin = law_min(field.law)
    if radius > 0 and amin > 0:
        # every vertex within omega-radius r is within r/amin hops
        margin = int(math.floor(radius / amin)) * lat.max_step_linf + 1
    else:
        ext = int(np.abs(pts - pts[0]).max()) if len(pts) > 1 else 0
        margin = int(math.ceil(1.25 * ext)) * lat.max_step_linf + 4
    return Box.around(pts, margin)


def search(field: OmegaField, src, targets=(), radius: float = -1.0, *, box: Box | None = None,
           max_volume: int | None = None) -> SearchResult:
    """Single-source distances from ``src`` covering ``targets`` and the ball of ``radius``.

    With an explicit ``box`` the search is clamped to that box (distances in
    the induced subgraph) and no certification is attempted.
    """
    src = as_point(src)
    lat = field.lattice
    if max_volume is None:
        max_volume = DEFAULT_MAX_VOLUME
    targets = np.asarray(targets, dtype=np.int64).reshape(-1, lat.dim)
    p0s, atoms, term, ta, tb = field.law.packed()
    gens = lat.gen_array
    clamped = box is not None
    if box is None:
        box = _initial_box(field, src, targets, radius)
    while True:
        if box.volume > max_volume:
            raise ResourceLimit(
                f"search box of volume {box.volume} exceeds the budget {max_volume}"
            )
        flat_src = int(box.flat([src])[0])
        flat_t = box.flat(targets) if len(targets) else np.zeros(0, dtype=np.int64)
        dist, pred, bmin, pops, complete = _kernels.dijkstra_window(
            np.array(box.lo, dtype=np.int64), np.array(box.shape, dtype=np.int64), gens,
            np.uint64(field.seed), p0s, atoms, term, ta, tb,
            flat_src, flat_t, float(radius), box.volume + 1,
        )
        if not complete:
            raise ResourceLimit("vertex budget exhausted")
        res = SearchResult(box, dist, pred, src, pops)
        if clamped:
            return res
        need = float(dist[flat_t].max()) if len(flat_t) else -math.inf
        if radius >= 0:
            # a boundary vertex at exactly the radius could leak a zero-weight edge
            if not bmin > radius or not bmin >= need:
                box = box.grown(GROWTH)
                continue
        elif bmin < need:
            box = box.grown(GROWTH)
            continue
        return res


def _path_record(field: OmegaField, vertices: list) -> PathRecord:
    ws = []
    for u, v in zip(vertices[:-1], vertices[1:]):
        ws.append(edge_weight(field, canonical_edge(u, v, field.lattice)))
    total = 0.0
    for w in ws:
        total += w
    return PathRecord(tuple(vertices), total, len(vertices) - 1, tuple(ws))


def omega_distance(x, y, field: OmegaField, *, box: Box | None = None,
                   max_volume: int | None = None):
    """d_omega(x, y) together with one omega-geodesic realizing it."""
    x = as_point(x)
    y = as_point(y)
    res = search(field, x, [y], box=box, max_volume=max_volume)
    d = float(res.distance_at([y])[0])
    if not math.isfinite(d):
        raise ResourceLimit(f"{y} not reachable from {x} inside the clamped box")
    path = _path_record(field, res.path_to(y))
    if abs(path.omega_length - d) > 1e-9 * max(1.0, d):
        raise RuntimeError("geodesic length disagrees with the search distance")
    amin = law_min(field.law)
    if amin > 0:
        # confinement: hops to any vertex on the geodesic bound its word distance
        assert path.hops <= path.omega_length / amin + 1e-9
    return d, path


def omega_distances(src, targets, field: OmegaField, *, box: Box | None = None,
                    max_volume: int | None = None) -> np.ndarray:
    res = search(field, src, targets, box=box, max_volume=max_volume)
    return res.distance_at(np.asarray(targets, dtype=np.int64).reshape(-1, field.lattice.dim))


def omega_ball(o, r: float, field: OmegaField, *, max_volume: int | None = None) -> OmegaBall:
    """B_omega(o, r) with the distance of every member point."""
    from .geometry import PointCloud

    if r < 0:
        raise ValueError("radius must be nonnegative")
    o = as_point(o)
    res = search(field, o, (), radius=float(r), max_volume=max_volume)
    idx = np.flatnonzero(res.dist <= r)
    pts = res.box.unflat(idx)
    cloud = PointCloud(pts)
    # PointCloud sorts; flat order already is lexicographic, so distances align
    return OmegaBall(o, float(r), cloud, res.dist[idx])


def waypoint_index(path: PathRecord, lam: float) -> int:
    cum = path.cumulative
    return int(np.argmin(np.abs(cum - lam * path.omega_length)))


def geodesic_waypoint(path: PathRecord, lam: float) -> tuple:
    """Vertex of ``path`` whose cumulative omega-length is closest to lam * length."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    return path.vertices[waypoint_index(path, lam)]


def waypoint_residual(path: PathRecord, lam: float) -> float:
    cum = path.cumulative
    return float(np.min(np.abs(cum - lam * path.omega_length)))

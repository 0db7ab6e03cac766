"""Slow reference implementations used to validate the fast routines.

Nothing here shares code paths with the engine or the geometry kernels
beyond the pure-Python edge weights.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import integrate

from .lattice import CayleyLattice, canonical_edge
from .weights import OmegaField, edge_weight


def window_vertices(lo, hi) -> list:
    return [tuple(p) for p in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])]


def exhaustive_path_distance(x, y, field: OmegaField, lo, hi) -> float:
    """Minimum omega-length over simple paths from x to y inside the box [lo, hi].

    Depth-first enumeration with branch-and-bound pruning: a branch is
    dropped only once its partial length already reaches the best complete
    path, so the minimum is exact.
    """
    x, y = tuple(x), tuple(y)
    lat = field.lattice
    inside = set(window_vertices(lo, hi))
    if x not in inside or y not in inside:
        raise ValueError("endpoints must lie in the window")
    adj = {}
    for v in inside:
        out = []
        for g in lat.generators:
            w = tuple(a + b for a, b in zip(v, g))
            if w in inside:
                out.append((w, edge_weight(field, canonical_edge(v, w, lat))))
        out.sort(key=lambda t: t[1])
        adj[v] = out
    best = [math.inf]
    seen = {x}

    def dfs(v, acc):
        if acc >= best[0]:
            return
        if v == y:
            best[0] = acc
            return
        for w, c in adj[v]:
            if w not in seen:
                seen.add(w)
                dfs(w, acc + c)
                seen.discard(w)

    dfs(x, 0.0)
    return best[0]


def brute_sumset(A, n: int) -> set:
    pts = [tuple(p) for p in np.asarray(A).tolist()]
    out = set()
    for combo in itertools.product(pts, repeat=n):
        out.add(tuple(sum(c) for c in zip(*combo)))
    return out


def brute_extreme_points(points) -> set:
    """Extreme points of a planar set: not in any closed triangle or segment of the others."""
    pts = sorted(set(tuple(int(c) for c in p) for p in np.asarray(points).tolist()))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def in_triangle(p, a, b, c):
        d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
        neg = d1 < 0 or d2 < 0 or d3 < 0
        pos = d1 > 0 or d2 > 0 or d3 > 0
        return not (neg and pos)

    def on_segment(p, a, b):
        return cross(a, b, p) == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) \
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])

    out = set()
    for p in pts:
        others = [q for q in pts if q != p]
        covered = any(on_segment(p, a, b) for a, b in itertools.combinations(others, 2))
        if not covered:
            covered = any(cross(a, b, c) != 0 and in_triangle(p, a, b, c)
                          for a, b, c in itertools.combinations(others, 3))
        if not covered:
            out.add(p)
    return out


def brute_sagstar(x, y, lam, dist, candidates) -> tuple:
    """(z, eps) minimizing the SAG* defect over ``candidates``; first minimum in sorted order."""
    D = dist(x, y)
    best = None
    for z in sorted(candidates):
        s = max(abs(dist(x, z) - lam * D), abs(dist(z, y) - (1 - lam) * D))
        if best is None or s < best[1]:
            best = (z, s)
    return best[0], best[1] / D


def brute_equipartition(x, y, m: int, dist, windows) -> tuple:
    """Best m-part sequence with the i-th interior point drawn from windows[i-1]."""
    D = dist(x, y)
    best = None
    for inner in itertools.product(*windows):
        pts = [tuple(x)] + list(inner) + [tuple(y)]
        steps = [dist(a, b) for a, b in zip(pts[:-1], pts[1:])]
        eps = max(abs(s * m / D - 1) for s in steps)
        if best is None or eps < best[1]:
            best = (pts, eps)
    return best


def uniform_pair_min_mean(lo: float, hi: float) -> float:
    """E min(S1, S2) for independent S_i, each a sum of two U(lo, hi) variables."""
    w = hi - lo

    def density(s):
        u = s - 2 * lo
        if u < 0 or u > 2 * w:
            return 0.0
        return (u if u <= w else 2 * w - u) / (w * w)

    def survival(s):
        u = s - 2 * lo
        if u <= 0:
            return 1.0
        if u >= 2 * w:
            return 0.0
        if u <= w:
            return 1 - u * u / (2 * w * w)
        return (2 * w - u) ** 2 / (2 * w * w)

    # E min = 2 lo + integral of P(S > s)^2 over [2 lo, 2 hi]
    val, _ = integrate.quad(lambda s: survival(s) ** 2, 2 * lo, 2 * hi, points=[lo + hi], epsabs=1e-13)
    return 2 * lo + val


def exact_binomial(n: int, k: int) -> int:
    return math.comb(n, k)


def linf_cloud_hausdorff(A, B) -> Fraction:
    """Exact sup-norm Hausdorff distance between finite integer clouds (quadratic scan)."""
    A = [tuple(p) for p in np.asarray(A).tolist()]
    B = [tuple(p) for p in np.asarray(B).tolist()]

    def directed(P, Q):
        return max(min(max(abs(a - b) for a, b in zip(p, q)) for q in Q) for p in P)

    return Fraction(max(directed(A, B), directed(B, A)))

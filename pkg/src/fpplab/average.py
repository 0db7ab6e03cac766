"""Monte Carlo estimates of the average distance and of its fluctuations.

Replica i of an experiment uses the environment seeded by
``replica_seed(base_seed, i)``; replicas are scheduled in any order and
reduced in index order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import Box, omega_distances, search
from .lattice import CayleyLattice, as_point, graph_distance, word_ball
from .parallel import map_ordered
from .weights import OmegaField, WeightLaw, law_mean, law_min, replica_seed

log = logging.getLogger(__name__)


def _lattice_for(x, lattice):
    return lattice if lattice is not None else CayleyLattice.standard(len(x))


@dataclass
class MeanDistanceEstimate:
    x: tuple
    y: tuple
    replicas: int
    mean: float
    std_error: float
    values: np.ndarray | None = field(default=None, repr=False)

    @property
    def sample_std(self) -> float:
        return self.std_error * math.sqrt(self.replicas)


def replica_distances(x, targets, law: WeightLaw, base_seed: int, R: int,
                      lattice: CayleyLattice | None = None, threads: int | None = None) -> np.ndarray:
    """R x len(targets) matrix of d_omega(x, target) over replicas."""
    x = as_point(x)
    lat = _lattice_for(x, lattice)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1, lat.dim)

    def one(i):
        f = OmegaField(law, replica_seed(base_seed, i), lat)
        return omega_distances(x, targets, f)

    return np.array(map_ordered(one, range(R), threads)).reshape(R, len(targets))


def mean_distance(x, y, law: WeightLaw, base_seed: int, R: int,
                  lattice: CayleyLattice | None = None, keep_values: bool = False,
                  threads: int | None = None) -> MeanDistanceEstimate:
    """Estimate of the average distance between x and y from R replicas."""
    if R < 2:
        raise ValueError("need at least two replicas")
    x, y = as_point(x), as_point(y)
    lat = _lattice_for(x, lattice)
    vals = replica_distances(x, [y], law, base_seed, R, lat, threads)[:, 0]
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(R))
    est = MeanDistanceEstimate(x, y, R, mean, se, vals if keep_values else None)
    d = graph_distance(x, y, lat)
    b = law_mean(law)
    a = law_min(law)
    if not (a * d - 3 * se <= mean <= b * d + 3 * se):
        log.warning("bi-Lipschitz sandwich violated: %s not in [%s, %s]", mean, a * d, b * d)
    return est


def talagrand_bound(u: float, r: float, C1: float, C2: float) -> float:
    """C1 exp(-C2 min(u^2/r, u))."""
    if u < 0:
        raise ValueError("u must be nonnegative")
    return C1 * math.exp(-C2 * min(u * u / r, u))


@dataclass
class FluctuationTable:
    pairs: list
    word_distance: np.ndarray
    thresholds: np.ndarray
    frequencies: np.ndarray          # pairs x thresholds
    means: np.ndarray
    sample_std: np.ndarray
    replicas: int
    C1: float = float("nan")
    C2: float = float("nan")
    bound: np.ndarray | None = None  # pairs x thresholds
    values: np.ndarray | None = field(default=None, repr=False)

    def exceedance(self, pair: int, u: float) -> float:
        dev = np.abs(self.values[:, pair] - self.means[pair])
        return float(np.mean(dev >= u))


def fluctuation_table(pairs, law: WeightLaw, base_seed: int, R: int, thresholds,
                      lattice: CayleyLattice | None = None, threads: int | None = None,
                      fit: bool = True) -> FluctuationTable:
    """Empirical P(|d_omega - mean| >= u) per pair and threshold.

    The centre is the mean of the same replica set; its O(1/sqrt(R)) bias is
    not corrected.
    """
    if R < 100:
        raise ValueError("fluctuation tables need at least 100 replicas")
    pairs = [(as_point(x), as_point(y)) for x, y in pairs]
    lat = _lattice_for(pairs[0][0], lattice)
    thr = np.asarray(thresholds, dtype=float)
    cols = []
    for x, y in pairs:
        cols.append(replica_distances(x, [y], law, base_seed, R, lat, threads)[:, 0])
    vals = np.column_stack(cols)
    means = vals.mean(axis=0)
    std = vals.std(axis=0, ddof=1)
    dev = np.abs(vals - means)
    freq = (dev[:, :, None] >= thr[None, None, :]).mean(axis=0)
    rdist = np.array([graph_distance(x, y, lat) for x, y in pairs], dtype=float)
    table = FluctuationTable(pairs, rdist, thr, freq, means, std, R, values=vals)
    if fit:
        fit_talagrand(table)
    return table


def fit_talagrand(table: FluctuationTable, train: np.ndarray | None = None):
    """Fit C2 by least squares on log-frequencies, then the smallest C1 dominating ``train``.

    ``train`` is a frequency array of the table's shape (default: the table's
    own frequencies).
    """
    freq = table.frequencies if train is None else train
    m = np.minimum(table.thresholds[None, :] ** 2 / table.word_distance[:, None], table.thresholds[None, :])
    ok = freq > 0
    if ok.sum() >= 2 and np.ptp(m[ok]) > 0:
        slope, _ = np.polyfit(m[ok], np.log(freq[ok]), 1)
        C2 = max(-slope, 1e-12)
    else:
        C2 = 1.0
    C1 = float(np.max(freq * np.exp(C2 * m))) if np.any(ok) else 1.0
    table.C1, table.C2 = C1, float(C2)
    table.bound = C1 * np.exp(-C2 * m)
    return C1, float(C2)


@dataclass
class SupEstimate:
    value: float
    std_error: float
    r: int
    envelope: float                 # sqrt(r log r)
    n_pairs: int
    replicas: int
    per_replica: np.ndarray = field(repr=False, default=None)

    @property
    def ratio(self) -> float:
        return self.value / self.envelope


def sample_pairs(o, r: int, lat: CayleyLattice, n_pairs: int, n_sources: int, seed: int):
    """Seeded ordered pairs in B(o, r); every ordered pair when |B|^2 <= n_pairs.

    Sampled pairs share ``n_sources`` uniformly drawn sources so that one
    search per source serves many pairs.
    """
    ball = word_ball(o, r, lat).points
    n = len(ball)
    if n * n <= n_pairs:
        src = np.repeat(np.arange(n), n)
        tgt = np.tile(np.arange(n), n)
    else:
        rng = np.random.default_rng(seed)
        sources = rng.choice(n, size=min(n_sources, n), replace=False)
        src = np.sort(rng.choice(sources, size=n_pairs))
        tgt = rng.integers(0, n, size=n_pairs)
    return ball[src], ball[tgt]


def fluctuation_sup(o, r: int, law: WeightLaw, base_seed: int, R_pairs: int, R_replicas: int,
                    lattice: CayleyLattice | None = None, n_sources: int = 8,
                    threads: int | None = None) -> SupEstimate:
    """Replica average of sup over sampled pairs in B(o, r) of |d_omega - mean|."""
    o = as_point(o)
    lat = _lattice_for(o, lattice)
    xs, ys = sample_pairs(o, r, lat, R_pairs, n_sources, seed=base_seed ^ 0x5EED)
    uniq, inv = np.unique(xs, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    groups = [np.flatnonzero(inv == k) for k in range(len(uniq))]

    def one(i):
        f = OmegaField(law, replica_seed(base_seed, i), lat)
        out = np.empty(len(xs))
        for k, idx in enumerate(groups):
            out[idx] = omega_distances(tuple(uniq[k]), ys[idx], f)
        return out

    vals = np.array(map_ordered(one, range(R_replicas), threads))
    centre = vals.mean(axis=0)
    sups = np.max(np.abs(vals - centre), axis=1)
    env = math.sqrt(r * math.log(r)) if r > 1 else 1.0
    return SupEstimate(float(sups.mean()), float(sups.std(ddof=1) / math.sqrt(R_replicas)), r, env,
                       len(xs), R_replicas, sups)


@dataclass
class DistanceMap:
    """Estimated average distances from the origin on a symmetric region.

    ``mean`` is indexed like ``points``; the estimate at v averages the
    replica distances to v and to -v. ``group_sums`` holds per-group sums for
    delete-a-group jackknife errors of derived statistics.
    """

    points: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    replicas: int
    group_sums: np.ndarray
    group_counts: np.ndarray
    _index: dict = field(default=None, repr=False)

    def index(self) -> dict:
        if self._index is None:
            self._index = {tuple(p): i for i, p in enumerate(self.points.tolist())}
        return self._index

    def lookup(self, offsets) -> np.ndarray:
        idx = self.index()
        offsets = np.atleast_2d(np.asarray(offsets, dtype=np.int64))
        try:
            return self.mean[[idx[tuple(v)] for v in offsets.tolist()]]
        except KeyError as exc:
            raise KeyError(f"offset {exc} outside the estimated region") from None

    def jackknife_means(self) -> np.ndarray:
        """Leave-one-group-out mean maps, shape (groups, points)."""
        tot = self.group_sums.sum(axis=0)
        n = self.group_counts.sum()
        return (tot[None, :] - self.group_sums) / (n - self.group_counts)[:, None]


def mean_distance_map(lat: CayleyLattice, law: WeightLaw, base_seed: int, R: int, radius: int,
                      groups: int = 10, threads: int | None = None) -> DistanceMap:
    """Average distance from the origin to every point of the word ball of ``radius``."""
    if R < groups:
        raise ValueError("need at least one replica per jackknife group")
    origin = (0,) * lat.dim
    pts = word_ball(origin, radius, lat).points
    idx = {tuple(p): i for i, p in enumerate(pts.tolist())}
    neg = np.array([idx[tuple(-c for c in p)] for p in pts.tolist()])

    def one(i):
        f = OmegaField(law, replica_seed(base_seed, i), lat)
        res = search(f, origin, pts)
        d = res.distance_at(pts)
        return 0.5 * (d + d[neg])

    sums = np.zeros((groups, len(pts)))
    sq = np.zeros(len(pts))
    counts = np.zeros(groups)
    block = 64
    for start in range(0, R, block):
        ids = list(range(start, min(R, start + block)))
        for i, row in zip(ids, map_ordered(one, ids, threads)):
            g = i * groups // R
            sums[g] += row
            sq += row * row
            counts[g] += 1
    mean = sums.sum(axis=0) / R
    var = np.maximum(sq / R - mean * mean, 0.0) * R / (R - 1)
    return DistanceMap(pts, mean, np.sqrt(var / R), R, sums, counts)

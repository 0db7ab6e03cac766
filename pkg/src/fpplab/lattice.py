"""Cayley graphs of Z^d and their word metric."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import LatticeError, NotAdjacent, ResourceLimit

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

DEFAULT_POINT_BUDGET = 5_000_000

Point = tuple


def as_point(p: Iterable[int]) -> tuple:
    out = tuple(int(c) for c in p)
    for c in out:
        if not INT64_MIN <= c <= INT64_MAX:
            raise OverflowError(f"coordinate {c} does not fit in 64 bits")
    return out


def add(u: Sequence[int], v: Sequence[int]) -> tuple:
    """Checked vector addition (raises OverflowError instead of wrapping)."""
    return as_point(a + b for a, b in zip(u, v))


def sub(u: Sequence[int], v: Sequence[int]) -> tuple:
    return as_point(a - b for a, b in zip(u, v))


class EdgeKey(NamedTuple):
    base: tuple
    step: tuple


def _spans_integer_lattice(gens: list[tuple], dim: int) -> bool:
    # integer row echelon form by Euclid on each column; unimodular ops only
    rows = [list(g) for g in gens]
    rank = 0
    for col in range(dim):
        while True:
            nz = [i for i in range(rank, len(rows)) if rows[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(rows[i][col]))
            rows[rank], rows[piv] = rows[piv], rows[rank]
            p = rows[rank][col]
            done = True
            for i in range(rank + 1, len(rows)):
                if rows[i][col]:
                    f = rows[i][col] // p
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
                    if rows[i][col]:
                        done = False
            if done:
                break
        if rank < len(rows) and rows[rank][col] != 0:
            if abs(rows[rank][col]) != 1:
                return False
            rank += 1
        else:
            return False
    return rank == dim


@dataclass(frozen=True)
class CayleyLattice:
    """Z^d with a finite symmetric generating set ``generators``.

    Validation happens at construction: the set must be symmetric, avoid 0,
    contain no duplicates and span all of Z^d.
    """

    dim: int
    generators: tuple
    _gen_set: frozenset = field(init=False, repr=False, compare=False)
    _kind: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise LatticeError("dimension must be positive")
        gens = tuple(as_point(g) for g in self.generators)
        for g in gens:
            if len(g) != self.dim:
                raise LatticeError(f"generator {g} has wrong dimension")
            if not any(g):
                raise LatticeError("zero vector is not allowed as a generator")
        if len(set(gens)) != len(gens):
            raise LatticeError("duplicate generators")
        gset = frozenset(gens)
        for g in gens:
            if tuple(-c for c in g) not in gset:
                raise LatticeError(f"generating set not symmetric: missing -{g}")
        if not _spans_integer_lattice(list(gens), self.dim):
            raise LatticeError("generators do not span Z^d")
        # sorted so that every derived quantity is order independent
        gens = tuple(sorted(gens))
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_gen_set", gset)
        object.__setattr__(self, "_kind", self._classify())

    @classmethod
    def from_config(cls, dim: int, generators, symmetrize: bool = False) -> "CayleyLattice":
        gens = [as_point(g) for g in generators]
        if symmetrize:
            seen = list(dict.fromkeys(gens))
            for g in list(seen):
                neg = tuple(-c for c in g)
                if neg not in seen:
                    seen.append(neg)
            gens = seen
        return cls(dim, tuple(gens))

    @classmethod
    def standard(cls, dim: int) -> "CayleyLattice":
        gens = []
        for i in range(dim):
            for s in (1, -1):
                e = [0] * dim
                e[i] = s
                gens.append(tuple(e))
        return cls(dim, tuple(gens))

    @classmethod
    def king(cls, dim: int) -> "CayleyLattice":
        vecs = np.array(np.meshgrid(*[[-1, 0, 1]] * dim, indexing="ij")).reshape(dim, -1).T
        return cls(dim, tuple(tuple(int(c) for c in v) for v in vecs if np.any(v)))

    def _classify(self) -> str:
        if self._gen_set == frozenset(CayleyLattice._std_gens(self.dim)):
            return "l1"
        if len(self.generators) == 3**self.dim - 1 and all(
            max(abs(c) for c in g) == 1 for g in self.generators
        ):
            return "linf"
        return "general"

    @staticmethod
    def _std_gens(dim):
        out = []
        for i in range(dim):
            for s in (1, -1):
                e = [0] * dim
                e[i] = s
                out.append(tuple(e))
        return out

    @property
    def degree(self) -> int:
        return len(self.generators)

    @property
    def gen_array(self) -> np.ndarray:
        return np.array(self.generators, dtype=np.int64).reshape(-1, self.dim)

    @property
    def max_step_l1(self) -> int:
        return max(sum(abs(c) for c in g) for g in self.generators)

    @property
    def max_step_linf(self) -> int:
        return max(max(abs(c) for c in g) for g in self.generators)

    def is_generator(self, v) -> bool:
        return tuple(v) in self._gen_set

    def to_dict(self) -> dict:
        return {"dim": self.dim, "generators": [list(g) for g in self.generators]}


def canonical_edge(u, v, lat: CayleyLattice) -> EdgeKey:
    u = as_point(u)
    v = as_point(v)
    step = sub(v, u)
    if not lat.is_generator(step):
        raise NotAdjacent(f"{u} and {v} are not adjacent")
    if u <= v:
        return EdgeKey(u, step)
    return EdgeKey(v, sub(u, v))


def _bfs_layers(lat: CayleyLattice, radius: int | None, target=None, budget=None):
    """Breadth-first layers around the origin.

    Points are encoded as rows of an int64 array; ``seen`` stores tuples.
    Stops after ``radius`` layers or once ``target`` is reached.
    """
    if budget is None:
        budget = DEFAULT_POINT_BUDGET
    gens = lat.gen_array
    origin = np.zeros((1, lat.dim), dtype=np.int64)
    seen = {tuple([0] * lat.dim)}
    layers = [origin]
    if target is not None and tuple(target) in seen:
        return layers, 0
    r = 0
    frontier = origin
    while radius is None or r < radius:
        cand = (frontier[:, None, :] + gens[None, :, :]).reshape(-1, lat.dim)
        cand = np.unique(cand, axis=0)
        new = [row for row in map(tuple, cand.tolist()) if row not in seen]
        r += 1
        seen.update(new)
        if len(seen) > budget:
            raise ResourceLimit(f"word ball exceeds point budget {budget}")
        frontier = np.array(new, dtype=np.int64).reshape(-1, lat.dim)
        layers.append(frontier)
        if target is not None and tuple(target) in seen:
            return layers, r
    return layers, None


def graph_distance(x, y, lat: CayleyLattice) -> int:
    """Word-metric distance between ``x`` and ``y``."""
    diff = sub(y, x)
    if lat._kind == "l1":
        return sum(abs(c) for c in diff)
    if lat._kind == "linf":
        return max((abs(c) for c in diff), default=0)
    _, r = _bfs_layers(lat, None, target=diff)
    return r


def word_ball(o, r: int, lat: CayleyLattice, budget: int | None = None):
    """Points at word distance at most ``r`` from ``o`` as a PointCloud."""
    from .geometry import PointCloud

    if r < 0:
        raise ValueError("radius must be nonnegative")
    o = as_point(o)
    layers, _ = _bfs_layers(lat, int(r), budget=budget)
    pts = np.concatenate(layers, axis=0) + np.array(o, dtype=np.int64)
    return PointCloud(pts)


def word_distance_map(lat: CayleyLattice, r: int, budget: int | None = None):
    """Dict from offset tuple to word distance for all offsets within radius ``r``."""
    layers, _ = _bfs_layers(lat, int(r), budget=budget)
    out = {}
    for k, layer in enumerate(layers):
        for row in map(tuple, layer.tolist()):
            out[row] = k
    return out


def growth_constant(lat: CayleyLattice) -> float:
    """The K in |B(0,r)| <= K r^d used for the volume-growth check."""
    return (lat.degree + 1) * 3.0**lat.dim

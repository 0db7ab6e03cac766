"""Edge-weight laws and the hashed, seeded weight field omega."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HeavyTailError, LawError
from .lattice import CayleyLattice, EdgeKey

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB

HEAVY_TAILED_KINDS = {"pareto", "lognormal", "cauchy", "student", "levy", "weibull_heavy"}


def fmix64(z: int) -> int:
    """splitmix64 output permutation on a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def mix64(seed: int, words=()) -> int:
    """Hash a seed followed by signed 64-bit words.

    h <- fmix64(seed + GOLDEN); then for each word w: h <- fmix64((h ^ w) + GOLDEN),
    where w is taken as its two's-complement 64-bit pattern.
    """
    h = fmix64((seed + GOLDEN) & MASK64)
    for w in words:
        h = fmix64(((h ^ (int(w) & MASK64)) + GOLDEN) & MASK64)
    return h


def unit_interval(h: int) -> float:
    """Top 53 bits of ``h`` mapped to [0, 1)."""
    return (h >> 11) * 2.0**-53


def replica_seed(base_seed: int, i: int) -> int:
    return mix64(base_seed, (i,))


@dataclass(frozen=True)
class WeightLaw:
    """Edge length distribution.

    ``kind`` is one of ``constant`` (a), ``uniform`` (a=lo, b=hi),
    ``exponential`` (a=rate) and ``atom`` (p0, a=atom value, rest).
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    p0: float = 0.0
    rest: Optional["WeightLaw"] = None

    def __post_init__(self):
        k = self.kind
        if k in HEAVY_TAILED_KINDS:
            raise HeavyTailError(
                f"law '{k}' has no exponential moment; only light-tailed laws are supported"
            )
        if k == "constant":
            if not self.a >= 0:
                raise LawError("constant must be nonnegative")
        elif k == "uniform":
            if not 0 <= self.a < self.b:
                raise LawError("uniform law needs 0 <= lo < hi")
        elif k == "exponential":
            if not self.a > 0:
                raise LawError("exponential rate must be positive")
        elif k == "atom":
            if not 0 <= self.p0 < 1:
                raise LawError("atom mass must lie in [0, 1)")
            if not self.a >= 0:
                raise LawError("atom value must be nonnegative")
            if self.rest is None:
                raise LawError("atom mixture needs a rest law")
        else:
            raise LawError(f"unknown law kind '{k}'")

    # constructors mirroring the config vocabulary
    @classmethod
    def constant(cls, c: float) -> "WeightLaw":
        return cls("constant", a=float(c))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "WeightLaw":
        return cls("uniform", a=float(lo), b=float(hi))

    @classmethod
    def exponential(cls, rate: float) -> "WeightLaw":
        return cls("exponential", a=float(rate))

    @classmethod
    def atom_mixture(cls, p0: float, atom_value: float, rest: "WeightLaw") -> "WeightLaw":
        return cls("atom", a=float(atom_value), p0=float(p0), rest=rest)

    @classmethod
    def from_dict(cls, d: dict) -> "WeightLaw":
        d = dict(d)
        kind = str(d.pop("kind")).lower()
        if kind in HEAVY_TAILED_KINDS:
            raise HeavyTailError(
                f"law '{kind}' has no exponential moment; only light-tailed laws are supported"
            )
        try:
            if kind == "constant":
                return cls.constant(d.get("c", d.get("value")))
            if kind == "uniform":
                return cls.uniform(d["lo"], d["hi"])
            if kind == "exponential":
                return cls.exponential(d["rate"])
            if kind in ("atom", "atom_mixture", "mixture"):
                return cls.atom_mixture(d["p0"], d.get("atom", 0.0), cls.from_dict(d["rest"]))
        except (KeyError, TypeError) as exc:
            raise LawError(f"bad parameters for law '{kind}': {exc}") from exc
        raise LawError(f"unknown law kind '{kind}'")

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "c": self.a}
        if self.kind == "uniform":
            return {"kind": "uniform", "lo": self.a, "hi": self.b}
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.a}
        return {"kind": "atom", "p0": self.p0, "atom": self.a, "rest": self.rest.to_dict()}

    def label(self) -> str:
        if self.kind == "constant":
            return f"Constant({self.a:g})"
        if self.kind == "uniform":
            return f"UniformInterval({self.a:g},{self.b:g})"
        if self.kind == "exponential":
            return f"Exponential({self.a:g})"
        return f"AtomMixture({self.p0:g},{self.a:g},{self.rest.label()})"

    @property
    def has_exponential_moment(self) -> bool:
        return True

    def packed(self):
        """Flat arrays consumed by the compiled kernels."""
        p0s, atoms = [], []
        law = self
        while law.kind == "atom":
            p0s.append(law.p0)
            atoms.append(law.a)
            law = law.rest
        term = {"constant": 0, "uniform": 1, "exponential": 2}[law.kind]
        return (
            np.array(p0s, dtype=np.float64),
            np.array(atoms, dtype=np.float64),
            term,
            float(law.a),
            float(law.b),
        )


def quantile(law: WeightLaw, u: float) -> float:
    """Inverse CDF of ``law`` at ``u`` in [0, 1)."""
    while law.kind == "atom":
        if u < law.p0:
            return law.a
        u = (u - law.p0) / (1.0 - law.p0)
        law = law.rest
    if law.kind == "constant":
        return law.a
    if law.kind == "uniform":
        return law.a + u * (law.b - law.a)
    return -math.log1p(-u) / law.a


def law_mean(law: WeightLaw) -> float:
    if law.kind == "constant":
        return law.a
    if law.kind == "uniform":
        return 0.5 * (law.a + law.b)
    if law.kind == "exponential":
        return 1.0 / law.a
    return law.p0 * law.a + (1.0 - law.p0) * law_mean(law.rest)


def law_variance(law: WeightLaw) -> float:
    return law_second_moment(law) - law_mean(law) ** 2


def law_second_moment(law: WeightLaw) -> float:
    if law.kind == "constant":
        return law.a**2
    if law.kind == "uniform":
        lo, hi = law.a, law.b
        return (hi**3 - lo**3) / (3 * (hi - lo))
    if law.kind == "exponential":
        return 2.0 / law.a**2
    return law.p0 * law.a**2 + (1.0 - law.p0) * law_second_moment(law.rest)


def law_cdf(law: WeightLaw, x: float) -> float:
    """P(omega <= x)."""
    if law.kind == "constant":
        return 1.0 if x >= law.a else 0.0
    if law.kind == "uniform":
        return float(min(1.0, max(0.0, (x - law.a) / (law.b - law.a))))
    if law.kind == "exponential":
        return 0.0 if x < 0 else -math.expm1(-law.a * x)
    return law.p0 * (1.0 if x >= law.a else 0.0) + (1.0 - law.p0) * law_cdf(law.rest, x)


def law_atom(law: WeightLaw, x: float) -> float:
    """Point mass nu({x})."""
    if law.kind == "constant":
        return 1.0 if x == law.a else 0.0
    if law.kind in ("uniform", "exponential"):
        return 0.0
    return law.p0 * (1.0 if x == law.a else 0.0) + (1.0 - law.p0) * law_atom(law.rest, x)


def law_min(law: WeightLaw) -> float:
    """Essential infimum of the law."""
    if law.kind in ("constant", "uniform"):
        return law.a
    if law.kind == "exponential":
        return 0.0
    rest = law_min(law.rest)
    return min(law.a, rest) if law.p0 > 0 else rest


def law_max(law: WeightLaw) -> float:
    """Essential supremum (inf for unbounded laws)."""
    if law.kind == "constant":
        return law.a
    if law.kind == "uniform":
        return law.b
    if law.kind == "exponential":
        return math.inf
    rest = law_max(law.rest)
    return max(law.a, rest) if law.p0 > 0 else rest


def is_degenerate(law: WeightLaw) -> bool:
    return law_min(law) == law_max(law)


@dataclass(frozen=True)
class OmegaField:
    """The random environment omega: a pure function of (seed, edge, law)."""

    law: WeightLaw
    seed: int
    lattice: CayleyLattice

    def __post_init__(self):
        if not 0 <= int(self.seed) <= MASK64:
            raise LawError("seed must be an unsigned 64-bit integer")

    def with_seed(self, seed: int) -> "OmegaField":
        return OmegaField(self.law, seed, self.lattice)


def edge_uniform(seed: int, e: EdgeKey) -> float:
    return unit_interval(mix64(seed, tuple(e.base) + tuple(e.step)))


def edge_weight(field: OmegaField, e: EdgeKey) -> float:
    return quantile(field.law, edge_uniform(field.seed, e))

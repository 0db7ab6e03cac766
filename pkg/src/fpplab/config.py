"""Experiment configuration: a flat TOML document with CLI overrides.

Laws and lattices are written as short strings so that no table nests:

    law = "uniform:1,2"            # also constant:c, exponential:rate,
                                   # atom:p0,value,<law>
    lattice = "standard"           # or "king", or "1,0;-1,0;0,1;0,-1"
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

import tomli
import tomli_w

from .errors import ConfigError, HeavyTailError, LawError
from .lattice import CayleyLattice
from .weights import HEAVY_TAILED_KINDS, WeightLaw


def parse_law(spec: str) -> WeightLaw:
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind in HEAVY_TAILED_KINDS:
        raise HeavyTailError(f"law '{kind}' has no exponential moment")
    try:
        if kind == "atom":
            p0, value, inner = rest.split(",", 2)
            return WeightLaw.atom_mixture(float(p0), float(value), parse_law(inner))
        args = [float(a) for a in rest.split(",")] if rest else []
        if kind == "constant":
            return WeightLaw.constant(*args)
        if kind == "uniform":
            return WeightLaw.uniform(*args)
        if kind == "exponential":
            return WeightLaw.exponential(*args)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise LawError(f"cannot parse law '{spec}': {exc}") from exc
    raise LawError(f"unknown law '{spec}'")


def law_spec(law: WeightLaw) -> str:
    if law.kind == "constant":
        return f"constant:{law.a!r}"
    if law.kind == "uniform":
        return f"uniform:{law.a!r},{law.b!r}"
    if law.kind == "exponential":
        return f"exponential:{law.a!r}"
    return f"atom:{law.p0!r},{law.a!r},{law_spec(law.rest)}"


def parse_lattice(spec: str, dim: int) -> CayleyLattice:
    s = spec.strip().lower()
    if s == "standard":
        return CayleyLattice.standard(dim)
    if s == "king":
        return CayleyLattice.king(dim)
    try:
        gens = [tuple(int(c) for c in g.split(",")) for g in s.split(";") if g.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse lattice '{spec}'") from exc
    return CayleyLattice.from_config(dim, gens)


def parse_point(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(c) for c in text)
    try:
        return tuple(int(c) for c in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse point '{text}'") from exc


def parse_floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(c) for c in text]
    try:
        return [float(c) for c in str(text).split(",") if c.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list '{text}'") from exc


@dataclass
class ExperimentConfig:
    law: str = "uniform:1,2"
    lattice: str = "standard"
    dim: int = 2
    seed: int = 1
    replicas: int = 200
    pair_samples: int = 2000
    radii: list = field(default_factory=lambda: [8, 16, 32, 64])
    output: str = "out"
    threads: int = 0                 # 0: FPP_THREADS or all cores
    point_budget: int = 5_000_000
    vertex_budget: int = 4_000_000
    # per-command parameters
    x: list = field(default_factory=lambda: [0, 0])
    y: list = field(default_factory=lambda: [16, 0])
    lam: float = 0.5
    parts: int = 3
    radius: float = 16.0
    thresholds: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    degree: int = 0                  # 0: degree of the lattice
    r1: float = 8.0
    r2: float = 16.0
    n: int = 3
    points: str = ""                 # "x,y;x,y" for hull-check; empty draws a random set
    oracle: str = "word"
    search_radius: int = 3
    alpha0: float = 8.0
    profile: list = field(default_factory=lambda: [1.0, 0.5, -0.5])
    r_max: int = 0                   # 0: twice the largest radius
    quick: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.replicas < 1 or self.pair_samples < 1:
            raise ConfigError("replica counts must be positive")
        if self.point_budget < 1 or self.vertex_budget < 1:
            raise ConfigError("budgets must be positive")
        if self.threads < 0:
            raise ConfigError("threads must be nonnegative")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ConfigError("radii must be strictly ascending")
        if self.dim < 1:
            raise ConfigError("dimension must be positive")
        self.law_obj()
        self.lattice_obj()

    def law_obj(self) -> WeightLaw:
        return parse_law(self.law)

    def lattice_obj(self) -> CayleyLattice:
        return parse_lattice(self.lattice, self.dim)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for k, v in d.items():
            if isinstance(v, dict):
                raise ConfigError(f"nested table '{k}' not allowed; use a flat document")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(tomli.loads(text))
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc

    def hash(self) -> str:
        """sha256 of the canonical JSON form, ignoring output location and threads."""
        d = self.to_dict()
        d.pop("output")
        d.pop("threads")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

"""Path-counting lower bound on the average distance.

Work with the excess weights omega - a (a the essential infimum). For a gap
delta put lam = nu([a, a + delta]). A walk of n steps whose excess is at most
eps n has at least (1 - eps/delta) n steps of excess <= delta; summing over
the q^n walks gives probability at most (q * stirling_rate(lam, eps/delta))^n.
Once that is below 1/2 for every n >= r0, d-bar >= (a + eps/2) d. Below r0 the
q edges at the starting point all carry excess > delta with probability
(1 - lam)^q, which gives d-bar >= a d + (1 - lam)^q delta.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .weights import WeightLaw, is_degenerate, law_atom, law_cdf, law_max, law_min, quantile

VALID = "Valid"
VIOLATED = "HypothesisViolated"

T_GRID = np.arange(1, 129) / 256.0          # eps/delta in (0, 1/2]
DELTA_LEVELS = 40


def stirling_rate(lam: float, t: float) -> float:
    """lam^(1-t) / (t^t (1-t)^(1-t))."""
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda = {lam} outside (0, 1)")
    if not 0.0 < t < 1.0:
        raise DomainError(f"eps/delta = {t} outside (0, 1)")
    return math.exp((1 - t) * math.log(lam) - t * math.log(t) - (1 - t) * math.log1p(-t))


def entropy_binomial_bound(n: int, k: int) -> float:
    """(n/k)^k (n/(n-k))^(n-k), an upper bound for C(n, k)."""
    if k in (0, n):
        return 1.0
    a = k / n
    return math.exp(n * (-a * math.log(a) - (1 - a) * math.log1p(-a)))


def tail_threshold(rho: float, target: float = 0.5) -> int:
    """Smallest r0 with sum_{n >= r0} e sqrt(n) rho^n <= target."""
    if not 0.0 < rho < 1.0:
        raise DomainError("decay rate must lie in (0, 1)")
    # sum_{n>=N} sqrt(n) rho^n <= sqrt(N) rho^N / (1-rho) * (1 + 1/(2N(1-rho)))
    # crude but valid: sqrt(n) <= sqrt(N) (1 + (n-N)/(2N)); scan N upwards
    def tail(N):
        g = 1 - rho
        return math.e * math.sqrt(N) * rho**N / g * (1 + rho / (2 * N * g))

    N = 1
    while tail(N) > target:
        N = N * 2 if tail(2 * N) > target else N + 1
        if N > 10**9:
            raise DomainError("decay too slow for a finite threshold")
    return N


@dataclass(frozen=True)
class LowerBoundCertificate:
    q: int
    a: float
    delta: float
    lam: float
    epsilon: float
    a_prime: float
    r0: int
    a_doubleprime: float
    status: str
    rho: float = math.nan
    note: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}


def _delta_grid(law: WeightLaw, a: float) -> np.ndarray:
    top = law_max(law)
    if not math.isfinite(top):
        top = quantile(law, 0.5)
    span = top - a
    if span <= 0:
        return np.zeros(0)
    return span * 2.0 ** -np.arange(DELTA_LEVELS)


def lower_bound_certificate(law: WeightLaw, q: int) -> LowerBoundCertificate:
    """Explicit a'' with d-bar(x, y) >= a'' d(x, y) for every x, y."""
    if q < 2:
        raise ValueError("degree must be at least 2")
    a = law_min(law)
    if is_degenerate(law):
        return LowerBoundCertificate(q, a, 0.0, 1.0, 0.0, a, 1, a, VIOLATED,
                                     note="degenerate law: d-bar equals a times the word metric")
    atom = law_atom(law, a)
    if atom >= 1.0 / q:
        return LowerBoundCertificate(q, a, 0.0, atom, 0.0, a, 1, a, VIOLATED,
                                     note=f"nu({{{a:g}}}) = {atom:g} >= 1/{q}")
    best = None
    for delta in map(float, _delta_grid(law, a)):
        lam = law_cdf(law, a + delta)
        if lam >= 1.0 / q or lam <= 0.0:
            continue
        for t in T_GRID:
            rho = q * stirling_rate(lam, float(t))
            if rho >= 1.0:
                break
            eps = float(t) * float(delta)
            r0 = tail_threshold(rho)
            close = (1 - lam) ** q * delta / r0
            gain = min(eps / 2, close)
            if best is None or gain > best[0]:
                best = (gain, delta, lam, eps, rho, r0)
    if best is None:
        return LowerBoundCertificate(q, a, 0.0, atom, 0.0, a, 1, a, VIOLATED,
                                     note="no gap delta with nu([a, a+delta]) < 1/q on the grid")
    gain, delta, lam, eps, rho, r0 = best
    return LowerBoundCertificate(q, a, delta, float(lam), eps, a + eps / 2, r0, a + gain, VALID, float(rho))

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fpplab import _kernels
from fpplab.errors import HeavyTailError, LawError
from fpplab.lattice import CayleyLattice, EdgeKey
from fpplab.weights import (OmegaField, WeightLaw, edge_uniform, edge_weight, fmix64, is_degenerate, law_atom,
                            law_cdf, law_max, law_mean, law_min, law_variance, mix64, quantile, replica_seed)

Z2 = CayleyLattice.standard(2)
LAWS = [
    WeightLaw.constant(1.0),
    WeightLaw.uniform(1.0, 2.0),
    WeightLaw.exponential(1.5),
    WeightLaw.atom_mixture(0.1, 0.0, WeightLaw.constant(1.0)),
    WeightLaw.atom_mixture(0.2, 0.5, WeightLaw.uniform(1.0, 3.0)),
]


def test_fmix64_known_values():
    # splitmix64 finalizer of zero is zero, of one is a fixed constant
    assert fmix64(0) == 0
    assert fmix64(1) == 0x5692161D100B05E5


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(-2**63, 2**63 - 1), max_size=6))
def test_hash_routes_agree(seed, words):
    # keep the state typed as uint64 between calls from Python
    h = np.uint64(_kernels.mix_start(np.uint64(seed)))
    for w in words:
        h = np.uint64(_kernels.mix_word(h, np.int64(w)))
    assert int(h) == mix64(seed, words)


@given(st.integers(0, 2**64 - 1), st.lists(st.tuples(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6)),
                                            min_size=1, max_size=8))
def test_edge_uniforms_routes_agree(seed, bases):
    bases = np.array(bases, dtype=np.int64)
    steps = np.tile(np.array([[0, 1]], dtype=np.int64), (len(bases), 1))
    fast = _kernels.edge_uniforms(np.uint64(seed), bases, steps)
    slow = [edge_uniform(seed, EdgeKey(tuple(b), (0, 1))) for b in bases.tolist()]
    assert fast.tolist() == slow


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.label())
def test_quantile_routes_agree(law):
    p0s, atoms, term, ta, tb = law.packed()
    for u in np.linspace(0, 1, 101, endpoint=False):
        assert _kernels.quantile(u, p0s, atoms, term, ta, tb) == quantile(law, u)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.label())
def test_sample_moments(law):
    f = OmegaField(law, 12345, Z2)
    w = np.array([edge_weight(f, EdgeKey((i, 0), (1, 0))) for i in range(20000)])
    assert abs(w.mean() - law_mean(law)) <= 5 * math.sqrt(law_variance(law) / len(w)) + 1e-12
    assert w.min() >= law_min(law)
    assert w.max() <= law_max(law)


def test_law_queries():
    mix = WeightLaw.atom_mixture(0.1, 0.0, WeightLaw.constant(1.0))
    assert law_atom(mix, 0.0) == pytest.approx(0.1)
    assert law_min(mix) == 0.0
    assert law_cdf(mix, 0.5) == pytest.approx(0.1)
    assert is_degenerate(WeightLaw.constant(2.0))
    assert not is_degenerate(mix)


@pytest.mark.parametrize("bad", [
    {"kind": "uniform", "lo": 2, "hi": 1},
    {"kind": "exponential", "rate": -1},
    {"kind": "atom", "p0": 1.5, "atom": 0, "rest": {"kind": "constant", "c": 1}},
    {"kind": "constant", "c": -1},
    {"kind": "nonsense"},
])
def test_invalid_laws(bad):
    with pytest.raises(LawError):
        WeightLaw.from_dict(bad)


def test_heavy_tails_rejected():
    with pytest.raises(HeavyTailError):
        WeightLaw.from_dict({"kind": "pareto", "alpha": 1.5})


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.label())
def test_law_dict_round_trip(law):
    assert WeightLaw.from_dict(law.to_dict()) == law


def test_replica_seeds_distinct_and_stable():
    seeds = [replica_seed(7, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds[3] == mix64(7, (3,))


def test_field_is_pure_function_of_seed():
    f = OmegaField(LAWS[1], 99, Z2)
    e = EdgeKey((3, -2), (0, 1))
    assert edge_weight(f, e) == edge_weight(OmegaField(LAWS[1], 99, Z2), e)
    assert edge_weight(f, e) != edge_weight(f.with_seed(100), e)

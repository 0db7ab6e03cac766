import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpplab.average import (fit_talagrand, fluctuation_sup, fluctuation_table, mean_distance,
                            mean_distance_map, replica_distances, sample_pairs, talagrand_bound)
from fpplab.lattice import CayleyLattice, graph_distance
from fpplab.oracles import uniform_pair_min_mean
from fpplab.weights import WeightLaw

Z2 = CayleyLattice.standard(2)
U12 = WeightLaw.uniform(1, 2)


def test_two_step_mean_matches_quadrature():
    # d((0,0),(1,1)) is the min over the two 2-step paths when omega >= 1 (any
    # other path has >= 4 steps, so length >= 4 > 2 * 2); quadrature gives E exactly
    exact = uniform_pair_min_mean(1.0, 2.0)
    assert exact == pytest.approx(2.766667, abs=1e-5)
    est = mean_distance((0, 0), (1, 1), U12, 7, 4000)
    assert abs(est.mean - exact) <= 4 * est.std_error


def test_constant_law_gives_scaled_word_metric():
    law = WeightLaw.constant(1.5)
    est = mean_distance((0, 0), (5, -3), law, 1, 10)
    assert est.mean == 1.5 * 8 and est.std_error == 0


@settings(max_examples=15)
@given(st.integers(0, 2**32), st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_bi_lipschitz_sandwich_per_replica(seed, y):
    vals = replica_distances((0, 0), [y], U12, seed, 8)[:, 0]
    d = graph_distance((0, 0), y, Z2)
    assert np.all(vals >= 1.0 * d - 1e-12) and np.all(vals <= 2.0 * d + 1e-12)


def test_replicas_deterministic_and_thread_independent():
    a = replica_distances((0, 0), [(4, 2), (-3, 1)], U12, 11, 12, threads=1)
    b = replica_distances((0, 0), [(4, 2), (-3, 1)], U12, 11, 12, threads=4)
    assert np.array_equal(a, b)
    c = replica_distances((0, 0), [(4, 2), (-3, 1)], U12, 11, 6)
    assert np.array_equal(a[:6], c)


def test_talagrand_bound_values():
    assert talagrand_bound(0.0, 10, 2.0, 1.0) == 2.0
    assert talagrand_bound(2.0, 10, 1.0, 1.0) == pytest.approx(math.exp(-0.4))
    assert talagrand_bound(20.0, 10, 1.0, 1.0) == pytest.approx(math.exp(-20))
    with pytest.raises(ValueError):
        talagrand_bound(-1, 10, 1, 1)


def test_fluctuation_table_and_fit():
    pairs = [((0, 0), (4, 0)), ((0, 0), (6, 3))]
    t = fluctuation_table(pairs, U12, 3, 200, [0.25, 0.5, 1.0, 1.5])
    assert t.frequencies.shape == (2, 4)
    assert np.all(np.diff(t.frequencies, axis=1) <= 0)
    assert t.exceedance(0, 0.5) == pytest.approx(t.frequencies[0, 1])
    # the fitted envelope dominates the data it was fitted on
    assert np.all(t.bound >= t.frequencies - 1e-12)
    assert t.C2 > 0
    with pytest.raises(ValueError):
        fluctuation_table(pairs, U12, 3, 50, [1.0])


def test_fit_with_separate_training_set():
    pairs = [((0, 0), (4, 0))]
    t = fluctuation_table(pairs, U12, 3, 100, [0.25, 0.5], fit=False)
    C1, C2 = fit_talagrand(t, train=np.array([[0.5, 0.1]]))
    assert C1 >= 0.5 and C2 > 0


def test_sample_pairs_exhaustive_and_sampled():
    xs, ys = sample_pairs((0, 0), 1, Z2, 100, 8, 0)
    assert len(xs) == 25 and len({tuple(p) for p in xs}) == 5
    xs, ys = sample_pairs((0, 0), 5, Z2, 300, 4, 0)
    assert len(xs) == 300 and len({tuple(p) for p in xs}) <= 4
    assert all(graph_distance((0, 0), p, Z2) <= 5 for p in np.vstack([xs, ys]).tolist())


def test_fluctuation_sup_constant_law_is_zero():
    s = fluctuation_sup((0, 0), 4, WeightLaw.constant(1), 0, 50, 5)
    assert s.value == 0 and s.envelope == pytest.approx(math.sqrt(4 * math.log(4)))


def test_fluctuation_sup_positive():
    s = fluctuation_sup((0, 0), 6, U12, 0, 200, 20)
    assert 0 < s.value < 6 and s.std_error > 0 and s.ratio == s.value / s.envelope


def test_distance_map():
    m = mean_distance_map(Z2, U12, 5, 40, 4, groups=4)
    idx = m.index()
    assert m.lookup([(0, 0)])[0] == 0
    # symmetrized: v and -v share an estimate
    for p in m.points.tolist():
        q = tuple(-c for c in p)
        assert m.mean[idx[tuple(p)]] == m.mean[idx[q]]
    # agrees with the pairwise estimator for the same replicas
    vals = replica_distances((0, 0), [(3, 1), (-3, -1)], U12, 5, 40)
    assert m.lookup([(3, 1)])[0] == pytest.approx(vals.mean())
    jk = m.jackknife_means()
    assert jk.shape == (4, len(m.points))
    with pytest.raises(KeyError):
        m.lookup([(9, 9)])

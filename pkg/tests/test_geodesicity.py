import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fpplab.errors import EmptySearchRegion, ThresholdViolation
from fpplab.geodesicity import (AverageMetric, NormMetric, OmegaMetric, SagProfile, WordMetric,
                                dyadic_level_constant, dyadic_subdivision,
                                empirical_sagstar_via_geodesics, monotone_ball_check, sag_sequence,
                                sagstar_deficiency, segment_rounding_sequence)
from fpplab.lattice import CayleyLattice, word_ball
from fpplab.oracles import brute_equipartition, brute_sagstar
from fpplab.weights import OmegaField, WeightLaw

Z2 = CayleyLattice.standard(2)
KING = CayleyLattice.king(2)
pts = st.tuples(st.integers(-20, 20), st.integers(-20, 20))
lams = st.sampled_from([0.0, 0.25, 1 / 3, 0.5, 0.7, 1.0])


def _window(x, y, lam, r):
    c = tuple(int(math.floor(a + lam * (b - a) + 0.5)) for a, b in zip(x, y))
    return {tuple(p) for p in word_ball(c, r, Z2).points.tolist()}


@given(pts, pts, lams, st.sampled_from(["word", "l1", "l2", "linf"]))
def test_sagstar_matches_brute_force(x, y, lam, kind):
    assume(x != y)
    o = WordMetric(Z2) if kind == "word" else NormMetric(kind, 2)
    res = sagstar_deficiency(x, y, lam, o, 2)
    z, eps = brute_sagstar(x, y, lam, o.distance, _window(x, y, lam, 2))
    assert res.z == z
    assert res.eps == pytest.approx(eps, abs=1e-12)


@given(pts, pts)
def test_word_metric_is_geodesic(x, y):
    # Z^2 with the word metric has exact midpoints up to parity
    assume(x != y)
    res = sagstar_deficiency(x, y, 0.5, WordMetric(Z2), 1)
    assert res.additive <= 0.5


def test_sagstar_errors():
    o = WordMetric(Z2)
    with pytest.raises(EmptySearchRegion):
        sagstar_deficiency((0, 0), (4, 0), 0.5, o, -1)
    with pytest.raises(ValueError):
        sagstar_deficiency((0, 0), (4, 0), 1.5, o)
    with pytest.raises(ValueError):
        sagstar_deficiency((0, 0), (0, 0), 0.5, o)


def test_sagstar_endpoints():
    o = NormMetric("l2", 2)
    assert sagstar_deficiency((0, 0), (7, 3), 0.0, o).z == (0, 0)
    assert sagstar_deficiency((0, 0), (7, 3), 1.0, o).z == (7, 3)


@settings(max_examples=20)
@given(pts, pts, st.integers(1, 3))
def test_dyadic_subdivision_invariants(x, y, k):
    o = NormMetric("l1", 2)
    assume(o.distance(x, y) / 2**k >= 2)
    res = dyadic_subdivision(x, y, k, o, alpha0=2)
    assert res.parts == 2**k
    assert res.points[0] == x and res.points[-1] == y
    assert res.eps == pytest.approx(res.recompute_eps())
    assert res.A >= 1
    # l1 on Z^2 is geodesic: each midpoint costs at most half a unit
    assert res.distances.sum() == pytest.approx(res.total)
    assert len(res.levels) == k + 1


def test_dyadic_threshold():
    with pytest.raises(ThresholdViolation):
        dyadic_subdivision((0, 0), (8, 0), 2, WordMetric(Z2), alpha0=8)


def test_dyadic_level_constant():
    assert dyadic_level_constant([(0, 8, 8), (1, 4, 4), (2, 2, 2)]) == 0
    C = dyadic_level_constant([(0, 8, 8), (1, 5, 3)])
    assert C == pytest.approx((10 / 8 - 1) * 2 ** (1 / 3))


@settings(max_examples=12)
@given(st.tuples(st.integers(10, 18), st.integers(-4, 4)), st.sampled_from([3, 5]))
def test_sag_sequence_close_to_brute_equipartition(y, m):
    o = NormMetric("l2", 2)
    x = (0, 0)
    res = sag_sequence(x, y, m, o, search_radius=2, alpha0=1)
    assert res.parts == m
    assert res.points[0] == x and res.points[-1] == y
    # brute force over the same windows around the ideal points bounds what is possible
    if m == 3:
        wins = [sorted(_window(x, y, i / m, 1)) for i in range(1, m)]
        _, best = brute_equipartition(x, y, m, o.distance, wins)
        assert res.eps >= best - 1e-12
    # the norm is geodesic; sequences stay within a lattice-rounding error
    assert res.eps * o.distance(x, y) / m <= 3.0


def test_sag_sequence_small_cases():
    o = WordMetric(Z2)
    r = sag_sequence((0, 0), (20, 0), 1, o, alpha0=1)
    assert r.points == [(0, 0), (20, 0)] and r.eps == 0
    r = sag_sequence((0, 0), (20, 0), 4, o, alpha0=1)
    assert r.points == [(0, 0), (5, 0), (10, 0), (15, 0), (20, 0)] and r.eps == 0
    with pytest.raises(ThresholdViolation):
        sag_sequence((0, 0), (20, 0), 5, o)


@given(pts, pts, st.integers(1, 6), st.sampled_from(["l1", "l2", "linf"]))
def test_segment_rounding_within_covering_slack(x, y, m, norm):
    o = NormMetric(norm, 2)
    assume(o.distance(x, y) / m >= 2)
    res = segment_rounding_sequence(x, y, m, o, alpha0=2)
    alpha = o.distance(x, y) / m
    K = o.covering_radius
    assert np.all(np.abs(res.distances - alpha) <= 2 * K + 1e-9)


def test_omega_metric_constant_law():
    f = OmegaField(WeightLaw.constant(2.0), 0, KING)
    o = OmegaMetric(f)
    assert o.distance((0, 0), (3, 1)) == 6.0
    assert o.lower == o.upper == 2.0


def test_average_metric_and_errors():
    law = WeightLaw.uniform(1, 2)
    o = AverageMetric.estimate(Z2, law, 3, 30, 5)
    assert not o.exact
    d = o.distance((1, 1), (3, 2))
    assert d == pytest.approx(o.distance((0, 0), (2, 1)))
    assert 3 <= d <= 6
    assert o.errors_from((0, 0), [(2, 1)])[0] > 0
    r = sagstar_deficiency((0, 0), (4, 0), 0.5, o, 1)
    assert r.std_error > 0


def test_empirical_sagstar_constant_law_is_exact():
    e = empirical_sagstar_via_geodesics((0, 0), (6, 0), 0.5, WeightLaw.constant(1), 0, 4)
    assert e.z == (3, 0) and e.eps == 0 and e.mean_total == 6


def test_empirical_sagstar_random_law():
    e = empirical_sagstar_via_geodesics((0, 0), (10, 0), 0.5, WeightLaw.uniform(1, 2), 5, 20)
    assert 0 <= e.eps < 0.2 and len(e.waypoints) == 20
    assert e.eps == pytest.approx(e.candidate_eps.min())


def test_sag_profile():
    p = SagProfile(1, 0.5, -0.5, 8)
    assert p(16) == pytest.approx(4 / math.sqrt(math.log(16)))
    with pytest.raises(ValueError):
        SagProfile(alpha0=1)
    with pytest.raises(ValueError):
        SagProfile(u=0, v=0)


@pytest.mark.parametrize("lat,kind", [(Z2, "word"), (KING, "word"), (Z2, "l2")])
def test_monotone_balls_for_exact_metrics(lat, kind):
    o = WordMetric(lat) if kind == "word" else NormMetric("l2", 2)
    rep = monotone_ball_check((0, 0), 12, SagProfile(), o)
    assert rep.status == "holds" and rep.big_ball >= rep.small_ball > 0
    assert monotone_ball_check((0, 0), 4, SagProfile(), o).status == "skipped"


def test_monotone_ball_detects_failure():
    # a tiny allowance: with G huge, any nonzero gap fails
    o = WordMetric(Z2)
    rep = monotone_ball_check((0, 0), 9, SagProfile(c=0.5, u=1.0, v=0.0, alpha0=8), o, G=100)
    assert rep.status == "fails" and not rep.holds

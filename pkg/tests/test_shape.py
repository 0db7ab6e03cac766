import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpplab.errors import ResourceLimit
from fpplab.geodesicity import AverageMetric, NormMetric, WordMetric
from fpplab.geometry import (PointCloud, cloud_polytope_hausdorff, convex_hull, direction_set,
                             hausdorff_distance, minkowski_power, minkowski_sum)
from fpplab.lattice import CayleyLattice
from fpplab.oracles import brute_extreme_points, brute_sumset, linf_cloud_hausdorff
from fpplab.shape import (DoublingProfile, LimitNorm, ball_power_sandwich, cauchy_defect,
                          cauchy_defect_with_error, exact_norm_ball, hr_trace, hull_identity_check,
                          limit_norm_estimate, oracle_ball, shape_error_series)
from fpplab.weights import WeightLaw

Z2 = CayleyLattice.standard(2)
KING = CayleyLattice.king(2)

coords = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
clouds = st.lists(coords, min_size=1, max_size=6).map(lambda ps: PointCloud(ps))
sym_clouds = st.lists(coords, min_size=1, max_size=4).map(
    lambda ps: PointCloud(ps + [(-a, -b) for a, b in ps] + [(0, 0)]))


@given(clouds, st.integers(1, 3))
def test_power_matches_brute_sumset(A, n):
    got = {tuple(p) for p in minkowski_power(A, n).points.tolist()}
    assert got == brute_sumset(A.points, n)


@given(clouds, clouds)
def test_sum_commutes(A, B):
    assert minkowski_sum(A, B) == minkowski_sum(B, A)


def test_sumset_budget():
    A = PointCloud([(i, 0) for i in range(10)])
    with pytest.raises(ResourceLimit):
        minkowski_sum(A, A, budget=50)


@given(clouds)
def test_hull_vertices_are_brute_extreme_points(A):
    hull = convex_hull(A)
    assert hull.vertex_set() == brute_extreme_points(A.points)
    assert np.all(hull.contains(A.points))


def _polygon_samples(poly, N=64):
    v = poly.vertices.astype(float)
    if len(v) < 3:
        t = np.linspace(0, 1, N + 1)[:, None]
        return v[0] + t * (v[-1] - v[0])
    out = []
    for i in range(1, len(v) - 1):
        for a in range(N + 1):
            for b in range(N + 1 - a):
                out.append(v[0] + a / N * (v[i] - v[0]) + b / N * (v[i + 1] - v[0]))
    return np.array(out)


@settings(max_examples=25)
@given(clouds)
def test_cloud_polygon_hausdorff_against_sampling(A):
    hull = convex_hull(A)
    exact = cloud_polytope_hausdorff(A, hull, "linf")
    assert isinstance(exact, Fraction)
    s = _polygon_samples(hull)
    tree_val = max(np.min(np.max(np.abs(A.points[None, :, :] - p), axis=2)) for p in s[:, None, :])
    diam = float(np.max(np.abs(hull.vertices[:, None, :] - hull.vertices[None, :, :]))) if len(hull.vertices) else 0
    # the distance-to-cloud function is 1-Lipschitz and samples are diam/64 apart
    assert tree_val <= exact + 1e-12
    assert exact <= tree_val + diam / 64 + 1e-12


def test_known_hausdorff_values():
    diamond = PointCloud([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])
    assert cloud_polytope_hausdorff(diamond, convex_hull(diamond), "linf") == Fraction(1, 2)
    pair = PointCloud([(-1, 0), (1, 0)])
    assert cloud_polytope_hausdorff(pair, convex_hull(pair), "linf") == 1


@given(clouds, clouds)
def test_cloud_hausdorff_matches_quadratic_scan(A, B):
    assert hausdorff_distance(A, B, "linf") == linf_cloud_hausdorff(A.points, B.points)


@settings(max_examples=15)
@given(sym_clouds, st.integers(2, 4))
def test_hull_identity_holds(K, n):
    rep = hull_identity_check(K, n)
    assert rep.passed, rep


def test_hull_identity_input_checks():
    with pytest.raises(ValueError):
        hull_identity_check(PointCloud([(0, 0), (1, 0)]), 3)
    with pytest.raises(ValueError):
        hull_identity_check(PointCloud([(0, 0), (1, 0), (-1, 0)]), 1)


def test_direction_set():
    d = direction_set(2)
    assert d.shape == (256, 2)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1)
    assert np.array_equal(direction_set(5, seed=3), direction_set(5, seed=3))


@pytest.mark.parametrize("lat", [Z2, KING])
def test_word_ball_powers_are_exact(lat):
    rep = ball_power_sandwich(WordMetric(lat), 12, 3)
    assert rep.left_ok and rep.equal and rep.eps_needed == 0 and rep.defect == 0


def test_l2_ball_sandwich():
    rep = ball_power_sandwich(NormMetric("l2", 2), 12, 3)
    assert rep.left_ok and rep.eps_needed < 0.5 and 0 <= rep.defect < 0.2


def test_cauchy_defect_word_metric_is_lattice_spacing():
    # the rescaled balls share a hull; only the coarser grid spacing remains
    assert cauchy_defect(WordMetric(Z2), 8, 16) == Fraction(1, 16)
    assert cauchy_defect(WordMetric(KING), 4, 8) == Fraction(1, 8)


def test_cauchy_defect_exact_fraction():
    # B_2(0, 1.5)/1.5 vs B_2(0, 2)/2 in sup-norm, recomputed by the quadratic scan
    o = NormMetric("l2", 2)
    val = cauchy_defect(o, 3, 5)
    b3 = oracle_ball(o, 3)
    b5 = oracle_ball(o, 5)
    assert val == linf_cloud_hausdorff(b3.points * 5, b5.points * 3) / 15


def test_cauchy_defect_with_error_average_metric():
    o = AverageMetric.estimate(Z2, WeightLaw.uniform(1, 2), 1, 40, 12)
    val, se = cauchy_defect_with_error(o, 4, 8)
    assert 0 <= val <= 1 and se >= 0
    with pytest.raises(ValueError):
        cauchy_defect(o, 0.5, 2)


def test_limit_norm():
    n = exact_norm_ball("l1", 2)
    np.testing.assert_allclose(n([(1, 0), (1, 1), (-2, 3)]), [1, 2, 5])
    m = exact_norm_ball("linf", 3)
    np.testing.assert_allclose(m([(1, -2, 0.5)]), [2])
    est = limit_norm_estimate(WordMetric(Z2), 16)
    np.testing.assert_allclose(est([(3, 4), (-1, 0)]), [7, 1], atol=1e-9)
    with pytest.raises(ValueError):
        exact_norm_ball("l2", 2)
    assert isinstance(est, LimitNorm) and est.dim == 2


def test_shape_series_word_metric_is_flat():
    s = shape_error_series(WordMetric(Z2), [4, 8, 16], exact_norm_ball("l1", 2))
    assert np.all(s.delta == 0) and s.C == 0


def test_shape_series_l2_against_l1_norm():
    # the l2 ball against the l1 gauge: outer defect grows linearly, (sqrt 2 - 1) n
    s = shape_error_series(NormMetric("l2", 2), [4, 8, 16], exact_norm_ball("l1", 2))
    n = np.array([4, 8, 16])
    assert np.all(s.delta_in == 0)
    assert np.all(s.delta_out <= (math.sqrt(2) - 1) * n + 1e-9)
    assert np.all(s.delta_out >= (math.sqrt(2) - 1) * n - 1)
    with pytest.raises(ValueError):
        shape_error_series(WordMetric(Z2), [8, 4], exact_norm_ball("l1", 2))


def test_doubling_profile():
    p = DoublingProfile()
    chk = p.check()
    assert chk["increasing"] and chk["sublinear"]
    assert p.eta(4.0) == pytest.approx(float(np.max(p.phi(4 * np.geomspace(8, 8 * 2**20, 200)) /
                                                   p.phi(np.geomspace(8, 8 * 2**20, 200)))))


def test_hr_trace():
    p = DoublingProfile()
    tr = hr_trace({8: 0.01, 16: 0.01, 32: 0.005}, p, G=1.5, c=1.0, dim=2)
    assert tr.C_prime == 9 and tr.C_second == tr.L * 9 and tr.holds
    bad = hr_trace({8: 1000.0}, p, G=1.5, c=1.0, dim=2)
    assert not bad.holds

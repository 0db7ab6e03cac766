"""The reference implementations checked against closed forms of their own."""
import numpy as np
import pytest

from fpplab.lattice import CayleyLattice
from fpplab.oracles import (brute_equipartition, brute_extreme_points, brute_sagstar, brute_sumset,
                            exhaustive_path_distance, linf_cloud_hausdorff, uniform_pair_min_mean)
from fpplab.weights import OmegaField, WeightLaw


def test_exhaustive_constant_law():
    f = OmegaField(WeightLaw.constant(1.5), 0, CayleyLattice.standard(2))
    assert exhaustive_path_distance((0, 0), (2, 3), f, (0, 0), (3, 3)) == 7.5
    with pytest.raises(ValueError):
        exhaustive_path_distance((0, 0), (5, 5), f, (0, 0), (3, 3))


def test_uniform_pair_min_mean_by_sampling():
    rng = np.random.default_rng(0)
    s = rng.uniform(1, 2, size=(400_000, 4))
    mc = np.minimum(s[:, 0] + s[:, 1], s[:, 2] + s[:, 3]).mean()
    assert uniform_pair_min_mean(1, 2) == pytest.approx(mc, abs=3e-3)
    # degenerate width: E min(S1, S2) of two sums of sure values
    assert uniform_pair_min_mean(0, 1) == pytest.approx(uniform_pair_min_mean(1, 2) - 2, abs=1e-9)


def test_small_brute_helpers():
    assert brute_sumset([(0, 0), (1, 0)], 2) == {(0, 0), (1, 0), (2, 0)}
    sq = [(0, 0), (2, 0), (0, 2), (2, 2), (1, 1), (1, 0)]
    assert brute_extreme_points(sq) == {(0, 0), (2, 0), (0, 2), (2, 2)}
    d = lambda a, b: float(abs(a[0] - b[0]) + abs(a[1] - b[1]))
    z, eps = brute_sagstar((0, 0), (4, 0), 0.5, d, {(1, 0), (2, 0), (2, 1)})
    assert z == (2, 0) and eps == 0
    pts, eps = brute_equipartition((0, 0), (6, 0), 3, d, [[(1, 0), (2, 0)], [(4, 0), (5, 0)]])
    assert pts == [(0, 0), (2, 0), (4, 0), (6, 0)] and eps == 0
    assert linf_cloud_hausdorff([(0, 0)], [(0, 0), (3, -1)]) == 3

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from limitset.constructions.boundary import CantorCircle
from limitset.constructions.gallery import example1, example4, radial
from limitset.dimension import (
    box_dimension_estimate,
    cover_mass,
    hausdorff_upper_bound,
    packing_counts,
    packing_number,
)
from limitset.pointset import PointSetError


def _circle(rng, size):
    t = rng.uniform(0, 2 * np.pi, size)
    return np.c_[np.cos(t), np.sin(t)]


def _assert_valid_packing(F, res):
    C = res.centers
    D = np.linalg.norm(C[:, None, :] - C[None, :, :], axis=2)
    np.fill_diagonal(D, np.inf)
    assert D.min() > 2 * res.delta
    assert np.array_equal(F[res.indices], C)
    to_c = np.linalg.norm(F[:, None, :] - C[None, :, :], axis=2).min(axis=1)
    assert to_c.max() <= 2 * res.delta


def test_packing_of_spread_points_keeps_all():
    F = np.c_[np.arange(6) * 0.5, np.zeros(6)]
    assert packing_number(F, 0.2).count == 6
    assert packing_number(F[:1], 1e-9).count == 1
    assert packing_number(F[:1], 10.0).count == 1
    with pytest.raises(ValueError):
        packing_number(np.empty((0, 2)), 0.1)
    with pytest.raises(ValueError):
        packing_number(F, 0.0)


def test_circle_packing_near_arc_oracle(rng):
    F = _circle(rng, 1000)
    res = packing_number(F, 0.01)
    _assert_valid_packing(F, res)
    assert 0.5 <= res.count / (math.pi / 0.01) <= 2.0


@given(st.integers(0, 10_000), st.floats(0.005, 0.5))
def test_packing_invariants(seed, delta):
    F = np.random.default_rng(seed).uniform(-1, 1, (150, 2))
    res = packing_number(F, delta)
    _assert_valid_packing(F, res)
    # a packing at delta stays a packing for any smaller radius
    D = np.linalg.norm(res.centers[:, None] - res.centers[None], axis=2)
    np.fill_diagonal(D, np.inf)
    assert D.min() > 2 * (0.5 * delta)


def test_packing_is_deterministic_and_order_free(rng):
    F = rng.uniform(-1, 1, (400, 3))
    a = packing_number(F, 0.1)
    b = packing_number(F[rng.permutation(400)], 0.1)
    assert a.count == b.count
    assert np.array_equal(np.sort(a.centers, axis=0), np.sort(b.centers, axis=0))
    assert [r.count for r in packing_counts(F, [0.2, 0.1])] == [packing_number(F, 0.2).count, a.count]


def test_box_dimension_of_circle(rng):
    est = box_dimension_estimate(_circle(rng, 100_000), (3, 10))
    assert abs(est.slope - 1.0) < 0.05
    assert 0 <= est.lower_slope <= est.upper_slope <= 2


def test_box_dimension_of_cantor_circle():
    X = CantorCircle(1 / 3)
    est = box_dimension_estimate(X.sample(12), (3, 12))
    assert abs(est.slope - math.log(2) / math.log(3)) < 0.05
    assert est.lower_slope <= est.upper_slope


def test_box_dimension_single_point_and_degenerate():
    est = box_dimension_estimate(np.array([[0.3, 0.4]]), (2, 8))
    assert est.slope == 0.0
    with pytest.raises(ValueError):
        box_dimension_estimate(np.array([[0.3, 0.4]]), (2, 4))
    assert est.csv().splitlines()[0] == "k,N_2^-k"


def test_radial_sequence_matches_geometric_oracle():
    E = radial(K=60)
    for j in (10, 20, 30):
        # gaps 2^-k for j <= k <= 60; mass sum (2 * 2^-k)^s = 1
        oracle = brentq(lambda s: sum(2.0 ** ((1 - k) * s) for k in range(j, 61)) - 1.0, 1e-9, 2.0)
        s_star = hausdorff_upper_bound(E, 1.0, 2.0 ** -j).s_star
        assert oracle <= s_star <= oracle + 1e-3
    assert hausdorff_upper_bound(E, 1.0, 2.0 ** -30).s_star < hausdorff_upper_bound(E, 1.0, 2.0 ** -10).s_star


def test_example1_bound_shrinks_with_r():
    E = example1(K=60)
    vals = [hausdorff_upper_bound(E, 1.0, 2.0 ** -j).s_star for j in (10, 20, 30)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_bound_monotone_in_budget_and_r():
    E = example4(K=40)
    for j in (8, 16, 24):
        r = 2.0 ** -j
        assert hausdorff_upper_bound(E, 2.0, r, budget=10.0).s_star <= hausdorff_upper_bound(E, 2.0, r).s_star
    s = [hausdorff_upper_bound(E, 2.0, 2.0 ** -j).s_star for j in (8, 16, 24)]
    assert s[0] >= s[1] >= s[2]


def test_cover_mass_closed_form():
    E = radial(K=60)
    s = 0.5
    want = math.fsum((2.0 * 2.0 ** -k) ** s for k in range(20, 61))
    assert cover_mass(E, 1.0, 2.0 ** -20, s) == pytest.approx(want, rel=1e-12)


def test_bound_errors():
    E = radial(K=10)
    with pytest.raises(PointSetError):
        hausdorff_upper_bound(E, 1.0, 2.0 ** -20)
    with pytest.raises(ValueError):
        hausdorff_upper_bound(E, 0.5, 2.0 ** -4)
    with pytest.raises(ValueError):
        hausdorff_upper_bound(E, 1.0, 0.6)
    with pytest.raises(ValueError):
        hausdorff_upper_bound(E, 1.0, 2.0 ** -4, budget=0.0)
    csv = hausdorff_upper_bound(E, 1.0, 2.0 ** -4).csv()
    assert csv.startswith("s,mass\n")

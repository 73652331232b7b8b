import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from limitset.constructions.boundary import CantorCircle, full_circle
from limitset.constructions.gallery import (
    example1,
    example2,
    example4,
    gamma_radial,
    gamma_radial_model,
    radial,
    sharpness,
)
from limitset.constructions.nets import net_construction
from limitset.geometry import chord
from limitset.pointset import PointSetError, dyadic_counts, from_points, truncate
from limitset.regularity import (
    RadialQuery,
    approximate_limit_set,
    approximation_profile,
    gamma_radial_members,
    minimal_radial_constant,
    radial_members,
    regularity_report,
    separation_profile,
    shell_surrogate,
)


def _circle(rng, size):
    t = rng.uniform(0, 2 * np.pi, size)
    return np.c_[np.cos(t), np.sin(t)]


# ---------------------------------------------------------------- surrogates


def test_radial_surrogate_is_one_point():
    S = approximate_limit_set(radial(K=30), 2.0 ** -10)
    assert len(S) == 1
    assert np.allclose(S.points[0], [1.0, 0.0])
    with pytest.raises(PointSetError):
        approximate_limit_set(radial(K=8), 2.0 ** -10)


def test_example1_surrogate_is_a_net(rng):
    K = 24
    S = approximate_limit_set(example1(K=K), 2.0 ** -K)
    assert len(S) == K
    probe = _circle(rng, 10_000)
    d = np.linalg.norm(probe[:, None] - S.points[None], axis=2).min(axis=1)
    # K equally spread points leave no arc longer than 2 pi / K
    assert d.max() <= chord(math.pi / K) + 1e-12


def test_net_surrogate_near_cantor_set():
    X = CantorCircle(1 / 3)
    rho = 2.0 ** -14
    S = approximate_limit_set(net_construction(X, 14), rho)
    assert X.distance(S.points).max() <= 2 * rho


def test_shell_and_resolution():
    E = example4(K=24)
    N = dyadic_counts(E).counts
    # shell 2 below 2^-12 keeps gaps in (2^-14, 2^-12]: levels 12 and 13
    S = approximate_limit_set(E, 2.0 ** -12, shell=2)
    assert S.source_count == N[12] + N[13]
    S2 = approximate_limit_set(E, 2.0 ** -20, beta=0.5)
    assert S2.resolution == 2.0 ** -10
    assert S2.box_range() == (3, 7)
    T = shell_surrogate(E, budget=1 << 14)
    assert T.source_count <= 1 << 14 and T.shell == 1
    with pytest.raises(ValueError):
        approximate_limit_set(E, 2.0 ** -20, beta=0.0)


# ---------------------------------------------------------------- separation


def test_two_point_ratio():
    a = 2 * math.asin(0.25)  # chord 0.25 on the circle of radius 0.5
    E = from_points([[0.5, 0.0], [0.5 * math.cos(a), 0.5 * math.sin(a)]])
    p = separation_profile(E)
    assert p.c1_hat == pytest.approx(0.5, rel=1e-12)
    assert p.is_separated(0.5 - 1e-9) and not p.is_separated(0.6)
    with pytest.raises(PointSetError):
        separation_profile(from_points([[0.1, 0.2]]))


def test_example2_not_separated():
    c = [separation_profile(example2(K=K)).c1_hat for K in (2, 3)]
    assert c[1] < c[0] < 0.01
    assert not separation_profile(example2(K=3)).is_separated(0.01)


def test_sharpness_alpha_fit():
    p = separation_profile(truncate(sharpness(1.25, 0.75, K=40), 20))
    assert abs(p.alpha_fit - 1.25) < 0.05


def test_deep_sets_need_truncation():
    with pytest.raises(PointSetError):
        separation_profile(example1(K=60))


@given(st.integers(0, 10_000), st.integers(2, 400))
def test_separation_matches_brute_force(seed, size):
    r = np.random.default_rng(seed)
    v = r.standard_normal((size, 2))
    x = v / np.linalg.norm(v, axis=1, keepdims=True) * r.uniform(0, 0.999, size)[:, None]
    p = separation_profile(from_points(x))
    D = np.linalg.norm(x[:, None] - x[None], axis=2)
    np.fill_diagonal(D, np.inf)
    assert np.allclose(p.nn_dist, D.min(axis=1), rtol=1e-12, atol=1e-15)
    assert np.allclose(p.ratios, D.min(axis=1) / (1 - np.linalg.norm(x, axis=1)), rtol=1e-9)


def test_separation_brute_force_2000(rng):
    x = _circle(rng, 2000) * rng.uniform(0, 0.99, 2000)[:, None]
    p = separation_profile(from_points(x))
    D = np.linalg.norm(x[:, None] - x[None], axis=2)
    np.fill_diagonal(D, np.inf)
    assert np.allclose(p.nn_dist, D.min(axis=1), rtol=1e-12, atol=1e-15)


@given(st.floats(0.01, 2.0), st.floats(0.0, 1.0))
def test_separation_monotone_in_c1(c, shrink):
    p = separation_profile(truncate(example4(K=20), 20))
    if p.is_separated(c):
        assert p.is_separated(c * shrink)


def test_separated_sets_have_stable_bins():
    # no interior accumulation: counts at fixed k do not change with depth
    a = dyadic_counts(example4(K=20)).counts
    b = dyadic_counts(example4(K=30)).counts
    assert all(a[k] == b[k] for k in range(21))


# ---------------------------------------------------------------- approximation


def test_radial_sequence_ratios_are_one():
    E = radial(K=30)
    a = approximation_profile(E, [[1.0, 0.0]])
    assert np.allclose(a.ratios, 1.0) and a.c2_hat == pytest.approx(1.0)
    assert a.reference_mode == "surrogate"
    with pytest.raises(PointSetError):
        approximation_profile(E, np.empty((0, 2)))


def test_example1_vs_circle_model():
    a = approximation_profile(example1(K=30), full_circle())
    assert a.reference_mode == "model"
    assert a.c2_hat == pytest.approx(1.0)
    assert a.is_well_approximated()


def test_surrogate_reference_ignores_fine_scales():
    E = net_construction(CantorCircle(1 / 3), 20)
    S = approximate_limit_set(E, 2.0 ** -20)
    a = approximation_profile(truncate(E, 14), S)
    assert a.resolution == S.resolution
    assert abs(a.beta_fit - 1.0) < 0.1
    rep = regularity_report(None, a)
    assert rep["reference_mode"] == "surrogate" and rep["c1_hat"] is None


# ---------------------------------------------------------------- radial limit points


def test_radial_membership_chain():
    E = radial(K=30)
    r = radial_members(E, [[1.0, 0.0], [-1.0, 0.0]], RadialQuery(1.0, 1.0, 2.0 ** -30))
    assert r.accepted.tolist() == [True, False]
    assert np.array_equal(r.witness_gaps[0], 2.0 ** -np.arange(31.0))
    assert r.failed_scale[1] == 0.5  # first dyadic scale below 1
    assert r.members.tolist() == [0]


def test_radial_query_validation():
    with pytest.raises(ValueError):
        RadialQuery(c=0.5)
    with pytest.raises(ValueError):
        RadialQuery(gamma=1.5)
    with pytest.raises(ValueError):
        radial_members(radial(K=10), [[1.0, 0.0]], RadialQuery(1.0, 1.0, 2.0 ** -20))
    with pytest.raises(ValueError):
        radial_members(radial(K=10), [[0.5, 0.0]], RadialQuery(1.0, 1.0, 2.0 ** -5))


def test_gamma_radial_midpoints_accepted():
    E = gamma_radial(0.5, 1.0, K=10)
    X = gamma_radial_model(0.5, 1.0)
    Z = X.representatives(6)
    r = gamma_radial_members(E, Z, 4.0, 1.0, 2.0 ** -20)
    assert r.accepted.all()
    # same code path as the plain query
    q = radial_members(E, Z, RadialQuery(4.0, 1.0, 2.0 ** -20))
    assert np.array_equal(q.accepted, r.accepted)


def test_radial_monotone_in_c():
    E = truncate(example4(K=24), 24)
    phi = np.linspace(-0.2, 0.2, 41)
    prev = None
    for c in (1.0, 2.0, 4.0, 8.0):
        acc = radial_members(E, phi, RadialQuery(c, 1.0, 2.0 ** -24)).accepted
        if prev is not None:
            assert np.all(acc[prev])
        prev = acc
    cmin = minimal_radial_constant(E, phi, 1.0, 2.0 ** -24)
    assert cmin[20] == 1.0
    assert np.all(cmin[np.abs(phi) > 0.15] == np.inf)

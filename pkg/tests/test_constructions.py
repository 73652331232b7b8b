import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from limitset.constructions.boundary import CantorCircle, SinglePoint, cantor_circle_ifs, full_circle, model_from_dict
from limitset.constructions.covers import (
    CoverLevel,
    WindowExhausted,
    _select_stage,
    build_cover_family,
    fsigma_merge,
    part_windows,
    vitali_construction,
)
from limitset.constructions.gallery import (
    example1,
    example3,
    example4,
    gallery,
    gamma_radial,
    sharpness,
)
from limitset.constructions.nets import net_construction
from limitset.exponent import accumulation_series, critical_exponent
from limitset.pointset import dyadic_counts, truncate
from limitset.regularity import approximation_profile, radial_members, RadialQuery, separation_profile


def _delta(E, method="regression"):
    return critical_exponent(dyadic_counts(E), method).delta_hat


# ---------------------------------------------------------------- boundary models


def test_moran_dimensions():
    assert CantorCircle(1 / 3).s_sim == pytest.approx(math.log(2) / math.log(3), abs=1e-15)
    assert CantorCircle(1 / 4).s_sim == pytest.approx(0.5, abs=1e-15)
    assert CantorCircle(1 / 3, 3).s_sim == pytest.approx(1.0)
    assert full_circle().s_sim == 1.0
    with pytest.raises(ValueError):
        cantor_circle_ifs(0.6, 2)
    with pytest.raises(ValueError):
        cantor_circle_ifs(0.3, 2, level=0)


def test_first_level_cylinders_disjoint():
    X = CantorCircle(1 / 3)
    lefts = np.sort(X.cylinder_lefts(1))
    L = X.cylinder_length(1)
    assert lefts.size == 2
    assert np.all(lefts + L < np.r_[lefts[1:], lefts[0] + 2 * np.pi])
    assert lefts[-1] + L <= 2 * np.pi + 1e-12


def test_representatives_lie_on_the_model():
    X = CantorCircle(1 / 4)
    for level in (1, 4, 9):
        th = X.representatives(level)
        assert th.size == 2 ** level
        assert X.distance(np.c_[np.cos(th), np.sin(th)]).max() < 1e-12


def test_distance_oracle_against_dense_sample(rng):
    X = CantorCircle(1 / 3)
    S = X.sample(16)
    u = rng.standard_normal((200, 2))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    g = rng.uniform(0.0, 0.5, 200)
    x = (1 - g)[:, None] * u
    brute = np.linalg.norm(x[:, None] - S[None], axis=2).min(axis=1)
    # level-16 cylinders are shorter than 1e-7
    assert np.allclose(X.distance(u, g), brute, atol=1e-6)
    assert np.all(X.distance(u, g) <= brute + 1e-12)


def test_model_round_trip():
    for X in (CantorCircle(0.3, 3), SinglePoint(1.0)):
        Y = model_from_dict(X.describe())
        assert Y.describe() == X.describe()


# ---------------------------------------------------------------- gallery


def test_example1_levels_are_maximal_nets():
    E = example1(K=12)
    for k in range(1, 13):
        layer = E.select_gaps(2.0 ** -k, 2.0 ** (1 - k))
        th = np.sort(np.arctan2(*layer.directions()[:, ::-1].T))
        assert layer.count == k
        if k > 1:
            assert np.allclose(np.diff(np.r_[th, th[0] + 2 * np.pi]), 2 * np.pi / k)


def test_example1_delta_small():
    assert _delta(example1(K=40)) < 0.05


def test_example3_accumulates_inside():
    E = example3(K=8)
    x = E.points()
    assert E.count == 64
    assert np.linalg.norm(x[-1] - x[-2]) < 1e-3
    assert np.abs(np.linalg.norm(x, axis=1) - 0.5).max() < 0.3


def test_example4_defining_predicates():
    E = example4(K=20)
    for k in range(1, 21):
        layer = E.select_gaps(2.0 ** -k, 2.0 ** (1 - k))
        if layer.count == 0:
            continue
        x = layer.points()
        assert np.all(layer.gaps() == 2.0 ** -k)
        assert np.linalg.norm(x - [1.0, 0.0], axis=1).max() <= 2.0 ** -math.sqrt(k) + 1e-15
        if layer.count > 1:
            D = np.linalg.norm(x[1:] - x[:-1], axis=1)
            assert D.min() >= 2.0 ** -k * (1 - 1e-9)  # Cartesian rounding


def test_sharpness_delta_and_predicates():
    E = sharpness(1.25, 0.75, K=40)
    assert abs(_delta(E) - 0.75) < 0.1
    T = truncate(E, 16)
    x = T.points()
    g = T.gaps()
    k = np.ceil(-np.log2(g))
    assert np.all(np.linalg.norm(x - [1.0, 0.0], axis=1) <= 2.0 ** (-k * 0.75) * (1 + 1e-9))
    with pytest.raises(ValueError):
        sharpness(0.9, 0.75)
    with pytest.raises(ValueError):
        sharpness(1.25, 1.5)


def test_gamma_radial_delta():
    assert abs(_delta(gamma_radial(0.5, 1.0, K=30)) - 0.5) < 0.05
    with pytest.raises(ValueError):
        gamma_radial(0.9, 0.5)
    with pytest.raises(ValueError):
        gamma_radial(0.5, 1.5)


def test_gallery_dispatch_and_errors():
    assert gallery("example1", K=6).meta["generator"] == "example1"
    assert gallery("sharpness", K=8, params={"alpha": 1.5, "beta": 1.0}).meta["params"]["alpha"] == 1.5
    with pytest.raises(ValueError):
        gallery("example9")
    with pytest.raises(ValueError):
        gallery("example1", K=3)
    with pytest.raises(ValueError):
        gallery("example2", K=5)


def test_generators_are_seeded():
    a, b = example1(n=3, K=6, seed=4), example1(n=3, K=6, seed=4)
    assert np.array_equal(a.points(), b.points())
    assert not np.array_equal(a.points(), example1(n=3, K=6, seed=5).points())


# ---------------------------------------------------------------- net construction


def test_net_over_cantor_set():
    X = CantorCircle(1 / 3)
    consts = []
    for K in (10, 15, 20):
        N = net_construction(X, K)
        assert np.all(X.distance(N.directions()) <= N.gaps() * (1 + 1e-9))
        consts.append((separation_profile(N).c1_hat, approximation_profile(N, X).c2_hat))
        if K == 20:
            assert abs(_delta(N) - X.s_sim) < 0.05
    c1, c2 = zip(*consts)
    assert max(c1) - min(c1) < 0.05 and max(c2) - min(c2) < 0.05


def test_net_over_full_circle_and_point():
    assert abs(_delta(net_construction(full_circle(), 20)) - 1.0) < 0.05
    P = net_construction(SinglePoint(0.3), 20)
    counts = dyadic_counts(P).counts
    assert max(counts.values()) <= 3
    assert _delta(P) == 0.0
    with pytest.raises(ValueError):
        net_construction(full_circle(), 1)


# ---------------------------------------------------------------- covers and Vitali


def _oracle_level(k, s=0.7):
    # smallest l with 2^l (pi 3^-l)^s < 2^-k
    return next(l for l in range(1, 500) if 2 ** l * (math.pi * 3.0 ** -l) ** s < 2.0 ** -k)


def test_cover_levels_match_formula():
    F = build_cover_family(CantorCircle(1 / 3), 0.7, 12)
    assert [lv.level for lv in F.levels] == [_oracle_level(k) for k in range(1, 13)]
    assert all(F.mass_ok()) and all(F.layers_ok())


def test_cover_near_similarity_dimension():
    X = CantorCircle(1 / 3)
    F = build_cover_family(X, X.s_sim + 1e-3, 3)
    assert F.levels[0].level > 500
    assert all(F.mass_ok()) and all(F.layers_ok())
    with pytest.raises(ValueError):
        build_cover_family(X, X.s_sim, 3)
    with pytest.raises(ValueError):
        build_cover_family(X, 0.7, 1)


def test_cover_contains_cylinders():
    F = build_cover_family(CantorCircle(1 / 3), 0.95, 4)
    assert F.covers_ok() == [True] * 4


def test_vitali_on_cantor_set():
    X = CantorCircle(1 / 3)
    V = vitali_construction(build_cover_family(X, 0.7, 12))
    assert accumulation_series(V, 0.7) < 1.0
    assert _delta(V) <= 0.7
    assert separation_profile(truncate(V, 39)).c1_hat >= 0.5 - 1e-9
    A = approximation_profile(truncate(V, 31), X)  # the first stage, 2^20 points
    assert A.c2_hat <= 4.0


def test_vitali_point_placement():
    V = vitali_construction(build_cover_family(CantorCircle(1 / 3), 0.95, 4))
    T = V.materialize()
    for blk, lv in zip(V.blocks, V.meta["params"]["cover"]["levels"]):
        assert np.all(blk.gaps() == 2.0 ** lv["log2_radius"])
    assert T.count == sum(V.meta["params"]["kept"])


def test_vitali_single_ray():
    V = vitali_construction(build_cover_family(SinglePoint(0.0), 0.5, 10))
    assert V.count == 10
    assert np.allclose(V.directions(), [1.0, 0.0])
    assert _delta(V) == 0.0


def test_overlapping_stage_greedy_selection():
    X = full_circle()
    level = 10
    lv = CoverLevel(1, level, X.cylinder_count(level), X.cover_log2_radius(level), 0.0)
    blk, kept = _select_stage(X, lv, 10 ** 6)
    r = lv.radius
    z = blk.directions()
    D = np.linalg.norm(z[:, None] - z[None], axis=2)
    np.fill_diagonal(D, np.inf)
    assert D.min() > 2 * r  # kept balls disjoint
    th = X.representatives(level)
    centers = np.c_[np.cos(th), np.sin(th)]
    far = np.linalg.norm(centers[:, None] - z[None], axis=2).min(axis=1)
    assert far.max() <= 3 * r  # enlargements cover every center
    assert 0 < kept < lv.count


# ---------------------------------------------------------------- F-sigma merge


def test_part_windows_partition():
    seen = {}
    for m in (1, 2, 3, 4):
        for k in part_windows(m, 256):
            assert k % 2 == 0 and k not in seen
            seen[k] = m
    assert list(part_windows(1, 20)) == [2, 6, 10, 14, 18]
    assert list(part_windows(2, 40)) == [4, 12, 20, 28, 36]
    with pytest.raises(ValueError):
        next(part_windows(0))


@given(st.integers(1, 6), st.integers(1, 300))
def test_window_odd_part(m, j):
    ks = list(part_windows(m, 10 ** 6))
    k = ks[j - 1] if j <= len(ks) else None
    if k is not None:
        w = k // 2
        assert w // (w & -w) % 2 == 1 and (w & -w) == 2 ** (m - 1)


def test_fsigma_of_two_points():
    F = fsigma_merge([(SinglePoint(0.0), 0.5), (SinglePoint(2.0), 0.5)], 6)
    with pytest.warns(RuntimeWarning):
        assert _delta(F) == 0.0
    Z = np.array([[1.0, 0.0], [math.cos(2.0), math.sin(2.0)]])
    res = radial_members(F, Z, RadialQuery(1.0, 1.0, 2.0 ** -10))
    assert res.accepted.all()


def test_fsigma_single_part_is_vitali():
    X = CantorCircle(1 / 3)
    F = fsigma_merge([(X, 0.9)], 4)
    V = vitali_construction(build_cover_family(X, 0.9, 4, windows=part_windows(1), mass_scale=0.5, part=1))
    assert np.array_equal(np.sort(F.gaps()), np.sort(V.gaps()))


def test_fsigma_cantor_pair():
    F = fsigma_merge([(CantorCircle(1 / 3), 0.9), (CantorCircle(1 / 4), 0.9)], 4)
    assert _delta(F, "auto") <= max(math.log(2) / math.log(3), 0.5) + 0.1
    assert separation_profile(F).c1_hat >= 0.4
    params = F.meta["params"]["parts"]
    for m, part in enumerate(params, start=1):
        for lv in part["levels"]:
            assert lv["log2_mass"] < -lv["stage"] - m
            assert lv["window"] in set(part_windows(m, 100))


def test_fsigma_window_exhaustion():
    with pytest.raises(WindowExhausted) as info:
        fsigma_merge([(SinglePoint(0.0), 0.5)], 600)
    assert 0 < info.value.max_feasible < 600

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from limitset.constructions.gallery import example1, example4
from limitset.pointset import (
    PointSetError,
    ScaleBins,
    dyadic_counts,
    from_points,
    from_polar,
    gap_bin,
    load,
    save,
    scale_bin,
    truncate,
)


def _radial(gaps):
    g = np.asarray(gaps, dtype=float)
    return from_points(np.c_[1.0 - g, np.zeros_like(g)])


def _fan(gaps):
    # distinct directions so equal gaps are still distinct points
    g = np.asarray(gaps, dtype=float)
    t = np.linspace(0, 2 * np.pi, len(g), endpoint=False)
    return from_polar(np.c_[np.cos(t), np.sin(t)], g, {"generator": "test", "params": {}, "seed": 0})


def test_gap_bin_left_closed():
    # [2^-k, 2^{1-k}) -> k; exact powers of two open their own bin
    assert gap_bin([1.0, 0.5, 0.3, 0.25, 0.2499, 2.0 ** -60]).tolist() == [0, 1, 2, 2, 3, 60]


def test_scale_bin_examples():
    E = _radial([0.5, 0.25, 0.125])
    assert sorted(scale_bin(E, 0.25).gaps().tolist()) == [0.25]
    assert sorted(scale_bin(E, 0.2).gaps().tolist()) == [0.25]
    with pytest.raises(PointSetError):
        scale_bin(E, 1.0)


def test_single_point_counts():
    S = dyadic_counts(_radial([0.3]))
    assert S.counts[2] == 1
    assert sum(v for k, v in S.counts.items() if k != 2) == 0


def test_example1_counts_match_level_index():
    E = example1(K=10)
    S = dyadic_counts(E)
    assert E.count == 55
    assert all(S.counts[k] == k for k in range(1, 11))
    assert S.counts[0] == 0 and S.depth == 10


def test_example4_counts_match_own_nets():
    E = example4(K=20)
    S = dyadic_counts(E)
    # each level is a 2^-k net of an arc of half-width 2^-sqrt(k) around w
    for k in range(4, 21):
        arc = 2.0 * 2.0 ** -math.sqrt(k)
        assert 0.5 <= S.counts[k] * 2.0 ** -k / arc <= 2.0


def test_dyadic_counts_against_log_oracle(rng):
    g = rng.uniform(1e-9, 1.0, 500)
    S = dyadic_counts(_fan(g))
    oracle = np.ceil(-np.log2(g)).astype(int)  # g in [2^-k, 2^(1-k))
    for k in range(S.depth + 1):
        assert S.counts[k] == int(np.sum(oracle == k))
        assert np.array_equal(S.bins[k], np.flatnonzero(oracle == k))


def test_empty_and_bad_sets_rejected():
    with pytest.raises(PointSetError):
        dyadic_counts(_radial([]))
    with pytest.raises(PointSetError):
        from_points([[1.0, 0.0]])
    with pytest.raises(PointSetError):
        from_points([[0.3, 0.1], [0.3, 0.1]])
    with pytest.raises(PointSetError):
        from_polar([[1.0, 0.0]], [0.5], {"generator": "x", "params": {}})


def test_from_counts_fills_missing_bins():
    S = ScaleBins.from_counts({2: 3, 5: 1})
    assert S.counts == {0: 0, 1: 0, 2: 3, 3: 0, 4: 0, 5: 1}
    assert S.total == 4 and S.depth == 5


def test_truncate_examples():
    E = _radial([0.5, 0.2, 0.01])
    assert sorted(truncate(E, 3).gaps().tolist()) == pytest.approx([0.2, 0.5])
    assert truncate(E, 3).meta["truncation"] == 3
    assert truncate(E, 10) is E
    assert truncate(from_points([[0.0, 0.0], [0.5, 0.0]]), 0).gaps().tolist() == [1.0]
    with pytest.raises(PointSetError):
        truncate(E, -1)


def test_save_load_round_trip(tmp_path, rng):
    v = rng.standard_normal((1000, 3))
    x = v / np.linalg.norm(v, axis=1, keepdims=True) * rng.uniform(0, 0.99, 1000)[:, None]
    E = from_points(x, {"generator": "random", "params": {"size": 1000}, "seed": 12345})
    p = save(E, tmp_path / "pts.txt")
    F = load(p)
    assert np.array_equal(F.points(), E.points())
    assert np.array_equal(F.gaps(), E.gaps())
    assert F.meta["seed"] == 12345 and F.n == 3


def test_round_trip_keeps_tiny_gaps_and_labels(tmp_path):
    E = example1(K=70)
    F = load(save(E, tmp_path / "ex1.txt"))
    assert np.array_equal(F.gaps(), E.gaps())
    assert F.depth == 70
    for k in E.labels:
        assert np.array_equal(F.labels[k], E.labels[k])


def _write(tmp_path, text, name="bad.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("text", [
    "",
    "pointset v2 n=2 count=1 depth=1\n0.5 0\n",
    "pointset v1 n=2 count=2 depth=1\n0.5 0\n",
    "pointset v1 n=3 count=1 depth=1\n0.5 0\n",
    "pointset v1 n=2 count=1 depth=0\n1.0 0\n",
    "pointset v1 n=2 count=1 depth=9\n0.5 0\n",
    "pointset v1 n=2 count=1 depth=1\n0.5 abc\n",
])
def test_load_errors(tmp_path, text):
    with pytest.raises(PointSetError):
        load(_write(tmp_path, text))


def test_load_rejects_sidecar_disagreement(tmp_path):
    p = save(_radial([0.5, 0.25]), tmp_path / "a.txt")
    lines = p.read_text().splitlines()
    lines[1] = "0.1 0"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(PointSetError):
        load(p)


@given(st.lists(st.floats(1e-12, 1.0), min_size=1, max_size=60, unique=True))
def test_partition_and_two_paths_agree(gaps):
    E = _fan(gaps)
    S = dyadic_counts(E)
    assert S.total == E.count
    allidx = np.concatenate([S.bins[k] for k in S.counts])
    assert sorted(allidx.tolist()) == list(range(E.count))
    for k in S.counts:
        if 0 < k:
            assert scale_bin(E, 2.0 ** -k).count == S.counts[k]


@given(st.lists(st.floats(1e-9, 1.0), min_size=1, max_size=40), st.integers(0, 40))
def test_truncate_idempotent(gaps, K):
    E = _fan(gaps)
    once = truncate(E, K)
    assert np.array_equal(truncate(once, K).gaps(), once.gaps())
    assert np.all(once.gaps() >= 2.0 ** -K)

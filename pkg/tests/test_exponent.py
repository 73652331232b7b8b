import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from limitset.constructions.gallery import example1, example2, example4
from limitset.exponent import (
    accumulation_series,
    counts_csv,
    critical_exponent,
    default_window,
    diverging_diagnostic,
    poincare_series,
)
from limitset.pointset import PointSetError, ScaleBins, dyadic_counts, from_points, from_polar
from limitset.regularity import separation_profile


def _set(gaps, n=2):
    g = np.asarray(gaps, dtype=float)
    t = np.linspace(0, 2 * np.pi, len(g), endpoint=False)
    return from_polar(np.c_[np.cos(t), np.sin(t)], g, {"generator": "test", "params": {}, "seed": 0})


def test_series_trivial_cases():
    assert accumulation_series(_set([]), 1.0) == 0.0
    assert accumulation_series(_set([0.5]), 1.0) == 0.5
    with pytest.raises(ValueError):
        accumulation_series(_set([0.5]), -0.1)


def test_series_example1_closed_form():
    # sum_{k<=K} k 2^-k = 2 - (K + 2) / 2^K
    E = example1(K=10)
    assert accumulation_series(E, 1.0) == pytest.approx(1.98828125, rel=1e-14)


def test_poincare_trivial_cases():
    O = from_points([[0.0, 0.0]])
    assert poincare_series(O, 2.7) == 1.0
    E = _set([0.5, 0.25, 0.1])
    assert poincare_series(E, 0.0) == 3.0
    with pytest.raises(ValueError):
        poincare_series(E, -1.0)


@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=50), st.floats(0.0, 3.0))
def test_poincare_termwise_bounds(gaps, s):
    E = _set(gaps)
    S, P = accumulation_series(E, s), poincare_series(E, s)
    assert 2.0 ** -s * S * (1 - 1e-12) <= P <= S * (1 + 1e-12)


@given(st.lists(st.floats(1e-8, 1.0), min_size=1, max_size=50))
def test_series_non_increasing(gaps):
    E = _set(gaps)
    vals = [accumulation_series(E, s) for s in np.linspace(0, 3, 13)]
    assert all(a >= b * (1 - 1e-12) for a, b in zip(vals, vals[1:]))


def test_geometric_counts_both_methods():
    S = ScaleBins.from_counts({k: 2 ** k for k in range(1, 21)})
    for m in ("regression", "limsup", "auto"):
        assert critical_exponent(S, m).delta_hat == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.3, 0.5, 0.9])
def test_synthetic_growth_recovered(t):
    S = ScaleBins.from_counts({k: max(1, round(2 ** (k * t))) for k in range(1, 41)})
    est = critical_exponent(S)
    assert abs(est.delta_hat - t) < 0.02
    lim = critical_exponent(S, "limsup")
    if est.slope_stderr < 0.01:
        assert abs(lim.delta_hat - est.delta_hat) < 0.1


def test_window_is_deepest_half():
    S = ScaleBins.from_counts({k: k for k in range(1, 21)})
    assert default_window(S) == (11, 20)
    few = ScaleBins.from_counts({1: 1, 2: 1, 3: 1})
    with pytest.raises(PointSetError):
        default_window(few)
    with pytest.raises(PointSetError):
        critical_exponent(S, window=(19, 20))
    with pytest.raises(ValueError):
        critical_exponent(S, method="median")


def test_empty_bins_skipped_and_clamped():
    S = ScaleBins.from_counts({2: 64, 4: 32, 6: 16, 8: 8, 10: 4})
    est = critical_exponent(S, window=(2, 10))
    assert est.n_bins == 5 and est.delta_hat == 0.0
    assert est.raw_slope < 0 and any("clamped" in n for n in est.notes)


def test_singletons_warn():
    S = ScaleBins.from_counts({k: 1 for k in range(1, 9)})
    with pytest.warns(RuntimeWarning):
        est = critical_exponent(S)
    assert est.delta_hat == 0.0


def test_auto_switches_on_sparse_windows():
    counts = {4: 4, 12: 200, 20: 30, 28: 600, 36: 64}
    est = critical_exponent(ScaleBins.from_counts(counts), "auto", window=(4, 36))
    assert est.method == "limsup"
    assert est.delta_hat == pytest.approx(max(math.log2(v) / k for k, v in counts.items()))


def test_example1_exponent_vanishes():
    d30 = critical_exponent(dyadic_counts(example1(K=30))).delta_hat
    d40 = critical_exponent(dyadic_counts(example1(K=40))).delta_hat
    assert d40 < 0.05
    assert d40 < d30


def test_example4_exponent_near_one():
    est = critical_exponent(dyadic_counts(example4(K=60)))
    assert abs(est.delta_hat - 1.0) < 0.1


def test_example2_flagged_diverging():
    diag = diverging_diagnostic(dyadic_counts(example2(K=4)), n=2)
    assert diag["diverging"]


def test_separated_set_below_n_minus_1():
    E = example4(K=24)
    assert separation_profile(E).c1_hat > 0
    assert critical_exponent(dyadic_counts(E)).delta_hat <= 1.1


def test_counts_csv():
    text = counts_csv(ScaleBins.from_counts({1: 2, 3: 8}))
    assert text.splitlines() == ["k,N_k,log2_N_k", "0,0,", "1,2,1", "2,0,", "3,8,3"]

"""Accumulation series and critical exponent estimates.

The critical exponent is the convergence abscissa of
``S_E(s) = sum (1 - |x|)^s``. Since ``S_E(s)`` is comparable to
``sum_k N_k 2^{-ks}``, the exponent equals the upper exponential growth rate
of the dyadic counts ``N_k``; both estimators below measure that rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .pointset import DiscretePointSet, PointSetError, ScaleBins


def _fsum_sorted(values: np.ndarray) -> float:
    # sort so the reduction order does not depend on block layout
    return math.fsum(np.sort(values.ravel()))


def accumulation_series(E: DiscretePointSet, s: float) -> float:
    """Partial sum of ``(1 - |x|)^s`` over the stored points."""
    if s < 0:
        raise ValueError("s must be >= 0")
    gs, ms = E.mass_terms()
    if gs.size == 0:
        return 0.0
    return _fsum_sorted(ms * gs ** s)


def poincare_series(orbit: DiscretePointSet, s: float) -> float:
    """``sum ((1 - |x|) / (1 + |x|))^s``; with gap ``g`` a term is ``(g / (2 - g))^s``."""
    if s < 0:
        raise ValueError("s must be >= 0")
    gs, ms = orbit.mass_terms()
    if gs.size == 0:
        return 0.0
    return _fsum_sorted(ms * (gs / (2.0 - gs)) ** s)


@dataclass(frozen=True)
class ExponentEstimate:
    delta_hat: float
    method: str
    window: tuple[int, int]
    slope_stderr: float
    per_k: dict[int, float]
    intercept: float = 0.0
    raw_slope: float = 0.0
    n_bins: int = 0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "delta_hat": self.delta_hat,
            "method": self.method,
            "window": list(self.window),
            "slope_stderr": self.slope_stderr,
            "raw_slope": self.raw_slope,
            "n_bins": self.n_bins,
            "per_k": {str(k): v for k, v in self.per_k.items()},
            "notes": list(self.notes),
        }


def default_window(bins: ScaleBins, min_bins: int = 4) -> tuple[int, int]:
    """Deepest half of the non-empty bins, widened to at least ``min_bins``."""
    ks, _ = bins.nonempty()
    if ks.size < min_bins:
        raise PointSetError(f"need at least {min_bins} non-empty bins, have {ks.size}")
    take = max(min_bins, (ks.size + 1) // 2)
    sel = ks[-take:]
    return int(sel[0]), int(sel[-1])


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares ``y = a x + b``; returns ``(a, b, stderr(a))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise ValueError("degenerate regression")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    a = float(np.sum((x - xm) * (y - ym)) / sxx)
    b = ym - a * xm
    if x.size > 2:
        resid = y - (a * x + b)
        se = math.sqrt(float(np.sum(resid ** 2)) / (x.size - 2) / sxx)
    else:
        se = 0.0
    return a, float(b), se


def critical_exponent(bins: ScaleBins, method: str = "regression",
                      window: tuple[int, int] | None = None) -> ExponentEstimate:
    """Growth rate of ``N_k`` over a window of dyadic indices.

    ``regression``: least-squares slope of ``log2 N_k`` against ``k``.
    ``limsup``: max over the window of ``log2(N_k) / k``.
    ``auto``: regression when the non-empty bins fill at least half of the
    window, else limsup (sparse windowed sets make the regression slope mix
    unrelated layers).
    Empty bins are skipped; negative values are clamped to 0.
    """
    if method not in ("regression", "limsup", "auto"):
        raise ValueError(f"unknown method {method!r}")
    if window is None:
        window = default_window(bins)
    k0, k1 = int(window[0]), int(window[1])
    if k0 > k1 or k0 < 0:
        raise ValueError("invalid window")
    ks, ns = bins.nonempty()
    sel = (ks >= k0) & (ks <= k1)
    ks, ns = ks[sel], ns[sel]
    if ks.size < 4:
        raise PointSetError(f"need at least 4 non-empty bins in window {window}, have {ks.size}")
    logn = np.log2(ns)
    per_k = {int(k): (float(v) / int(k) if k > 0 else 0.0) for k, v in zip(ks, logn)}
    notes = []
    if np.all(ns == 1):
        warnings.warn("all bins in the window are singletons; exponent is 0", RuntimeWarning)
        notes.append("all bins singletons")
    slope, icpt, se = linear_fit(ks, logn)
    if method == "auto":
        fill = ks.size / (k1 - k0 + 1)
        method = "regression" if fill >= 0.5 else "limsup"
        notes.append(f"auto: bin fill {fill:.3f} -> {method}")
    if method == "regression":
        value = slope
    else:
        value = max(v for k, v in per_k.items() if k > 0)
    if value < 0:
        notes.append(f"clamped negative estimate {value:.6g}")
    return ExponentEstimate(
        delta_hat=max(0.0, float(value)),
        method=method,
        window=(k0, k1),
        slope_stderr=se,
        per_k=per_k,
        intercept=icpt,
        raw_slope=slope,
        n_bins=int(ks.size),
        notes=tuple(notes),
    )


def diverging_diagnostic(bins: ScaleBins, n: int, tail: int = 3) -> dict:
    """Flag counts growing faster than any fixed exponential.

    The per-bin ratios ``log2(N_k) / k`` of a set with finite exponent settle
    down; here the last ``tail`` ratios must strictly increase and the last
    must exceed ``n - 1`` (the bound for separated sets).
    """
    ks, ns = bins.nonempty()
    pos = ks > 0
    ks, ns = ks[pos], ns[pos]
    ratios = np.log2(ns) / ks
    last = ratios[-tail:]
    growing = bool(last.size >= 2 and np.all(np.diff(last) > 0))
    exceeds = bool(ratios.size and ratios[-1] > n - 1)
    return {"k": ks.tolist(), "ratios": ratios.tolist(), "growing": growing,
            "exceeds_n_minus_1": exceeds, "diverging": growing and exceeds}


def counts_csv(bins: ScaleBins) -> str:
    """CSV rows ``k,N_k,log2_N_k`` (empty bins have an empty log column)."""
    out = ["k,N_k,log2_N_k"]
    for k in sorted(bins.counts):
        c = bins.counts[k]
        out.append(f"{k},{c}," + (format(math.log2(c), ".17g") if c > 0 else ""))
    return "\n".join(out) + "\n"

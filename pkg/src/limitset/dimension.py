"""Packing numbers, box-dimension slopes and the cover bound for radial limit sets.

Box dimension: ``N_delta`` is the size of a greedy maximal packing by disjoint
closed ``delta``-balls centered in the cloud (centers more than ``2 delta``
apart), and the dimension is the growth rate of ``log2 N_{2^-k}`` in ``k``.

Cover bound: the balls ``B(x, c (1-|x|)^gamma)`` with ``x`` in
``E^r = {1-|x| <= r}`` cover the ``c``-radial limit set, so the smallest ``s``
with ``sum (2c (1-|x|)^gamma)^s <= budget`` bounds its dimension from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from ._parallel import ordered_map
from .exponent import linear_fit
from .pointset import DiscretePointSet, PointSetError


@dataclass(frozen=True)
class PackingResult:
    delta: float
    centers: np.ndarray
    count: int
    indices: np.ndarray  # rows of the input cloud


class _Packer:
    """Greedy packing over one cloud; the tree is shared across scales."""

    def __init__(self, F):
        F = np.asarray(F, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        if F.ndim != 2 or len(F) == 0:
            raise ValueError("point cloud must be a non-empty (N, n) array")
        self.F = F
        # lexicographic processing order, first coordinate most significant
        self.order = np.lexsort(F.T[::-1])
        self.S = F[self.order]
        self.tree = cKDTree(self.S)

    def pack(self, delta: float) -> PackingResult:
        if not delta > 0:
            raise ValueError("delta must be > 0")
        S, tree = self.S, self.tree
        N = len(S)
        reach = 2.0 * delta
        slack = reach * (1.0 + 1e-9) + 1e-300
        dead = np.zeros(N, dtype=bool)
        centers = []
        ptr = 0
        chunk = 4096
        while ptr < N:
            seg = dead[ptr:ptr + chunk]
            if seg.all():
                ptr += seg.size
                continue
            ptr += int(np.argmin(seg))
            centers.append(ptr)
            cand = np.asarray(tree.query_ball_point(S[ptr], slack), dtype=np.intp)
            d = np.linalg.norm(S[cand] - S[ptr], axis=1)
            dead[cand[d <= reach]] = True
            dead[ptr] = True
        idx = self.order[np.asarray(centers, dtype=np.intp)]
        return PackingResult(float(delta), self.F[idx], len(centers), idx)


def packing_number(F, delta: float) -> PackingResult:
    """Greedy maximal ``delta``-packing of the cloud ``F``.

    Points are visited in lexicographic order and kept when farther than
    ``2 delta`` from every kept point; the result is therefore maximal.
    """
    return _Packer(F).pack(delta)


def packing_counts(F, deltas) -> list[PackingResult]:
    """Packings at several scales, run concurrently with ordered results."""
    packer = _Packer(F)
    return ordered_map(packer.pack, [float(d) for d in deltas])


@dataclass(frozen=True)
class BoxDimensionEstimate:
    slope: float
    lower_slope: float
    upper_slope: float
    ks: np.ndarray
    counts: np.ndarray
    slope_stderr: float

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "lower_slope": self.lower_slope,
            "upper_slope": self.upper_slope,
            "slope_stderr": self.slope_stderr,
            "k": self.ks.tolist(),
            "N": self.counts.tolist(),
        }

    def csv(self) -> str:
        rows = ["k,N_2^-k"] + [f"{k},{c}" for k, c in zip(self.ks, self.counts)]
        return "\n".join(rows) + "\n"


def box_dimension_estimate(F, k_range) -> BoxDimensionEstimate:
    """Slopes of ``log2 N_{2^-k}`` against ``k`` over ``k_range = (k_lo, k_hi)``.

    ``slope`` is the least-squares fit. ``lower_slope``/``upper_slope`` are the
    min/max two-point slopes between ``k`` and ``k + w`` with ``w`` half the
    range, which cancels the multiplicative constant in ``N``.
    """
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    ks = np.arange(k_lo, k_hi + 1)
    if ks.size < 4 or k_lo < 0:
        raise ValueError(f"degenerate scale range {k_range}: need at least 4 scales")
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n = F.shape[1]
    res = packing_counts(F, 2.0 ** -ks.astype(float))
    counts = np.array([r.count for r in res])
    logn = np.log2(counts)
    slope, _, se = linear_fit(ks, logn)
    w = max(1, (ks.size + 1) // 2)
    two_pt = (logn[w:] - logn[:-w]) / w
    clamp = lambda v: float(min(max(v, 0.0), n))
    return BoxDimensionEstimate(clamp(slope), clamp(two_pt.min()), clamp(two_pt.max()), ks, counts, se)


@dataclass(frozen=True)
class CoverEstimate:
    s: float
    mass: float
    scale: float


@dataclass(frozen=True)
class HausdorffBound:
    s_star: float
    c: float
    r: float
    gamma: float
    budget: float
    curve: tuple[CoverEstimate, ...]

    def csv(self) -> str:
        rows = ["s,mass"] + [f"{e.s:.17g},{e.mass:.17g}" for e in self.curve]
        return "\n".join(rows) + "\n"


def _log_cover_mass(logd: np.ndarray, logm: np.ndarray, s: float) -> float:
    return float(logsumexp(logm + s * logd))


def cover_mass(E: DiscretePointSet, c: float, r: float, s: float, gamma: float = 1.0) -> float:
    """``sum_{x in E^r} (2c (1-|x|)^gamma)^s``."""
    logd, logm = _cover_terms(E, c, r, gamma)
    return math.exp(_log_cover_mass(logd, logm, s))


def _cover_terms(E, c, r, gamma):
    if c < 1:
        raise ValueError("c must be >= 1")
    if not (0 < gamma <= 1):
        raise ValueError("gamma must lie in (0, 1]")
    gs, ms = E.mass_terms()
    keep = gs <= r
    if not keep.any():
        raise PointSetError(f"no points with gap <= {r!r}")
    g, m = gs[keep], ms[keep]
    return np.log(2.0 * c) + gamma * np.log(g), np.log(m)


def hausdorff_upper_bound(E: DiscretePointSet, c: float, r: float, budget: float = 1.0,
                          gamma: float = 1.0, tol: float = 1e-3,
                          curve_grid: int = 41) -> HausdorffBound:
    """Smallest ``s`` (to ``tol``) with cover mass ``<= budget``.

    Requires ``2 c r^gamma < 1`` so that the mass is decreasing in ``s``.
    """
    if budget <= 0:
        raise ValueError("budget must be > 0")
    if 2.0 * c * r ** gamma >= 1.0:
        raise ValueError("need 2 c r^gamma < 1 so each cover term shrinks with s")
    logd, logm = _cover_terms(E, c, r, gamma)
    logb = math.log(budget)
    f = lambda s: _log_cover_mass(logd, logm, s)
    lo, hi = 0.0, float(E.n)
    if f(lo) <= logb:
        s_star = 0.0
    else:
        while f(hi) > logb:
            hi *= 2.0
            if hi > 1e6:
                raise ValueError("cover mass does not fall below the budget")
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if f(mid) <= logb:
                hi = mid
            else:
                lo = mid
        s_star = hi
    top = max(float(E.n), s_star)
    grid = np.linspace(0.0, top, curve_grid)
    scale = 2.0 * c * r ** gamma
    curve = tuple(CoverEstimate(float(s), math.exp(min(f(s), 700.0)), scale) for s in grid)
    return HausdorffBound(float(s_star), float(c), float(r), float(gamma), float(budget), curve)

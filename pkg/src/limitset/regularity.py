"""Separation, well-approximation, limit-set surrogates and radial membership.

Separated: ``d_NN(x) >= c1 (1-|x|)^alpha``. Well-approximated:
``dist(x, L) <= c2 (1-|x|)^beta``. The exponents are fitted per dyadic bin:
for each bin in the deepest half, the median ``log2 d`` against the median
``log2 gap``, then a least-squares line through those bin medians.

Reference sets for well-approximation are either a ``BoundaryModel`` with an
exact distance oracle (mode ``"model"``) or a point cloud of projections of
deep points (mode ``"surrogate"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .exponent import linear_fit
from .geometry import SpatialIndex, polar_distance
from .pointset import DEFAULT_CAP, DiscretePointSet, PointSetError, dyadic_counts, gap_bin

# Cartesian work needs gaps well above double resolution
CARTESIAN_MIN_GAP = 1e-12

C_GRID = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


def _require_cartesian(E: DiscretePointSet) -> None:
    if not E.is_empty and E.min_gap < CARTESIAN_MIN_GAP:
        raise PointSetError(
            f"set reaches gap {E.min_gap:.3g} < {CARTESIAN_MIN_GAP:g}; "
            "truncate it before Cartesian profiling"
        )


def binned_loglog_slope(gaps: np.ndarray, values: np.ndarray, min_gap: float = 0.0,
                        min_bins: int = 2) -> tuple[float, float, list[tuple[int, float, float]]]:
    """Slope and intercept of median ``log2 value`` vs median ``log2 gap`` per dyadic bin.

    Uses the deepest half of the non-empty bins whose gaps are ``>= min_gap``.
    Returns ``(slope, intercept, [(k, med_log_gap, med_log_value), ...])``.
    """
    g = np.asarray(gaps, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = (g >= min_gap) & (v > 0)
    g, v = g[ok], v[ok]
    if g.size == 0:
        return math.nan, math.nan, []
    k = gap_bin(g)
    uk = np.unique(k)
    take = uk[-max(min_bins, (uk.size + 1) // 2):]
    rows = []
    for kk in take:
        sel = k == kk
        rows.append((int(kk), float(np.median(np.log2(g[sel]))), float(np.median(np.log2(v[sel])))))
    if len(rows) < min_bins:
        return math.nan, math.nan, rows
    xs = np.array([r[1] for r in rows])
    ys = np.array([r[2] for r in rows])
    if np.ptp(xs) == 0:
        return math.nan, math.nan, rows
    a, b, _ = linear_fit(xs, ys)
    return a, b, rows


@dataclass(frozen=True)
class LimitSurrogate:
    """Unit vectors ``x/|x|`` of the points with gap ``<= rho``.

    ``resolution`` is ``rho^beta``: the distance scale below which the cloud
    says nothing about the limit set when points sit within ``c gap^beta`` of
    it.
    """

    points: np.ndarray
    rho: float
    source_count: int
    resolution: float
    shell: int | None = None

    def __len__(self) -> int:
        return len(self.points)

    def box_range(self, k_lo: int = 3, margin: int = 3, k_max: int = 40) -> tuple[int, int]:
        """Dyadic scales at least ``2^margin`` coarser than the resolution."""
        k_hi = min(k_max, int(math.floor(-math.log2(self.resolution))) - margin)
        return k_lo, k_hi


def approximate_limit_set(E: DiscretePointSet, rho: float, cap: int = DEFAULT_CAP,
                          shell: int | None = None, beta: float = 1.0) -> LimitSurrogate:
    """Projections of the points with gap ``<= rho``.

    With ``shell = w`` only gaps in ``(rho 2^-w, rho]`` are used, which keeps
    huge sets within the cap; each dyadic shell of a well-approximated set
    already shadows its limit set to within the same resolution.
    """
    if not (0 < beta <= 1):
        raise ValueError("beta must lie in (0, 1]")
    lo = 0.0 if shell is None else float(np.nextafter(rho * 2.0 ** -int(shell), np.inf))
    deep = E.select_gaps(lo, np.nextafter(rho, np.inf))
    if deep.is_empty:
        raise PointSetError(f"no points with gap <= {rho!r}")
    d = deep.directions(cap)
    u = np.unique(np.ascontiguousarray(d), axis=0)
    return LimitSurrogate(u, float(rho), deep.count, float(rho) ** beta, shell)


SHELL_BUDGET = 1 << 20


def shell_surrogate(E: DiscretePointSet, budget: int = SHELL_BUDGET, beta: float = 1.0,
                    width: int = 1) -> LimitSurrogate:
    """Surrogate from the deepest run of ``width`` dyadic bins holding at most ``budget`` points.

    ``rho`` is the bottom of the coarsest bin used, so every used point has
    gap ``< 2 rho``. Orbits need ``width`` to span one generator step.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    bins = dyadic_counts(E)
    ks, ns = bins.nonempty()
    keep = ks > 0
    ks, ns = ks[keep], ns[keep]
    if ks.size == 0:
        raise PointSetError("no points below the top bin")
    top = None
    for k in ks[::-1]:
        k = int(k)
        lo = k - width + 1
        total = sum(bins.counts.get(j, 0) for j in range(lo, k + 1))
        if total <= budget:
            top = (lo, k)
            break
    if top is None:
        raise PointSetError(f"no run of {width} dyadic bins with at most {budget} points")
    lo, k = top
    lo = max(lo, 1)
    rho = float(np.nextafter(2.0 ** (1 - lo), 0.0))
    S = approximate_limit_set(E, rho, shell=k - lo + 1, beta=beta)
    return LimitSurrogate(S.points, 2.0 ** -lo, S.source_count, 2.0 ** (-lo * beta), k - lo + 1)


@dataclass(frozen=True)
class SeparationProfile:
    gaps: np.ndarray
    nn_dist: np.ndarray
    nn_index: np.ndarray
    ratios: np.ndarray
    c1_hat: float
    alpha_fit: float
    bin_rows: tuple = field(default_factory=tuple)

    def c1_alpha(self, alpha: float) -> float:
        """``min d_NN / gap^alpha``."""
        return float(np.min(self.nn_dist / self.gaps ** alpha))

    def is_separated(self, c1: float, alpha: float = 1.0) -> bool:
        return self.c1_alpha(alpha) >= c1


def separation_profile(E: DiscretePointSet, cap: int = DEFAULT_CAP) -> SeparationProfile:
    """Nearest-neighbour distances and ratios ``d_NN(x) / (1 - |x|)``."""
    if E.count < 2:
        raise PointSetError("separation needs at least two points")
    _require_cartesian(E)
    g = E.gaps(cap)
    u = E.directions(cap)
    x = (1.0 - g)[:, None] * u
    nn, _ = SpatialIndex(x).all_nearest()
    d = polar_distance(u, g, u[nn], g[nn])
    ratios = d / g
    slope, _, rows = binned_loglog_slope(g, d)
    return SeparationProfile(g, d, nn, ratios, float(ratios.min()), float(slope), tuple(rows))


@dataclass(frozen=True)
class ApproximationProfile:
    gaps: np.ndarray
    dist: np.ndarray
    ratios: np.ndarray
    c2_hat: float
    beta_fit: float
    reference_mode: str
    resolution: float
    bin_rows: tuple = field(default_factory=tuple)

    def c2_beta(self, beta: float) -> float:
        return float(np.max(self.dist / self.gaps ** beta))

    def ratio_trend(self) -> list[tuple[int, float]]:
        """Median ``dist/gap`` per fitted bin; growth means ``beta < 1``."""
        return [(k, 2.0 ** (lv - lg)) for k, lg, lv in self.bin_rows]

    def is_well_approximated(self, tol: float = 0.1) -> bool:
        return bool(np.isfinite(self.beta_fit) and self.beta_fit >= 1.0 - tol)


def approximation_profile(E: DiscretePointSet, reference, min_gap: float | None = None,
                          cap: int = DEFAULT_CAP) -> ApproximationProfile:
    """Distances from each point to the reference set and their fit.

    ``reference`` is a ``BoundaryModel``, a :class:`LimitSurrogate`, or an
    ``(M, n)`` array of unit vectors. With a surrogate the fit ignores gaps
    below ``8 * resolution`` unless ``min_gap`` says otherwise.
    """
    g = E.gaps(cap)
    u = E.directions(cap)
    if hasattr(reference, "distance") and hasattr(reference, "nearest_angle"):
        dist = reference.distance(u, g)
        mode, res = "model", 0.0
    else:
        if isinstance(reference, LimitSurrogate):
            Z, res = reference.points, reference.resolution
        else:
            Z, res = np.atleast_2d(np.asarray(reference, dtype=float)), 0.0
        if Z.size == 0:
            raise PointSetError("empty reference set")
        _require_cartesian(E)
        x = (1.0 - g)[:, None] * u
        _, j = cKDTree(Z).query(x, k=1)
        dist = polar_distance(u, g, Z[j], 0.0)
        mode = "surrogate"
    if min_gap is None:
        min_gap = 8.0 * res
    ratios = dist / g
    slope, _, rows = binned_loglog_slope(g, dist, min_gap=min_gap)
    fit = g >= min_gap
    c2 = float(ratios[fit].max()) if fit.any() else math.nan
    return ApproximationProfile(g, dist, ratios, c2, float(slope), mode, float(res), tuple(rows))


def regularity_report(sep: SeparationProfile | None, approx: ApproximationProfile | None) -> dict:
    return {
        "c1_hat": sep.c1_hat if sep else None,
        "alpha_fit": sep.alpha_fit if sep else None,
        "c2_hat": approx.c2_hat if approx else None,
        "beta_fit": approx.beta_fit if approx else None,
        "reference_mode": approx.reference_mode if approx else None,
        "resolution": approx.resolution if approx else None,
    }


# ---------------------------------------------------------------- radial


@dataclass(frozen=True)
class RadialQuery:
    c: float = 1.0
    gamma: float = 1.0
    resolution: float = 2.0 ** -12

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if not (0 < self.gamma <= 1):
            raise ValueError("gamma must lie in (0, 1]")
        if not (0 < self.resolution <= 1):
            raise ValueError("resolution must lie in (0, 1]")

    def scales(self) -> np.ndarray:
        J = int(math.floor(-math.log2(self.resolution) + 1e-12))
        return 2.0 ** -np.arange(0, J + 1, dtype=float)


@dataclass(frozen=True)
class RadialResult:
    accepted: np.ndarray          # (M,) bool
    witness_gaps: np.ndarray      # (M, J+1), nan where no witness
    failed_scale: np.ndarray      # (M,), nan when accepted
    query: RadialQuery

    @property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.accepted)


def _as_boundary(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = np.column_stack([np.cos(Z), np.sin(Z)])
    nrm = np.linalg.norm(Z, axis=1)
    if np.any(np.abs(nrm - 1.0) > 1e-12):
        raise ValueError("candidate points must lie on the unit sphere")
    return Z / nrm[:, None]


def _satisfying_gaps(E: DiscretePointSet, z: np.ndarray, q: RadialQuery, floor: float) -> np.ndarray:
    """Gaps of all points ``x`` with ``|x - z| <= c (1-|x|)^gamma`` (gap >= floor)."""
    found = []
    for b in E.blocks:
        bg, _ = b.gap_mass()
        if bg.max() < floor:
            continue
        if b.lazy:
            g = float(bg[0])
            R = q.c * g ** q.gamma
            if R < g:
                continue
            s2 = (R * R - g * g) / (4.0 * (1.0 - g))
            dtheta = 2.0 * math.asin(min(1.0, math.sqrt(s2)))
            dirs, gaps = b.near(z, dtheta * (1 + 1e-9) + 1e-15)
        else:
            dirs, gaps = b.near(z, math.pi)
        if gaps.size == 0:
            continue
        keep = gaps >= floor
        dirs, gaps = dirs[keep], gaps[keep]
        d = polar_distance(dirs, gaps, z[None, :], 0.0)
        ok = d <= q.c * gaps ** q.gamma
        if ok.any():
            found.append(gaps[ok])
    return np.concatenate(found) if found else np.empty(0)


def radial_members(E: DiscretePointSet, Z, q: RadialQuery, floor: float = 1e-13) -> RadialResult:
    """Accept ``z`` iff every dyadic ``r`` from 1 to ``q.resolution`` has a witness.

    A witness for ``r`` is a point with gap ``<= r`` inside the cone
    ``|x - z| <= c (1-|x|)^gamma``. The chain records, for each ``r``, the
    largest such gap. Points with gap below ``floor`` are not searched: their
    angles are not resolved in double precision.
    """
    if q.resolution < 2.0 ** -E.depth:
        raise ValueError("resolution is finer than the deepest scale present in E")
    if q.resolution < floor:
        raise ValueError(f"resolution below the precision floor {floor:g}")
    Z = _as_boundary(Z)
    scales = q.scales()
    M = len(Z)
    W = np.full((M, scales.size), np.nan)
    failed = np.full(M, np.nan)
    for i, z in enumerate(Z):
        gs = np.sort(_satisfying_gaps(E, z, q, floor))
        for j, r in enumerate(scales):
            pos = np.searchsorted(gs, r, side="right")
            if pos > 0:
                W[i, j] = gs[pos - 1]
            elif np.isnan(failed[i]):
                failed[i] = r
    accepted = np.isnan(failed)
    return RadialResult(accepted, W, failed, q)


def gamma_radial_members(E: DiscretePointSet, Z, c: float, gamma: float, resolution: float) -> RadialResult:
    return radial_members(E, Z, RadialQuery(c, gamma, resolution))


def minimal_radial_constant(E: DiscretePointSet, Z, gamma: float, resolution: float,
                            c_grid=C_GRID) -> np.ndarray:
    """Smallest ``c`` on the grid accepting each ``z`` (``inf`` if none)."""
    Z = _as_boundary(Z)
    out = np.full(len(Z), np.inf)
    todo = np.ones(len(Z), dtype=bool)
    for c in c_grid:
        if not todo.any():
            break
        res = radial_members(E, Z[todo], RadialQuery(c, gamma, resolution))
        idx = np.flatnonzero(todo)
        hit = idx[res.accepted]
        out[hit] = c
        todo[hit] = False
    return out

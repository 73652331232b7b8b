"""Ball geometry: boundary gaps, hyperbolic distances, sphere nets, spatial index.

Points are rows of an ``(N, n)`` array or single length-``n`` vectors. The
hyperbolic model is the Poincare ball, where

    d_H(0, x) = log((1 + |x|) / (1 - |x|)).

Usage::

    >>> import numpy as np
    >>> from limitset.geometry import boundary_gap, hyperbolic_distance_origin
    >>> boundary_gap(np.array([0.6, 0.0]))
    0.4
    >>> round(hyperbolic_distance_origin(np.array([0.5, 0.0])), 12)
    1.098612288668
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

# Cartesian points this close to the unit sphere are rejected: their
# gaps no longer carry enough precision for distance computations.
BOUNDARY_TOL = 1e-12


def _as_points(x, n_min: int = 2) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < n_min:
        raise ValueError(f"expected points of dimension >= {n_min}, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def _check_interior(norms: np.ndarray) -> None:
    if np.any(norms >= 1.0 - BOUNDARY_TOL):
        worst = float(norms.max())
        raise ValueError(
            f"point with |x| = {worst!r} is not in the open ball "
            f"(must satisfy |x| < 1 - {BOUNDARY_TOL:g})"
        )


def boundary_gap(x):
    """Return ``1 - |x|`` for one point or each row of an array."""
    arr = _as_points(x)
    norms = np.linalg.norm(arr, axis=1)
    _check_interior(norms)
    out = 1.0 - norms
    return float(out[0]) if np.ndim(x) == 1 else out


def hyperbolic_distance_origin(x):
    """Poincare distance from the origin, ``log((1+|x|)/(1-|x|))``."""
    arr = _as_points(x)
    norms = np.linalg.norm(arr, axis=1)
    _check_interior(norms)
    out = np.log1p(norms) - np.log1p(-norms)
    return float(out[0]) if np.ndim(x) == 1 else out


def hyperbolic_distance_origin_from_gap(gap):
    """Same distance written in terms of the gap ``g = 1 - |x|``.

    ``log((2 - g) / g)`` stays accurate for gaps far below machine epsilon,
    where ``|x|`` itself would round to 1.
    """
    g = np.asarray(gap, dtype=float)
    return np.log(2.0 - g) - np.log(g)


def hyperbolic_distance(x, y):
    """Poincare distance between points (rows broadcast against each other).

    Uses ``arccosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2)))``. For nearby points
    the equivalent ``2 asinh(|x-y| / sqrt((1-|x|^2)(1-|y|^2)))`` form is used,
    which avoids the loss of precision in ``arccosh`` near 1.
    """
    xa = _as_points(x)
    ya = _as_points(y)
    if xa.shape[1] != ya.shape[1]:
        raise ValueError("dimension mismatch")
    nx = np.linalg.norm(xa, axis=1)
    ny = np.linalg.norm(ya, axis=1)
    _check_interior(nx)
    _check_interior(ny)
    diff = np.linalg.norm(xa - ya, axis=1)
    denom = np.sqrt((1.0 - nx) * (1.0 + nx) * (1.0 - ny) * (1.0 + ny))
    out = 2.0 * np.arcsinh(diff / denom)
    scalar = np.ndim(x) == 1 and np.ndim(y) == 1
    return float(out[0]) if scalar else out


def euclidean_from_hyperbolic(d, x_norm, y_norm):
    """Invert :func:`hyperbolic_distance` for the Euclidean separation."""
    return np.sinh(np.asarray(d) / 2.0) * np.sqrt((1 - x_norm**2) * (1 - y_norm**2))


def polar_distance(u, g, v, h):
    """Euclidean distance between ``(1-g) u`` and ``(1-h) v`` for unit ``u, v``.

    Written as ``sqrt((g-h)^2 + (1-g)(1-h)|u-v|^2)`` so the radial part is exact
    even when the gaps are far below double resolution.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    duv = np.sum((u - v) ** 2, axis=-1)
    return np.sqrt((g - h) ** 2 + (1.0 - g) * (1.0 - h) * duv)


def chord(theta):
    """Chord length of an arc of angle ``theta`` on the unit circle."""
    return 2.0 * np.sin(np.minimum(np.abs(theta), np.pi) / 2.0)


def arc_of_chord(c):
    """Angle subtended by a chord of length ``c <= 2``."""
    return 2.0 * np.arcsin(np.clip(np.asarray(c, dtype=float) / 2.0, 0.0, 1.0))


def sphere_net(n: int, r: float, seed: int = 0, max_points: int = 2_000_000) -> np.ndarray:
    """Maximal ``r``-separated subset of the unit sphere in R^n.

    Circle (n=2): ``m = floor(2 pi / a)`` equally spaced points with
    ``a = 2 arcsin(r/2)`` and a seeded random rotation. Equal spacing gives
    gaps in ``[a, 2a)``, hence separation ``>= r`` and every point of the
    circle within ``r`` of the net.

    n >= 3: greedy insertion from a seeded random candidate cloud, repeated
    with fresh probes until a full probe round inserts nothing.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (0.0 < r < 2.0):
        raise ValueError("r must lie in (0, 2)")
    rng = np.random.default_rng(seed)
    if n == 2:
        a = float(arc_of_chord(r))
        m = max(int(math.floor(2.0 * math.pi / a)), 1)
        if m > max_points:
            raise ValueError(f"net would have {m} points (cap {max_points})")
        theta = rng.uniform(0.0, 2.0 * math.pi) + 2.0 * math.pi * np.arange(m) / m
        return np.column_stack([np.cos(theta), np.sin(theta)])

    est = int(8.0 * (2.0 / r) ** (n - 1)) + 64
    if est > max_points:
        raise ValueError(f"net needs about {est} candidates (cap {max_points})")
    net: list[np.ndarray] = []
    tree = None
    probes = max(est, 10_000)
    while True:
        cand = rng.standard_normal((probes, n))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        added = 0
        batch: list[np.ndarray] = []
        for p in cand:
            if tree is not None and tree.query(p, k=1)[0] < r:
                continue
            if batch and np.min(np.linalg.norm(np.asarray(batch) - p, axis=1)) < r:
                continue
            batch.append(p)
            added += 1
        if batch:
            net.extend(batch)
            tree = cKDTree(np.asarray(net))
        if added == 0:
            break
        probes = 10_000
    return np.asarray(net)


def farthest_point_subset(points: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Greedy farthest-point selection of ``k`` rows, seeded start."""
    pts = np.asarray(points, dtype=float)
    if not (1 <= k <= len(pts)):
        raise ValueError("k must be between 1 and the number of points")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(len(pts)))]
    dist = np.linalg.norm(pts - pts[chosen[0]], axis=1)
    for _ in range(k - 1):
        j = int(np.argmax(dist))
        chosen.append(j)
        dist = np.minimum(dist, np.linalg.norm(pts - pts[j], axis=1))
    return pts[chosen]


@dataclass(frozen=True)
class Neighbor:
    index: int
    point: np.ndarray
    distance: float


class SpatialIndex:
    """Exact nearest-neighbour and ball queries over a fixed point cloud.

    A k-d tree proposes candidates; the final decision uses the same
    Euclidean norm as a linear scan, so results match brute force exactly.
    """

    def __init__(self, points):
        pts = _as_points(points, n_min=1)
        if len(pts) == 0:
            raise ValueError("empty point cloud")
        self.points = pts
        self._tree = cKDTree(pts)

    def __len__(self) -> int:
        return len(self.points)

    def query_ball(self, x, radius: float) -> np.ndarray:
        """Sorted indices of points with ``|p - x| <= radius``."""
        x = np.asarray(x, dtype=float)
        slack = radius * (1.0 + 1e-9) + 1e-300
        cand = np.asarray(self._tree.query_ball_point(x, slack), dtype=np.intp)
        if cand.size == 0:
            return cand
        d = np.linalg.norm(self.points[cand] - x, axis=1)
        return np.sort(cand[d <= radius])

    def nearest(self, x, exclude_self: bool = False) -> Neighbor:
        """Closest indexed point; ``exclude_self`` skips points equal to ``x``."""
        x = np.asarray(x, dtype=float)
        if exclude_self and len(self.points) < 2:
            raise ValueError("need at least two points when excluding self")
        k = min(len(self.points), 4)
        _, idx = self._tree.query(x, k=k)
        idx = np.atleast_1d(idx)
        d = np.linalg.norm(self.points[idx] - x, axis=1)
        if exclude_self:
            d[np.all(self.points[idx] == x, axis=1)] = np.inf
        if np.isfinite(d).any():
            j = int(np.argmin(d))
            i = int(idx[j])
            return Neighbor(i, self.points[i], float(d[j]))
        # every candidate was a copy of x; fall back to a scan
        d = np.linalg.norm(self.points - x, axis=1)
        d[np.all(self.points == x, axis=1)] = np.inf
        i = int(np.argmin(d))
        return Neighbor(i, self.points[i], float(d[i]))

    def all_nearest(self) -> tuple[np.ndarray, np.ndarray]:
        """Nearest other point for every indexed point: ``(indices, distances)``."""
        if len(self.points) < 2:
            raise ValueError("need at least two points")
        k = min(len(self.points), 4)
        _, idx = self._tree.query(self.points, k=k)
        rows = np.arange(len(self.points))
        # re-rank a few candidates by the exact norm so rounding ties in the
        # tree cannot disagree with a linear scan
        d = np.linalg.norm(self.points[idx] - self.points[:, None, :], axis=2)
        d[idx == rows[:, None]] = np.inf
        j = np.argmin(d, axis=1)
        nn = idx[rows, j]
        return nn, d[rows, j]


def nearest_neighbor(index: SpatialIndex, x, exclude_self: bool = False) -> tuple[np.ndarray, float]:
    """Functional form of :meth:`SpatialIndex.nearest`: ``(point, distance)``."""
    nb = index.nearest(x, exclude_self=exclude_self)
    return nb.point, nb.distance

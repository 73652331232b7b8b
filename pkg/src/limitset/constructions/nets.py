"""Net construction above a closed boundary set.

For each ``k`` take a maximal ``2^-k``-separated net ``{y}`` of the circle and
keep ``(1 - 2^-k) y`` whenever ``dist(y, X) <= 2^-k``. The union over
``k <= K`` is separated and well-approximated, and its exponent tracks the
upper box dimension of X.
"""

from __future__ import annotations

import math

import numpy as np

from ..geometry import arc_of_chord
from ..pointset import ArcBlock, DiscretePointSet, ExplicitBlock
from .boundary import BoundaryModel, TWO_PI


def circle_net_level(k: int, rng) -> tuple[float, float, int]:
    """``(theta0, step, m)`` of the level-``k`` circle net.

    ``m = floor(2 pi / a)`` equally spaced points with ``a = 2 arcsin(r/2)``
    is ``r``-separated and ``r``-covering (see ``geometry.sphere_net``).
    """
    r = 2.0 ** -k
    a = float(arc_of_chord(r))
    m = max(int(math.floor(TWO_PI / a)), 1)
    return float(rng.uniform(0.0, TWO_PI)), TWO_PI / m, m


def _net_indices_near(intervals, theta0, step, m):
    out = []
    for lo, hi in intervals:
        j0 = math.ceil((lo - theta0) / step)
        j1 = math.floor((hi - theta0) / step)
        if j1 - j0 + 1 >= m:
            return np.arange(m)
        if j1 >= j0:
            out.append(np.arange(j0, j1 + 1) % m)
    if not out:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(out))


def net_construction(X: BoundaryModel, K: int, seed: int = 0) -> DiscretePointSet:
    if K < 2:
        raise ValueError("K must be >= 2")
    rng = np.random.default_rng(seed)
    blocks = []
    for k in range(1, K + 1):
        r = 2.0 ** -k
        theta0, step, m = circle_net_level(k, rng)
        if getattr(X, "full", False):
            blocks.append(ArcBlock(r, theta0, step, m))
            continue
        tol = float(arc_of_chord(r)) * (1.0 + 1e-9)
        j = _net_indices_near(X.candidate_intervals(tol), theta0, step, m)
        th = theta0 + step * j
        dirs = np.column_stack([np.cos(th), np.sin(th)])
        keep = X.distance(dirs, 0.0) <= r
        if keep.any():
            blocks.append(ExplicitBlock(dirs[keep], np.full(int(keep.sum()), r)))
    meta = {"generator": "net_construction", "params": {"K": K, "X": X.describe()}, "seed": seed}
    return DiscretePointSet(2, blocks, meta)

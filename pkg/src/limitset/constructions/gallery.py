"""Counterexample gallery.

=============  ==========================================================
id             points at level ``k``
=============  ==========================================================
example1       ``k`` equally spread points at gap ``2^-k``
example2       gaps ``1/log j`` (``j >= 3``) on one ray
example3       a sequence accumulating at an interior point
example4       maximal ``2^-k``-separated points at gap ``2^-k`` within
               ``2^-sqrt(k)`` of ``w``
sharpness      maximal ``2^-k alpha``-separated points with gap in
               ``[2^-k, 2^(1-k))`` within ``2^-k beta`` of ``w``
gamma-radial   one point per level-``k`` cylinder of a circle IFS with
               ratio ``2^(-gamma/t)``, at gap ``2^(-k/t)``
radial         gaps ``2^-k`` on the ray to ``w`` (``k = 0..K``)
=============  ==========================================================

Example usage::

    >>> E = gallery("example1", n=2, K=10, seed=7)
    >>> E.count
    55
"""

from __future__ import annotations

import math

import numpy as np

from ..geometry import farthest_point_subset
from ..pointset import ArcBlock, CylinderBlock, DiscretePointSet, ExplicitBlock
from .boundary import CantorCircle, TWO_PI

GALLERY_IDS = ("example1", "example2", "example3", "example4", "sharpness", "gamma-radial", "radial")

# one part in 1e12 of extra angular step keeps rounded chords >= the
# separation radius
_STEP_SLACK = 1.0 + 1e-12


def _meta(name, n, K, seed, **params):
    p = {"n": n, "K": K}
    p.update(params)
    return {"generator": name, "params": p, "seed": seed}


def _unit(n, angle=0.0):
    u = np.zeros(n)
    u[0], u[1] = math.cos(angle), math.sin(angle)
    return u


def _sphere_cloud(n, rng, size):
    v = rng.standard_normal((size, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def example1(n: int = 2, K: int = 30, seed: int = 0) -> DiscretePointSet:
    rng = np.random.default_rng(seed)
    blocks = []
    for k in range(1, K + 1):
        g = 2.0 ** -k
        if n == 2:
            blocks.append(ArcBlock(g, rng.uniform(0.0, TWO_PI), TWO_PI / k, k))
        else:
            cloud = _sphere_cloud(n, rng, max(64 * k, 512))
            blocks.append(ExplicitBlock(farthest_point_subset(cloud, k, seed=int(rng.integers(2**31))), np.full(k, g)))
    return DiscretePointSet(n, blocks, _meta("example1", n, K, seed))


EXAMPLE2_MAX_K = 4


def example2(n: int = 2, K: int = 4, seed: int = 0) -> DiscretePointSet:
    """Gaps ``1/log j`` for ``j >= 3`` down to ``2^-K``: ``log j <= 2^K`` points."""
    if K > EXAMPLE2_MAX_K:
        raise ValueError(f"example2 has about e^(2^K) points; K <= {EXAMPLE2_MAX_K} is supported")
    jmax = int(math.floor(math.exp(2.0 ** K)))
    j = np.arange(3, jmax + 1, dtype=float)
    gaps = 1.0 / np.log(j)
    gaps = gaps[gaps >= 2.0 ** -K]
    return DiscretePointSet(n, [ExplicitBlock(_unit(n)[None, :], gaps)], _meta("example2", n, K, seed))


def example3(n: int = 2, K: int = 8, seed: int = 0, center_norm: float = 0.5) -> DiscretePointSet:
    """``x_j = w + (1-|w|) e / (2 j)`` for ``j = 1..K^2``; accumulates at ``w``."""
    rng = np.random.default_rng(seed)
    w = center_norm * _unit(n, rng.uniform(0.0, TWO_PI))
    e = _sphere_cloud(n, rng, 1)[0]
    j = np.arange(1, K * K + 1, dtype=float)
    x = w[None, :] + ((1.0 - center_norm) / (2.0 * j))[:, None] * e[None, :]
    nrm = np.linalg.norm(x, axis=1)
    return DiscretePointSet(n, [ExplicitBlock(x / nrm[:, None], 1.0 - nrm)],
                            _meta("example3", n, K, seed, center_norm=center_norm))


def _arc_layer(gap, sep, radius_to_w, w_angle):
    """Points at one gap, chord spacing ``sep``, within ``radius_to_w`` of ``w``.

    Returns ``None`` when the layer misses the ball around ``w``.
    """
    R = 1.0 - gap
    if radius_to_w < gap:
        return None
    a = 2.0 * math.asin(min(1.0, sep / (2.0 * R))) * _STEP_SLACK
    s2 = (radius_to_w ** 2 - gap ** 2) / (4.0 * R)
    theta_max = 2.0 * math.asin(min(1.0, math.sqrt(max(s2, 0.0))))
    theta_max = min(theta_max, math.pi)
    J = int(math.floor(theta_max / a))
    # the layer may not wrap around the circle onto itself
    J = min(J, int(math.floor((math.pi - 1e-12) / a)))
    return ArcBlock(gap, w_angle - J * a, a, 2 * J + 1)


def _cap_layer(n, gap, sep, radius_to_w, w, rng, max_points=200_000):
    """Greedy ``sep``-separated filling of a spherical cap (n >= 3)."""
    R = 1.0 - gap
    if radius_to_w < gap:
        return None
    cos_max = 1.0 - (radius_to_w ** 2 - gap ** 2) / (2.0 * R)
    est = int(40 * (radius_to_w / sep) ** (n - 1)) + 200
    if est > max_points:
        raise ValueError("cap filling too large for n >= 3 at this depth")
    cand = _sphere_cloud(n, rng, est * 4)
    cand = cand[cand @ w >= cos_max]
    cand = np.vstack([w[None, :], cand])
    kept = []
    for p in cand:
        if all(R * np.linalg.norm(p - q) >= sep for q in kept):
            kept.append(p)
    return ExplicitBlock(np.asarray(kept), np.full(len(kept), gap))


def example4(n: int = 2, K: int = 60, seed: int = 0, w_angle: float = 0.0) -> DiscretePointSet:
    rng = np.random.default_rng(seed)
    blocks = []
    for k in range(1, K + 1):
        g = 2.0 ** -k
        D = 2.0 ** -math.sqrt(k)
        if n == 2:
            blk = _arc_layer(g, g, D, w_angle)
        else:
            blk = _cap_layer(n, g, g, D, _unit(n, w_angle), rng)
        if blk is not None:
            blocks.append(blk)
    return DiscretePointSet(n, blocks, _meta("example4", n, K, seed, w_angle=w_angle))


def sharpness(alpha: float = 1.25, beta: float = 0.75, K: int = 40, n: int = 2, seed: int = 0,
              w_angle: float = 0.0) -> DiscretePointSet:
    """Layers at gaps ``2^-k + i 2^(-k alpha)`` inside ``[2^-k, 2^(1-k))``.

    Layer spacing and in-layer chord spacing are both ``2^(-k alpha)``, so
    the set is ``alpha``-separated; every point is within ``2^(-k beta)`` of
    ``w``.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not (0 < beta <= 1):
        raise ValueError("beta must lie in (0, 1]")
    if n != 2:
        raise ValueError("the sharpness generator is implemented for n = 2")
    blocks = []
    for k in range(1, K + 1):
        lo = 2.0 ** -k
        h = 2.0 ** (-k * alpha)
        D = 2.0 ** (-k * beta)
        layers = math.ceil(2.0 ** (k * (alpha - 1.0)) - 1e-9)
        for i in range(layers):
            g = lo + i * h
            if g >= 2.0 * lo:
                break
            blk = _arc_layer(g, h, D, w_angle)
            if blk is not None:
                blocks.append(blk)
    return DiscretePointSet(2, blocks, _meta("sharpness", 2, K, seed, alpha=alpha, beta=beta,
                                             w_angle=w_angle))


def gamma_radial_model(t: float, gamma: float) -> CantorCircle:
    return CantorCircle(2.0 ** (-gamma / t), 2)


def gamma_radial(t: float = 0.5, gamma: float = 1.0, K: int = 30, seed: int = 0) -> DiscretePointSet:
    if not (0 < gamma <= 1):
        raise ValueError("gamma must lie in (0, 1]")
    if not (0 < t <= gamma):
        raise ValueError("need 0 < t <= gamma")
    X = gamma_radial_model(t, gamma)
    blocks = [CylinderBlock(2.0 ** (-k / t), X, k) for k in range(1, K + 1)]
    return DiscretePointSet(2, blocks, _meta("gamma-radial", 2, K, seed, t=t, gamma=gamma))


def radial(n: int = 2, K: int = 30, seed: int = 0, w_angle: float = 0.0) -> DiscretePointSet:
    gaps = 2.0 ** -np.arange(0, K + 1, dtype=float)
    return DiscretePointSet(n, [ExplicitBlock(_unit(n, w_angle)[None, :], gaps)],
                            _meta("radial", n, K, seed, w_angle=w_angle))


def gallery(example_id: str, n: int = 2, K: int = 30, params: dict | None = None,
            seed: int = 0) -> DiscretePointSet:
    """Dispatch to a generator by id; ``params`` carries alpha/beta or t/gamma."""
    params = dict(params or {})
    if example_id not in GALLERY_IDS:
        raise ValueError(f"unknown example id {example_id!r}; choose from {GALLERY_IDS}")
    if example_id != "radial" and K < 4:
        raise ValueError("depth K must be >= 4")
    if n < 2:
        raise ValueError("n must be >= 2")
    if example_id == "example1":
        return example1(n, K, seed)
    if example_id == "example2":
        return example2(n, K, seed)
    if example_id == "example3":
        return example3(n, K, seed, **params)
    if example_id == "example4":
        return example4(n, K, seed, **params)
    if example_id == "sharpness":
        return sharpness(K=K, n=n, seed=seed, **params)
    if example_id == "gamma-radial":
        if n != 2:
            raise ValueError("gamma-radial lives in the disk (n = 2)")
        return gamma_radial(K=K, seed=seed, **params)
    return radial(n, K, seed, **params)

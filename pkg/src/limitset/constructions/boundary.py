"""Closed subsets of the unit circle given by a distance oracle.

``CantorCircle(rho, m)`` is the attractor of ``f_i(t) = rho t + 2 pi i / m``
acting on angles. Its convex hull (as an arc starting at angle 0) has length
``Theta = 2 pi (m-1) / (m (1 - rho))`` and level-``l`` cylinders are arcs of
length ``Theta rho^l``. When ``m rho = 1`` the attractor is the whole circle.

Each cylinder has a representative point of the set, the image of
``rho Theta`` (right end of the first child). Every point of the cylinder is
within arc ``(1 - rho) Theta rho^l`` of it, which is ``pi rho^l`` for ``m = 2``.

Usage::

    >>> X = CantorCircle(1/3, 2)
    >>> round(X.s_sim, 4)
    0.6309
    >>> float(X.distance(np.array([[1.0, 0.0]]))[0])
    0.0
"""

from __future__ import annotations

import math

import numpy as np

from ..geometry import arc_of_chord, chord

TWO_PI = 2.0 * math.pi


def _wrap(phi):
    return np.mod(phi, TWO_PI)


def _angdiff(a, b):
    d = np.abs(_wrap(np.asarray(a) - np.asarray(b)))
    return np.minimum(d, TWO_PI - d)


class BoundaryModel:
    """Interface shared by the circle models."""

    n = 2
    s_sim: float
    closed_form: str = ""

    def nearest_angle(self, phi) -> tuple[np.ndarray, np.ndarray]:
        """``(angle of nearest point of X, angular distance)`` for each ``phi``."""
        raise NotImplementedError

    def distance(self, directions, gaps=0.0) -> np.ndarray:
        """Euclidean distance from ``(1-g) u`` to X.

        Uses ``|x - z|^2 = g^2 + 4 (1-g) sin^2(D/2)`` where ``D`` is the angle
        between ``u`` and the nearest point ``z``; the radial part stays exact
        for tiny gaps.
        """
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        g = np.broadcast_to(np.asarray(gaps, dtype=float), (len(u),))
        phi = np.arctan2(u[:, 1], u[:, 0])
        _, dphi = self.nearest_angle(phi)
        return np.sqrt(g ** 2 + 4.0 * (1.0 - g) * np.sin(dphi / 2.0) ** 2)

    def distance_points(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        nrm = np.linalg.norm(x, axis=1)
        u = np.where(nrm[:, None] > 0, x / np.where(nrm > 0, nrm, 1.0)[:, None], [1.0, 0.0])
        return self.distance(u, 1.0 - nrm)

    # cylinder structure ------------------------------------------------
    def cylinder_count(self, level: int) -> int:
        raise NotImplementedError

    def representatives(self, level: int, cap: int = 5_000_000) -> np.ndarray:
        raise NotImplementedError

    def representatives_near(self, level: int, phi: float, dtheta: float) -> np.ndarray:
        raise NotImplementedError

    def cover_log2_radius(self, level: int) -> float:
        """``log2`` of the chord radius of a ball at a representative covering its cylinder."""
        raise NotImplementedError

    def min_center_spacing(self, level: int) -> float:
        """Lower bound on the angle between distinct level representatives."""
        raise NotImplementedError

    def candidate_intervals(self, tol: float) -> list[tuple[float, float]]:
        """Angular intervals whose union contains every angle within ``tol`` of X."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class CantorCircle(BoundaryModel):
    """Self-similar subset of the circle with ``m`` maps of ratio ``rho``."""

    def __init__(self, ratio: float, maps: int = 2):
        ratio = float(ratio)
        maps = int(maps)
        if maps < 2:
            raise ValueError("need at least 2 maps")
        if not (0.0 < ratio < 1.0):
            raise ValueError("ratio must lie in (0, 1)")
        if maps * ratio > 1.0 + 1e-15:
            raise ValueError(f"m * rho = {maps * ratio} > 1 violates the open set condition")
        self.ratio = ratio
        self.maps = maps
        self.full = abs(maps * ratio - 1.0) <= 1e-15
        self.hull = TWO_PI if self.full else TWO_PI * (maps - 1) / (maps * (1.0 - ratio))
        self.offsets = TWO_PI * np.arange(maps) / maps
        self.rep_offset = ratio * self.hull
        self.s_sim = 1.0 if self.full else math.log(maps) / math.log(1.0 / ratio)
        self.closed_form = f"{maps} * {ratio!r}^s = 1"

    def describe(self) -> dict:
        return {"model": "cantor_circle", "ratio": self.ratio, "maps": self.maps,
                "s_sim": self.s_sim, "full_circle": self.full}

    def __repr__(self) -> str:
        return f"CantorCircle(ratio={self.ratio!r}, maps={self.maps})"

    # distance oracle ---------------------------------------------------
    def nearest_angle(self, phi):
        phi = _wrap(np.atleast_1d(np.asarray(phi, dtype=float)))
        if self.full:
            return phi.copy(), np.zeros_like(phi)
        m, rho, hull = self.maps, self.ratio, self.hull
        step = TWO_PI / m
        child = rho * hull
        u = phi.copy()
        origin = np.zeros_like(phi)
        scale = np.ones_like(phi)
        near = phi.copy()
        dist = np.zeros_like(phi)
        live = np.ones(phi.shape, dtype=bool)
        levels = int(math.ceil(60.0 / -math.log2(rho))) + 2
        for _ in range(levels):
            if not live.any():
                break
            idx = np.flatnonzero(live)
            uu = u[idx]
            i = np.clip(np.floor(uu / step), 0, m - 1)
            lo = i * step
            hi = lo + child
            inside = uu <= hi
            # points in a gap: nearest edge is a point of X
            gap = idx[~inside]
            if gap.size:
                ug = u[gap]
                left = hi[~inside]
                right = lo[~inside] + step
                use_left = (ug - left) <= (right - ug)
                edge = np.where(use_left, left, right)
                near[gap] = origin[gap] + scale[gap] * edge
                dist[gap] = scale[gap] * np.abs(ug - edge)
                live[gap] = False
            deeper = idx[inside]
            origin[deeper] += scale[deeper] * lo[inside]
            scale[deeper] *= rho
            u[deeper] = (u[deeper] - lo[inside]) / rho
        # undecided points are within one deep cylinder of X
        near = _wrap(near)
        return near, dist

    # cylinders ---------------------------------------------------------
    def cylinder_count(self, level):
        return self.maps ** int(level)

    def cylinder_length(self, level):
        return self.hull * self.ratio ** level

    def cylinder_lefts(self, level: int, cap: int = 5_000_000) -> np.ndarray:
        if self.cylinder_count(level) > cap:
            raise ValueError(f"{self.cylinder_count(level)} cylinders at level {level} exceed cap {cap}")
        lefts = np.zeros(1)
        for j in range(level):
            lefts = (lefts[:, None] + self.offsets[None, :] * self.ratio ** j).ravel()
        return lefts

    def representatives(self, level, cap=5_000_000):
        return self.cylinder_lefts(level, cap) + self.rep_offset * self.ratio ** level

    def representatives_near(self, level, phi, dtheta):
        """Representatives within angle ``dtheta`` of ``phi`` (descends the cylinder tree)."""
        rho, hull = self.ratio, self.hull
        lo = phi - dtheta
        hi = phi + dtheta
        lefts = np.zeros(1)
        for j in range(level):
            lefts = (lefts[:, None] + self.offsets[None, :] * rho ** j).ravel()
            length = hull * rho ** (j + 1)
            keep = np.zeros(lefts.shape, dtype=bool)
            for shift in (-TWO_PI, 0.0, TWO_PI):
                keep |= (lefts + shift <= hi) & (lefts + shift + length >= lo)
            lefts = lefts[keep]
            if lefts.size == 0:
                return lefts
        reps = lefts + self.rep_offset * rho ** level
        ok = _angdiff(reps, phi) <= dtheta
        return np.sort(reps[ok])

    def cover_arc(self, level):
        return max(self.rep_offset, self.hull - self.rep_offset) * self.ratio ** level

    def cover_log2_radius(self, level):
        base = max(self.rep_offset, self.hull - self.rep_offset)
        log2_arc = math.log2(base) + level * math.log2(self.ratio)
        if log2_arc > -60:
            arc = 2.0 ** log2_arc
            return math.log2(float(chord(arc)))
        return log2_arc  # chord and arc agree to double precision

    def min_center_spacing(self, level):
        step = TWO_PI / self.maps
        if level <= 1:
            return step if level == 1 else TWO_PI
        gap = step - self.ratio * self.hull
        same_parent = step * self.ratio ** (level - 1)
        if self.full:
            return same_parent
        return min(same_parent, gap * self.ratio ** (level - 2))

    def candidate_intervals(self, tol):
        if self.full:
            return [(0.0, TWO_PI)]
        # deepest level whose cylinders are still longer than tol
        level = 0
        while self.cylinder_length(level + 1) > tol and self.cylinder_count(level + 1) <= 1_000_000:
            level += 1
        lefts = self.cylinder_lefts(level)
        length = self.cylinder_length(level)
        return [(float(a - tol), float(a + length + tol)) for a in lefts]

    def sample(self, level: int, cap: int = 5_000_000) -> np.ndarray:
        """Unit vectors at the level representatives (a finite sample of X)."""
        th = self.representatives(level, cap)
        return np.column_stack([np.cos(th), np.sin(th)])

    def contains_angle(self, phi, tol: float = 1e-12) -> np.ndarray:
        return self.nearest_angle(phi)[1] <= tol


class SinglePoint(BoundaryModel):
    """``X = {w}``; cover levels use the radii ``2^-l``."""

    s_sim = 0.0

    def __init__(self, angle: float = 0.0):
        self.angle = float(_wrap(angle))
        self.closed_form = "point"

    def describe(self):
        return {"model": "single_point", "angle": self.angle, "s_sim": 0.0}

    def __repr__(self):
        return f"SinglePoint(angle={self.angle!r})"

    @property
    def point(self):
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    def nearest_angle(self, phi):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        return np.full(phi.shape, self.angle), _angdiff(phi, self.angle)

    def cylinder_count(self, level):
        return 1

    def representatives(self, level, cap=5_000_000):
        return np.array([self.angle])

    def representatives_near(self, level, phi, dtheta):
        return np.array([self.angle]) if _angdiff(phi, self.angle) <= dtheta else np.empty(0)

    def cover_log2_radius(self, level):
        return -float(level)

    def min_center_spacing(self, level):
        return TWO_PI

    def candidate_intervals(self, tol):
        return [(self.angle - tol, self.angle + tol)]

    def sample(self, level=0, cap=5_000_000):
        return self.point[None, :]


def full_circle() -> CantorCircle:
    return CantorCircle(0.5, 2)


def cantor_circle_ifs(ratio: float, maps: int = 2, level: int = 1) -> CantorCircle:
    """Circle IFS model; ``level`` is validated and used for the default sample depth."""
    if level < 1:
        raise ValueError("level must be >= 1")
    X = CantorCircle(ratio, maps)
    X.default_level = int(level)
    return X


def model_from_dict(d: dict) -> BoundaryModel:
    kind = d.get("model")
    if kind == "cantor_circle":
        return CantorCircle(d["ratio"], d["maps"])
    if kind == "single_point":
        return SinglePoint(d["angle"])
    raise ValueError(f"unknown boundary model {kind!r}")

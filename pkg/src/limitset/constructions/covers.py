"""Cylinder cover families, Vitali selection and the F-sigma window merge.

A cover family assigns to each stage ``i = 1..K`` one cylinder level ``l_i``
of a self-similar model: balls at the level representatives with the radius
that covers a cylinder. The stage is accepted when

* mass: ``m^l r^s < 2^-i`` (times ``mass_scale``),
* size: ``r <= 2^-i``,
* layers: ``r_i >= 2 r_(i+1)``.

Radii are tracked as ``log2`` values because deep stages reach radii far
below the double range.

Per stage, Vitali selection keeps a disjoint subfamily greedily; the output
set puts one point at gap ``r`` on the ray to each kept center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ..dimension import packing_number
from ..geometry import chord
from ..pointset import DEFAULT_CAP, CylinderBlock, DiscretePointSet, ExplicitBlock
from .boundary import TWO_PI, BoundaryModel

MAX_LEVEL = 200_000
MAX_WINDOW = 1020  # 2^-1020 is still a normal double
EXPLICIT_STAGE_MAX = 200_000


class WindowExhausted(ValueError):
    def __init__(self, msg: str, max_feasible: int):
        super().__init__(msg)
        self.max_feasible = max_feasible


@dataclass(frozen=True)
class CoverLevel:
    stage: int
    level: int
    count: int
    log2_radius: float
    log2_mass: float  # log2(count * r^s)
    window: int | None = None

    @property
    def radius(self) -> float:
        return 2.0 ** self.log2_radius


@dataclass(frozen=True)
class CoverFamily:
    model: BoundaryModel
    s: float
    levels: tuple[CoverLevel, ...]
    mass_scale: float = 1.0
    part: int | None = None

    def __len__(self) -> int:
        return len(self.levels)

    def centers(self, i: int, cap: int = DEFAULT_CAP) -> np.ndarray:
        """Center angles of stage index ``i``."""
        return self.model.representatives(self.levels[i].level, cap)

    def mass_ok(self) -> list[bool]:
        lim = math.log2(self.mass_scale)
        return [lv.log2_mass < -lv.stage + lim for lv in self.levels]

    def layers_ok(self) -> list[bool]:
        return [b.log2_radius <= a.log2_radius - 1.0 for a, b in zip(self.levels, self.levels[1:])]

    def covers_ok(self, max_count: int = 200_000) -> list[bool | None]:
        """Every cylinder of the stage level lies inside its ball (explicitly checked).

        The check tests both cylinder endpoints against the ball around the
        representative; stages with too many cylinders report ``None``.
        """
        out: list[bool | None] = []
        X = self.model
        for lv in self.levels:
            if not hasattr(X, "cylinder_lefts"):
                # point-like models: the only cylinder is the center itself
                out.append(True)
                continue
            if lv.count > max_count or lv.log2_radius < -40:
                out.append(None)
                continue
            lefts = X.cylinder_lefts(lv.level)
            reps = X.representatives(lv.level)
            L = X.cylinder_length(lv.level)
            far = np.maximum(chord(reps - lefts), chord(lefts + L - reps))
            # angles near 2 pi carry absolute rounding of a few ulps
            slack = lv.radius * 1e-12 + 64 * np.finfo(float).eps * TWO_PI
            out.append(bool(np.all(far <= lv.radius + slack)))
        return out

    def describe(self) -> dict:
        return {
            "model": self.model.describe(),
            "s": self.s,
            "mass_scale": self.mass_scale,
            "part": self.part,
            "levels": [
                {"stage": lv.stage, "level": lv.level, "count": lv.count,
                 "log2_radius": lv.log2_radius, "log2_mass": lv.log2_mass, "window": lv.window}
                for lv in self.levels
            ],
        }


def part_windows(m: int, max_window: int = MAX_WINDOW) -> Iterator[int]:
    """Dyadic indices ``k = 2 w`` with ``w = 2^(m-1) (2j - 1)``, in increasing order."""
    if m < 1:
        raise ValueError("part index must be >= 1")
    j = 1
    while True:
        k = 2 * (2 ** (m - 1)) * (2 * j - 1)
        if k > max_window:
            return
        yield k
        j += 1


def _level_for_radius(X: BoundaryModel, log2_r: float, start: int) -> int:
    lv = max(start, 0)
    while X.cover_log2_radius(lv) > log2_r:
        lv += 1
        if lv > MAX_LEVEL:
            raise ValueError("no cylinder level reaches the requested radius")
    return lv


def build_cover_family(X: BoundaryModel, s: float, K: int, windows: Sequence[int] | Iterator[int] | None = None,
                       mass_scale: float = 1.0, part: int | None = None) -> CoverFamily:
    """Choose one cylinder level per stage ``1..K`` meeting mass, size and layer bounds.

    With ``windows`` the radius of each stage is snapped to ``2^-w`` for the
    next usable window ``w`` (F-sigma mode).
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if not s > X.s_sim + 1e-12:
        raise ValueError(f"s = {s} must exceed the similarity dimension {X.s_sim}; "
                         "cylinder covers cannot reach the mass bound")
    log2m = math.log2(X.cylinder_count(1))
    lim = math.log2(mass_scale)
    levels: list[CoverLevel] = []
    prev_r = math.inf
    prev_level = 0
    win_iter = iter(windows) if windows is not None else None
    for i in range(1, K + 1):
        if win_iter is None:
            lv = prev_level + 1 if levels else 1
            while True:
                lr = X.cover_log2_radius(lv)
                lm = lv * log2m + s * lr
                if lm < -i + lim and lr <= -i and lr <= prev_r - 1.0:
                    break
                lv += 1
                if lv > MAX_LEVEL:
                    raise ValueError(f"stage {i}: no level below {MAX_LEVEL} meets the bounds")
            levels.append(CoverLevel(i, lv, X.cylinder_count(lv), lr, lm))
        else:
            while True:
                w = next(win_iter, None)
                if w is None:
                    raise WindowExhausted(
                        f"windows exhausted at stage {i}; max feasible K is {i - 1}", i - 1)
                # radius snapped to 2^-w; skip windows where the snapped balls
                # overlap and the stage is too large to pack explicitly
                lr = -float(w)
                if lr > -i or lr > prev_r - 1.0:
                    continue
                lv = _level_for_radius(X, lr, prev_level)
                if not (_stage_is_lazy(X, lv, lr) or X.cylinder_count(lv) <= EXPLICIT_STAGE_MAX):
                    continue
                lm = lv * log2m + s * lr
                if lm < -i + lim:
                    break
            levels.append(CoverLevel(i, lv, X.cylinder_count(lv), lr, lm, int(w)))
        prev_r = levels[-1].log2_radius
        prev_level = levels[-1].level
    return CoverFamily(X, float(s), tuple(levels), mass_scale, part)


def _stage_is_lazy(X: BoundaryModel, level: int, log2_r: float) -> bool:
    if X.cylinder_count(level) == 1:
        return True
    return float(chord(X.min_center_spacing(level))) > 2.0 * 2.0 ** log2_r


def _select_stage(X: BoundaryModel, lv: CoverLevel, cap: int):
    """Greedy disjoint subfamily of one stage: a lazy block when nothing overlaps."""
    if lv.log2_radius < math.log2(1e-300):
        raise ValueError(f"stage {lv.stage}: radius 2^{lv.log2_radius:.1f} underflows double precision")
    r = lv.radius
    if _stage_is_lazy(X, lv.level, lv.log2_radius):
        return CylinderBlock(r, X, lv.level), lv.count
    th = X.representatives(lv.level, cap)
    pts = np.column_stack([np.cos(th), np.sin(th)])
    pk = packing_number(pts, r)  # centers pairwise > 2r apart, maximal
    kept = np.sort(pk.indices)
    return ExplicitBlock(pts[kept], np.full(kept.size, r)), pk.count


def vitali_construction(cover: CoverFamily, cap: int = DEFAULT_CAP) -> DiscretePointSet:
    """Points ``(1 - r) z`` over the kept centers ``z`` of every stage."""
    if len(cover) == 0:
        raise ValueError("empty cover")
    blocks = []
    kept = []
    for lv in cover.levels:
        blk, nk = _select_stage(cover.model, lv, cap)
        blocks.append(blk)
        kept.append(nk)
    meta = {
        "generator": "vitali_construction",
        "params": {"cover": cover.describe(), "kept": kept},
        "seed": 0,
    }
    return DiscretePointSet(2, blocks, meta, check_distinct=False)


def fsigma_merge(parts: Sequence[tuple[BoundaryModel, float]], K: int,
                 cap: int = DEFAULT_CAP) -> DiscretePointSet:
    """Union of per-part Vitali sets built on disjoint scale windows.

    Part ``m`` (1-based) uses windows ``2 w`` with odd part index ``m`` and
    the tightened mass bound ``2^-i 2^-m``.
    """
    if not parts:
        raise ValueError("need at least one part")
    blocks = []
    covers = []
    for m, (X, s) in enumerate(parts, start=1):
        try:
            fam = build_cover_family(X, s, K, windows=part_windows(m), mass_scale=2.0 ** -m, part=m)
        except WindowExhausted as exc:
            raise WindowExhausted(f"part {m}: {exc}", exc.max_feasible) from None
        covers.append(fam)
        for lv in fam.levels:
            blocks.append(_select_stage(X, lv, cap)[0])
    meta = {
        "generator": "fsigma_merge",
        "params": {"K": K, "parts": [c.describe() for c in covers]},
        "seed": 0,
    }
    return DiscretePointSet(2, blocks, meta, check_distinct=False)

"""Mobius maps of the disk, Schottky and parabolic groups, orbit enumeration.

A disk automorphism is stored as the pair ``(a, b)`` of the matrix
``[[a, b], [conj b, conj a]]`` with ``|a|^2 - |b|^2 = 1``; it acts by
``z -> (a z + b) / (conj(b) z + conj(a))``. The orbit point of the origin is
``g(0) = b / conj(a)`` and its boundary gap is, exactly,

    1 - |g(0)| = 1 / (|a| (|a| + |b|)),

which stays accurate when ``|g(0)|`` rounds to 1.

Usage::

    >>> G = schottky_group(4.0)
    >>> E = enumerate_orbit(G, 2)
    >>> E.count
    17
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constructions.boundary import SinglePoint
from .dimension import box_dimension_estimate
from .exponent import critical_exponent, linear_fit
from .geometry import hyperbolic_distance_origin_from_gap
from .pointset import DEFAULT_CAP, DiscretePointSet, ExplicitBlock, dyadic_counts, gap_bin, truncate
from .regularity import (approximate_limit_set, approximation_profile, separation_profile)

T_MIN = 4.0
# below this size |a|^2 - |b|^2 is computed accurately enough to renormalize
_RENORM_LIMIT = 1e6


@dataclass(frozen=True)
class MoebiusMap:
    a: complex
    b: complex

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if abs(self.a) ** 2 < _RENORM_LIMIT and abs(det - 1.0) > 1e-9:
            raise ValueError(f"|a|^2 - |b|^2 = {det} is not 1")

    @staticmethod
    def identity() -> "MoebiusMap":
        return MoebiusMap(1 + 0j, 0j)

    @property
    def det(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    @property
    def trace(self) -> float:
        return 2.0 * self.a.real

    def classify(self, tol: float = 1e-9) -> str:
        t = abs(self.trace)
        if abs(t - 2.0) <= tol:
            return "parabolic" if abs(self.b) > 0 else "elliptic"
        return "hyperbolic" if t > 2.0 else "elliptic"

    def __call__(self, z):
        return mobius_apply(self, z)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return self.compose(other)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """``self o other``."""
        a = self.a * other.a + self.b * other.b.conjugate()
        b = self.a * other.b + self.b * other.a.conjugate()
        return _renormalized(a, b)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.a.conjugate(), -self.b)

    def orbit_point(self) -> complex:
        return self.b / self.a.conjugate()

    def orbit_gap(self) -> float:
        A, B = abs(self.a), abs(self.b)
        return 1.0 / (A * (A + B))

    def fixed_points(self) -> list[complex]:
        """Fixed points of the action (roots of ``conj(b) z^2 + (conj a - a) z - b = 0``)."""
        c2 = self.b.conjugate()
        c1 = self.a.conjugate() - self.a
        c0 = -self.b
        if abs(c2) < 1e-300:
            return [0j] if abs(c1) > 0 else []
        return list(np.roots([c2, c1, c0]).astype(complex))


def _renormalized(a: complex, b: complex) -> MoebiusMap:
    # divide by sqrt(det) only while det is computed without cancellation;
    # beyond that the products keep det = 1 to rounding on their own
    if abs(a) ** 2 < _RENORM_LIMIT:
        s = math.sqrt(abs(a) ** 2 - abs(b) ** 2)
        a, b = a / s, b / s
    return MoebiusMap(complex(a), complex(b))


def mobius_apply(g: MoebiusMap, z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise ValueError("z must lie in the closed unit disk")
    den = g.b.conjugate() * z + g.a.conjugate()
    if np.any(np.abs(den) < 1e-300):
        raise ZeroDivisionError("denominator underflow")
    out = (g.a * z + g.b) / den
    return out if out.ndim else complex(out)


def disk_distance(z1, z2):
    """Hyperbolic distance in the disk (same normalization as ``geometry``)."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    num = np.abs(z1 - z2)
    den = np.sqrt((1 - np.abs(z1) ** 2) * (1 - np.abs(z2) ** 2))
    return 2.0 * np.arcsinh(num / den)


@dataclass(frozen=True)
class GroupPresentation:
    """Letters ``g_1, g_1^-1, g_2, g_2^-1, ...``; ``inverse[i]`` is the inverse letter."""

    letters: tuple[MoebiusMap, ...]
    inverse: tuple[int, ...]
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def generators(self) -> tuple[MoebiusMap, ...]:
        return self.letters[::2]

    def word(self, letters) -> MoebiusMap:
        g = MoebiusMap.identity()
        for i in letters:
            g = g @ self.letters[i]
        return g

    def limit_reference(self):
        """Exact limit set when known (parabolic: the fixed point)."""
        if self.kind == "parabolic":
            return SinglePoint(self.params.get("fixed_angle", 0.0))
        return None


def _pair(g: MoebiusMap) -> list[MoebiusMap]:
    return [g, g.inverse()]


def schottky_group(t: float = 4.0, m: int = 2) -> GroupPresentation:
    """``m`` hyperbolic generators of translation length ``t``, axes rotated by ``pi/m``."""
    if m < 1:
        raise ValueError("need at least one generator")
    if t <= 0:
        raise ValueError("t must be > 0")
    if t < T_MIN:
        warnings.warn(f"t = {t} < {T_MIN}: discreteness is not guaranteed", RuntimeWarning)
    c, s = math.cosh(t / 2.0), math.sinh(t / 2.0)
    letters = []
    for j in range(m):
        rot = complex(math.cos(math.pi * j / m), math.sin(math.pi * j / m))
        letters += _pair(MoebiusMap(complex(c), s * rot))
    inv = tuple(i ^ 1 for i in range(2 * m))
    return GroupPresentation(tuple(letters), inv, "schottky", {"t": t, "m": m})


def parabolic_group() -> GroupPresentation:
    """Cayley conjugate of ``w -> w + 1`` on the upper half-plane; fixes ``z = 1``.

    ``g = (1 + i/2, -i/2)`` and ``g^k(0) = k / (k + 2i)``.
    """
    g = MoebiusMap(1 + 0.5j, -0.5j)
    return GroupPresentation(tuple(_pair(g)), (1, 0), "parabolic", {"fixed_angle": 0.0})


def orbit_size(G: GroupPresentation, max_len: int) -> int:
    L = len(G.letters)
    return 1 + sum(L * (L - 1) ** (l - 1) for l in range(1, max_len + 1))


def enumerate_orbit(G: GroupPresentation, max_len: int, cap: int = DEFAULT_CAP) -> DiscretePointSet:
    """Orbit of 0 over reduced words of length ``<= max_len``.

    Breadth first; within a length, words are in lexicographic letter order.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    total = orbit_size(G, max_len)
    if total > cap:
        raise MemoryError(f"orbit has {total} points, above the cap {cap}")
    la = np.array([g.a for g in G.letters])
    lb = np.array([g.b for g in G.letters])
    inv = np.array(G.inverse)
    A = np.array([1 + 0j])
    B = np.array([0j])
    last = np.array([-1])
    As, Bs, lengths = [A], [B], [np.zeros(1, dtype=np.int16)]
    max_gap_at = {}
    for length in range(1, max_len + 1):
        nA, nB, nlast, parent = [], [], [], []
        for i in range(len(G.letters)):
            ok = last != inv[i]
            idx = np.flatnonzero(ok)
            nA.append(A[idx] * la[i] + B[idx] * np.conj(lb[i]))
            nB.append(A[idx] * lb[i] + B[idx] * np.conj(la[i]))
            nlast.append(np.full(idx.size, i))
            parent.append(idx)
        parent = np.concatenate(parent)
        nlast = np.concatenate(nlast)
        order = np.lexsort((nlast, parent))
        A = np.concatenate(nA)[order]
        B = np.concatenate(nB)[order]
        last = nlast[order]
        small = np.abs(A) ** 2 < _RENORM_LIMIT
        if small.any():
            s = np.sqrt(np.abs(A[small]) ** 2 - np.abs(B[small]) ** 2)
            A[small] /= s
            B[small] /= s
        As.append(A)
        Bs.append(B)
        lengths.append(np.full(A.size, length, dtype=np.int16))
    A = np.concatenate(As)
    B = np.concatenate(Bs)
    wl = np.concatenate(lengths)
    absA, absB = np.abs(A), np.abs(B)
    gaps = 1.0 / (absA * (absA + absB))
    gaps[0] = 1.0
    ang = np.angle(B) + np.angle(A)
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    top = wl == max_len
    complete = int(gap_bin(np.array([gaps[top].max()]))[0]) - 1
    meta = {
        "generator": G.kind,
        "params": dict(G.params, max_len=max_len),
        "seed": 0,
        "complete_depth": complete,
        # reduced words of a free group give distinct points; deep ones differ
        # by less than a double can resolve in direction, so no numeric check
        "distinct_by": "reduced words",
    }
    return DiscretePointSet(2, [ExplicitBlock(dirs, gaps)], meta, labels={"word_length": wl},
                            check_distinct=False)


def parabolic_orbit(steps: int) -> DiscretePointSet:
    return enumerate_orbit(parabolic_group(), steps)


# ---------------------------------------------------------------- checks


def shell_growth_rate(orbit: DiscretePointSet, T_max: float, T_min: float | None = None,
                      points: int = 24) -> tuple[float, np.ndarray, np.ndarray]:
    """Slope of ``log #{d_H(0, x) <= T}`` in ``T`` over ``[T_min, T_max]``."""
    d = np.sort(hyperbolic_distance_origin_from_gap(orbit.gaps()))
    if T_min is None:
        T_min = T_max / 2.0
    Ts = np.linspace(T_min, T_max, points)
    counts = np.searchsorted(d, Ts, side="right")
    slope, _, _ = linear_fit(Ts, np.log(np.maximum(counts, 1)))
    return float(slope), Ts, counts


CARTESIAN_DEPTH = 36


def kleinian_checks(orbit: DiscretePointSet, G: GroupPresentation, depths=None,
                    box: bool = True) -> dict:
    """Separation across depths, approximation fit, exponent, shell growth and box dimension."""
    Kc = int(orbit.meta.get("complete_depth", orbit.depth))
    out: dict = {"group": G.kind, "params": dict(G.params), "complete_depth": Kc}
    Ktop = min(Kc, CARTESIAN_DEPTH)
    if depths is None:
        depths = sorted({max(4, Ktop // 3), max(5, Ktop // 2), max(6, (2 * Ktop) // 3), Ktop})
    seps = []
    for K in depths:
        T = truncate(orbit, K)
        seps.append(separation_profile(T).c1_hat if T.count >= 2 else math.nan)
    finite = [v for v in seps if np.isfinite(v) and v > 0]
    out["separation"] = {
        "depths": list(depths),
        "c1_hat": seps,
        "spread": (max(finite) / min(finite)) if finite else math.inf,
    }
    out["separation"]["stable_within_2x"] = bool(out["separation"]["spread"] <= 2.0)
    sub = truncate(orbit, Ktop)
    ref = G.limit_reference()
    if ref is not None:
        ap = approximation_profile(orbit, ref)
    else:
        rho = 2.0 ** -(Kc - 4)
        deep = truncate(orbit, Kc)
        ref = approximate_limit_set(deep, rho)
        ap = approximation_profile(sub, ref)
    out["approximation"] = {
        "reference_mode": ap.reference_mode,
        "resolution": ap.resolution,
        "c2_hat": ap.c2_hat,
        "beta_fit": ap.beta_fit,
        "well_approximated": ap.is_well_approximated(),
        "ratio_trend": ap.ratio_trend(),
    }
    if G.kind == "parabolic":
        w = ref.point
        g = orbit.gaps()
        u = orbit.directions()
        far = np.argsort(g)[:2]
        dist = np.sqrt(g[far] ** 2 + (1 - g[far]) * np.sum((u[far] - w) ** 2, axis=1))
        out["sqrt_ratio"] = float(np.mean(dist / np.sqrt(g[far])))
        bins = dyadic_counts(orbit)
    else:
        bins = dyadic_counts(truncate(orbit, Kc))
    est = critical_exponent(bins)
    out["exponent"] = est.as_dict()
    if G.kind != "parabolic":
        T_c = float(hyperbolic_distance_origin_from_gap(2.0 ** -Kc))
        rate, _, _ = shell_growth_rate(orbit, T_c)
        out["shell_growth"] = {"T_max": T_c, "rate": rate,
                               "difference": abs(rate - est.delta_hat)}
        if box:
            kmax = min(40, int(math.floor(-math.log2(ref.resolution))) - 3)
            bd = box_dimension_estimate(ref.points, (3, kmax))
            out["box_dimension"] = bd.as_dict()
            out["patterson_sullivan_gap"] = abs(bd.slope - est.delta_hat)
    return out

"""Discrete point sets in the open unit ball, dyadic scale bins, file I/O.

A point is stored in polar form: a unit direction ``u`` and its exact
boundary gap ``g = 1 - |x|``, so ``x = (1 - g) u``. Keeping ``g`` separately
matters because the generators place points at gaps like ``2**-60`` where
``1 - g`` rounds to 1.

Sets are lists of blocks. An :class:`ExplicitBlock` holds arrays; the lazy
blocks (:class:`ArcBlock`, :class:`CylinderBlock`) describe huge single-gap
layers by formula. Counting, binning, truncation and accumulation sums never
materialize lazy blocks; Cartesian work does, under a cap.

File format::

    pointset v1 n=<dim> count=<N> depth=<K>
    <x_1> ... <x_n>        (17 significant digits, N rows)

with a JSON sidecar ``<stem>.meta.json`` holding generator, parameters,
seed and, when available, the exact gaps (base64 float64).
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CAP = 5_000_000


class PointSetError(ValueError):
    pass


def gap_bin(gaps) -> np.ndarray:
    """Dyadic index ``k`` with ``gap in [2^-k, 2^(1-k))``.

    ``frexp`` writes ``g = m * 2^e`` with ``m in [0.5, 1)``, so ``k = 1 - e``
    exactly, including at powers of two.
    """
    _, e = np.frexp(np.asarray(gaps, dtype=float))
    return (1 - e).astype(np.int64)


def _dyadic_floor(x: float) -> int:
    return int(gap_bin(np.array([x]))[0])


# ---------------------------------------------------------------- blocks


class Block:
    """A layer of points. Subclasses define the storage."""

    n: int
    lazy: bool = False
    shared_direction: bool = False

    @property
    def count(self) -> int:  # pragma: no cover - interface
        raise NotImplementedError

    def gap_mass(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct ``(gaps, multiplicities)``; multiplicities may be floats for huge counts."""
        raise NotImplementedError

    def gaps(self) -> np.ndarray:
        raise NotImplementedError

    def directions(self) -> np.ndarray:
        raise NotImplementedError

    def restrict(self, lo: float, hi: float) -> "Block | None":
        """Sub-block with gaps in ``[lo, hi)``; ``None`` if empty."""
        raise NotImplementedError

    def near(self, u: np.ndarray, dtheta: float) -> tuple[np.ndarray, np.ndarray]:
        """Candidates ``(directions, gaps)`` whose direction is within angle ``dtheta`` of ``u``.

        Explicit blocks return every point; callers filter exactly.
        """
        raise NotImplementedError


def _single_gap_check(gap: float) -> float:
    gap = float(gap)
    if not (0.0 < gap <= 1.0):
        raise PointSetError(f"gap {gap!r} outside (0, 1]")
    return gap


class ExplicitBlock(Block):
    """Arrays of directions ``(N, n)`` and gaps ``(N,)``.

    ``directions`` may have a single row, shared by every point (a ray).
    """

    def __init__(self, directions, gaps):
        d = np.asarray(directions, dtype=float)
        g = np.asarray(gaps, dtype=float).reshape(-1)
        if d.ndim == 1:
            d = d[None, :]
        if d.ndim != 2 or d.shape[1] < 2:
            raise PointSetError("directions must be an (N, n) array with n >= 2")
        if len(d) not in (1, len(g)):
            raise PointSetError("directions and gaps disagree in length")
        if g.size and (np.any(~np.isfinite(g)) or g.min() <= 0.0 or g.max() > 1.0):
            raise PointSetError("gaps must lie in (0, 1]")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise PointSetError("directions must be unit vectors")
        # leave already-unit rows alone so saved directions reload bit-exactly
        fix = np.abs(norms - 1.0) > 4e-16
        self._dir = np.where(fix[:, None], d / norms[:, None], d)
        self._gaps = g
        self.n = d.shape[1]

    @property
    def shared_direction(self) -> bool:
        return len(self._dir) == 1 and len(self._gaps) != 1

    @property
    def count(self) -> int:
        return int(self._gaps.size)

    def gap_mass(self):
        return self._gaps, np.ones_like(self._gaps)

    def gaps(self):
        return self._gaps

    def directions(self):
        if len(self._dir) == 1 and self.count != 1:
            return np.broadcast_to(self._dir, (self.count, self.n))
        return self._dir

    def restrict(self, lo, hi):
        keep = (self._gaps >= lo) & (self._gaps < hi)
        if not keep.any():
            return None
        if keep.all():
            return self
        d = self._dir if len(self._dir) == 1 else self._dir[keep]
        return ExplicitBlock(d, self._gaps[keep])

    def near(self, u, dtheta):
        return self.directions(), self._gaps


class ArcBlock(Block):
    """``count`` points at one gap on the circle: angles ``theta0 + j*step``."""

    lazy = True

    def __init__(self, gap: float, theta0: float, step: float, count: int):
        self.gap = _single_gap_check(gap)
        self.theta0 = float(theta0)
        self.step = float(step)
        self._count = int(count)
        if self._count < 1:
            raise PointSetError("ArcBlock needs at least one point")
        if self._count > 1 and not (0.0 < self.step and self.step * (self._count - 1) < 2 * math.pi):
            raise PointSetError("ArcBlock angles must not wrap onto themselves")
        self.n = 2

    @property
    def count(self):
        return self._count

    def gap_mass(self):
        return np.array([self.gap]), np.array([float(self._count)])

    def gaps(self):
        return np.full(self._count, self.gap)

    def angles(self):
        return self.theta0 + self.step * np.arange(self._count)

    def directions(self):
        th = self.angles()
        return np.column_stack([np.cos(th), np.sin(th)])

    def restrict(self, lo, hi):
        return self if lo <= self.gap < hi else None

    def near(self, u, dtheta):
        phi = math.atan2(u[1], u[0])
        out = []
        for shift in (-2 * math.pi, 0.0, 2 * math.pi):
            if self._count == 1:
                j = np.array([0]) if abs(self.theta0 - (phi + shift)) <= dtheta else np.array([], int)
            else:
                lo = math.ceil((phi + shift - dtheta - self.theta0) / self.step)
                hi = math.floor((phi + shift + dtheta - self.theta0) / self.step)
                lo, hi = max(lo, 0), min(hi, self._count - 1)
                j = np.arange(lo, hi + 1) if hi >= lo else np.array([], int)
            out.append(j)
        j = np.unique(np.concatenate(out))
        th = self.theta0 + self.step * j
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(j.size, self.gap)


class CylinderBlock(Block):
    """One point per level-``level`` cylinder of a circle IFS, all at one gap.

    Directions are the model's cylinder representatives (see
    ``constructions.boundary``). ``count = m**level`` can be astronomically
    large; only near-queries and capped materialization touch geometry.
    """

    lazy = True

    def __init__(self, gap: float, model, level: int):
        self.gap = _single_gap_check(gap)
        self.model = model
        self.level = int(level)
        self.n = 2

    @property
    def count(self):
        return self.model.cylinder_count(self.level)

    def gap_mass(self):
        return np.array([self.gap]), np.array([float(self.count)])

    def gaps(self):
        return np.full(self.count, self.gap)

    def directions(self):
        th = self.model.representatives(self.level)
        return np.column_stack([np.cos(th), np.sin(th)])

    def restrict(self, lo, hi):
        return self if lo <= self.gap < hi else None

    def near(self, u, dtheta):
        phi = math.atan2(u[1], u[0])
        th = self.model.representatives_near(self.level, phi, dtheta)
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(th.size, self.gap)


# ---------------------------------------------------------------- point set


@dataclass(frozen=True)
class ScaleBins:
    """Dyadic bins ``k -> indices`` with counts ``N_k``.

    ``counts`` always covers ``k = 0..depth``. ``bins`` holds index arrays into
    the set's flat order and is ``None`` for sets with lazy blocks.
    """

    counts: dict[int, int]
    bins: dict[int, np.ndarray] | None = None
    n: int = 2

    @property
    def ks(self) -> np.ndarray:
        return np.array(sorted(self.counts), dtype=np.int64)

    @property
    def depth(self) -> int:
        nz = [k for k, c in self.counts.items() if c > 0]
        return max(nz) if nz else 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def nonempty(self) -> tuple[np.ndarray, np.ndarray]:
        ks = np.array([k for k in sorted(self.counts) if self.counts[k] > 0], dtype=np.int64)
        ns = np.array([float(self.counts[k]) for k in ks])
        return ks, ns

    @classmethod
    def from_counts(cls, counts, n: int = 2) -> "ScaleBins":
        """Synthetic bins, e.g. ``{k: round(2**(k*t))}``; missing ``k`` are zero."""
        counts = {int(k): int(v) for k, v in dict(counts).items()}
        if any(v < 0 for v in counts.values()) or any(k < 0 for k in counts):
            raise PointSetError("counts and indices must be non-negative")
        top = max(counts) if counts else 0
        return cls({k: counts.get(k, 0) for k in range(top + 1)}, None, n)


class DiscretePointSet:
    """Immutable finite subset of the open unit ball.

    Parameters
    ----------
    n : ambient dimension (>= 2)
    blocks : sequence of :class:`Block`
    meta : provenance; must contain ``generator``, ``params`` and ``seed``
    labels : optional per-point arrays aligned with the flat point order
    """

    def __init__(self, n: int, blocks: Sequence[Block], meta: dict, labels: dict | None = None,
                 check_distinct: bool = True):
        if n < 2:
            raise PointSetError("n must be >= 2")
        for key in ("generator", "params", "seed"):
            if key not in meta:
                raise PointSetError(f"meta is missing mandatory key {key!r}")
        blocks = [b for b in blocks if b is not None and b.count > 0]
        for b in blocks:
            if b.n != n:
                raise PointSetError(f"block of dimension {b.n} in a set of dimension {n}")
        self.n = int(n)
        self.blocks: tuple[Block, ...] = tuple(blocks)
        self.meta = dict(meta)
        self.labels = {k: np.asarray(v) for k, v in (labels or {}).items()}
        for k, v in self.labels.items():
            if len(v) != self.count:
                raise PointSetError(f"label {k!r} has {len(v)} entries for {self.count} points")
        if check_distinct and not self.is_lazy and self.count > 1:
            self._check_distinct()

    def _check_distinct(self) -> None:
        def keys(d, g):
            d = np.array(d, copy=True)
            # the origin has no direction; normalize so copies collide
            d[g == 1.0] = 0.0
            return np.column_stack([d, g])

        for b in self.blocks:
            if b.shared_direction:
                if np.unique(b.gaps()).size != b.count:
                    raise PointSetError("duplicate points (a point set is a set)")
            else:
                k = keys(b.directions(), b.gaps())
                if len(np.unique(k, axis=0)) != len(k):
                    raise PointSetError("duplicate points (a point set is a set)")
        if len(self.blocks) > 1 and self.count <= 1_000_000:
            k = keys(self.directions(), self.gaps())
            if len(np.unique(k, axis=0)) != len(k):
                raise PointSetError("duplicate points (a point set is a set)")

    # sizes ------------------------------------------------------------
    @property
    def count(self) -> int:
        return sum(b.count for b in self.blocks)

    def __len__(self) -> int:
        c = self.count
        if c > np.iinfo(np.int64).max:
            raise OverflowError("set too large for len(); use .count")
        return c

    @property
    def is_lazy(self) -> bool:
        return any(b.lazy for b in self.blocks)

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    @property
    def depth(self) -> int:
        """Largest ``k`` with a point whose gap lies in ``[2^-k, 2^(1-k))``."""
        if self.is_empty:
            return 0
        return max(int(gap_bin(b.gap_mass()[0]).max()) for b in self.blocks)

    @property
    def min_gap(self) -> float:
        return min(float(np.min(b.gap_mass()[0])) for b in self.blocks)

    # materialization ----------------------------------------------------
    def _guard(self, cap: int) -> None:
        if self.count > cap:
            raise PointSetError(
                f"set has {self.count} points, above the materialization cap {cap}; "
                "truncate it first"
            )

    def gaps(self, cap: int = 10 * DEFAULT_CAP) -> np.ndarray:
        self._guard(cap)
        if not self.blocks:
            return np.empty(0)
        return np.concatenate([b.gaps() for b in self.blocks])

    def directions(self, cap: int = DEFAULT_CAP) -> np.ndarray:
        self._guard(cap)
        if not self.blocks:
            return np.empty((0, self.n))
        return np.concatenate([np.asarray(b.directions()) for b in self.blocks])

    def points(self, cap: int = DEFAULT_CAP) -> np.ndarray:
        """Cartesian coordinates ``(1 - g) u``."""
        return (1.0 - self.gaps(cap))[:, None] * self.directions(cap)

    def norms(self, cap: int = DEFAULT_CAP) -> np.ndarray:
        return 1.0 - self.gaps(cap)

    def materialize(self, cap: int = DEFAULT_CAP) -> "DiscretePointSet":
        """Equivalent set held in a single explicit block."""
        if not self.is_lazy and len(self.blocks) <= 1:
            return self
        blk = ExplicitBlock(self.directions(cap), self.gaps(cap)) if self.blocks else None
        return DiscretePointSet(self.n, [blk] if blk else [], self.meta, self.labels, check_distinct=False)

    # selection ----------------------------------------------------------
    def select_gaps(self, lo: float, hi: float, note: dict | None = None) -> "DiscretePointSet":
        """Points with ``lo <= gap < hi``."""
        blocks = [b.restrict(lo, hi) for b in self.blocks]
        labels = {}
        if self.labels:
            g = self.gaps()
            keep = (g >= lo) & (g < hi)
            labels = {k: v[keep] for k, v in self.labels.items()}
        meta = dict(self.meta)
        if note:
            meta.setdefault("selections", [])
            meta["selections"] = list(meta["selections"]) + [note]
        return DiscretePointSet(self.n, [b for b in blocks if b is not None], meta, labels,
                                check_distinct=False)

    def mass_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """All distinct ``(gap, multiplicity)`` pairs concatenated over blocks."""
        if not self.blocks:
            return np.empty(0), np.empty(0)
        gs, ms = zip(*(b.gap_mass() for b in self.blocks))
        return np.concatenate(gs), np.concatenate(ms)

    def __repr__(self) -> str:
        return (f"DiscretePointSet(n={self.n}, count={self.count}, depth={self.depth}, "
                f"generator={self.meta.get('generator')!r})")


def unseeded_meta(generator: str, params: dict | None = None) -> dict:
    return {"generator": generator, "params": dict(params or {}), "seed": None}


def from_points(points, meta: dict | None = None) -> DiscretePointSet:
    """Build a set from Cartesian coordinates (gaps recomputed as ``1 - |x|``)."""
    from .geometry import BOUNDARY_TOL

    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise PointSetError("points must be an (N, n) array with n >= 2")
    nrm = np.linalg.norm(x, axis=1)
    if np.any(nrm >= 1.0 - BOUNDARY_TOL):
        raise PointSetError("point not in the open ball (|x| >= 1 - 1e-12)")
    return _from_cartesian(x, nrm, 1.0 - nrm, meta or unseeded_meta("points"))


def _from_cartesian(x, nrm, gaps, meta, labels=None):
    d = np.zeros_like(x)
    nz = nrm > 0
    d[nz] = x[nz] / nrm[nz, None]
    d[~nz, 0] = 1.0
    blocks = [ExplicitBlock(d, gaps)] if len(x) else []
    return DiscretePointSet(x.shape[1], blocks, meta, labels)


def from_polar(directions, gaps, meta: dict, labels: dict | None = None) -> DiscretePointSet:
    d = np.asarray(directions, dtype=float)
    n = d.shape[-1]
    return DiscretePointSet(n, [ExplicitBlock(d, gaps)] if np.size(gaps) else [], meta, labels)


# ---------------------------------------------------------------- binning


def dyadic_counts(E: DiscretePointSet) -> ScaleBins:
    """``N_k`` for ``k = 0..depth``; explicit sets also get index bins."""
    if E.is_empty:
        raise PointSetError("empty point set")
    gs, ms = E.mass_terms()
    ks = gap_bin(gs)
    depth = int(ks.max())
    counts = {k: 0 for k in range(depth + 1)}
    # exact integer counts, block by block
    for b in E.blocks:
        bg, bm = b.gap_mass()
        if b.lazy:
            counts[int(gap_bin(bg)[0])] += b.count
        else:
            u, c = np.unique(gap_bin(bg), return_counts=True)
            for k, v in zip(u.tolist(), c.tolist()):
                counts[k] += v
    bins = None
    if not E.is_lazy:
        flat = gap_bin(E.gaps())
        order = np.argsort(flat, kind="stable")
        sk = flat[order]
        bins = {}
        for k in range(depth + 1):
            lo, hi = np.searchsorted(sk, [k, k + 1])
            bins[k] = np.sort(order[lo:hi])
    return ScaleBins(counts, bins, E.n)


def scale_bin(E: DiscretePointSet, r: float) -> DiscretePointSet:
    """Points with gap in ``[r, 2r)``."""
    if not (0.0 < r < 1.0):
        raise PointSetError("r must lie in (0, 1)")
    return E.select_gaps(r, 2.0 * r, note={"scale_bin": r})


def truncate(E: DiscretePointSet, K: int) -> DiscretePointSet:
    """Keep gaps ``>= 2^-K``."""
    if K < 0:
        raise PointSetError("K must be >= 0")
    if E.is_empty or E.min_gap >= 2.0 ** -K:
        return E
    out = E.select_gaps(2.0 ** -K, math.inf)
    out.meta["truncation"] = int(K)
    return out


# ---------------------------------------------------------------- I/O


def _sidecar(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json") if path.suffix else path.with_name(path.name + ".meta.json")


def _b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _unb64(s: str, dtype="<f8") -> np.ndarray:
    return np.frombuffer(base64.b64decode(s), dtype=dtype).astype(float)


def save(E: DiscretePointSet, path, cap: int = DEFAULT_CAP) -> Path:
    """Write ``E`` in ``pointset v1`` format plus the meta sidecar."""
    path = Path(path)
    x = E.points(cap)
    with open(path, "w") as fh:
        fh.write(f"pointset v1 n={E.n} count={E.count} depth={E.depth}\n")
        if len(x):
            np.savetxt(fh, x, fmt="%.17g", delimiter=" ")
    meta = {k: v for k, v in E.meta.items()}
    meta["exact_gaps"] = _b64(E.gaps(cap))
    meta["exact_directions"] = _b64(E.directions(cap).reshape(-1))
    for name, arr in E.labels.items():
        meta.setdefault("labels", {})[name] = {
            "dtype": str(arr.dtype),
            "data": base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode("ascii"),
        }
    with open(_sidecar(path), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _parse_header(line: str) -> tuple[int, int, int]:
    parts = line.split()
    if len(parts) != 5 or parts[0] != "pointset" or parts[1] != "v1":
        raise PointSetError(f"malformed header: {line.strip()!r}")
    fields = {}
    for p in parts[2:]:
        key, _, val = p.partition("=")
        try:
            fields[key] = int(val)
        except ValueError:
            raise PointSetError(f"malformed header field {p!r}") from None
    if set(fields) != {"n", "count", "depth"}:
        raise PointSetError(f"malformed header: {line.strip()!r}")
    return fields["n"], fields["count"], fields["depth"]


def load(path) -> DiscretePointSet:
    """Read a ``pointset v1`` file and its sidecar.

    Gaps come from the sidecar when present (decimal coordinates cannot carry
    gaps below about 1e-16). Without them, rows with ``|x| >= 1`` are rejected.
    """
    from .geometry import BOUNDARY_TOL

    path = Path(path)
    text = path.read_text()
    if not text.strip():
        raise PointSetError(f"{path}: empty file")
    lines = text.splitlines()
    n, count, depth = _parse_header(lines[0])
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != count:
        raise PointSetError(f"header says count={count} but file has {len(rows)} rows")
    if count == 0:
        raise PointSetError(f"{path}: no points")
    try:
        x = np.array([[float(t) for t in ln.split()] for ln in rows])
    except ValueError as exc:
        raise PointSetError(f"unparseable row: {exc}") from None
    if x.ndim != 2 or x.shape[1] != n:
        widths = sorted({len(ln.split()) for ln in rows})
        raise PointSetError(f"dimension mismatch: header n={n}, rows have {widths} columns")
    meta_path = _sidecar(path)
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else unseeded_meta("file")
    for key in ("generator", "params", "seed"):
        meta.setdefault(key, None if key == "seed" else ({} if key == "params" else "file"))
    nrm = np.linalg.norm(x, axis=1)
    gaps = d = None
    if "exact_gaps" in meta:
        gaps = _unb64(meta.pop("exact_gaps"))
        if gaps.shape != (count,):
            raise PointSetError("sidecar gap array does not match the point count")
        bad = (gaps <= 0) | (gaps > 1) | (np.abs((1.0 - gaps) - nrm) > 1e-9)
        if bad.any():
            raise PointSetError(f"row {int(np.argmax(bad)) + 2}: coordinates disagree with sidecar gap")
        if "exact_directions" in meta:
            d = _unb64(meta.pop("exact_directions"))
            if d.size != count * n:
                raise PointSetError("sidecar direction array does not match the point count")
            d = d.reshape(count, n)
            if np.any(np.abs((1.0 - gaps)[:, None] * d - x) > 1e-9):
                raise PointSetError("coordinates disagree with sidecar directions")
    else:
        bad = nrm >= 1.0 - BOUNDARY_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise PointSetError(f"row {i + 2}: |x| = {nrm[i]!r} is not interior")
        gaps = 1.0 - nrm
    labels = {}
    for name, spec in meta.pop("labels", {}).items():
        labels[name] = np.frombuffer(base64.b64decode(spec["data"]), dtype=spec["dtype"]).copy()
    if d is not None:
        E = from_polar(d, gaps, meta, labels)
    else:
        E = _from_cartesian(x, nrm, gaps, meta, labels)
    if E.depth != depth:
        raise PointSetError(f"header depth={depth} but points reach depth {E.depth}")
    return E

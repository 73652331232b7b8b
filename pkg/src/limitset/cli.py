"""``limitset`` command line: generate, analyze, construct, verify.

Exit codes: 0 success or verification pass, 1 verification fail, 2 usage or
input error. JSON goes to stdout (or ``--json PATH``); the aligned text
summary goes to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, kleinian
from .constructions.boundary import model_from_dict
from .constructions.covers import WindowExhausted, build_cover_family, fsigma_merge, vitali_construction
from .constructions.gallery import GALLERY_IDS, gallery
from .constructions.nets import net_construction
from .dimension import box_dimension_estimate, hausdorff_upper_bound
from .exponent import counts_csv, critical_exponent, diverging_diagnostic
from .pointset import PointSetError, dyadic_counts, load, save, truncate
from .regularity import (C_GRID, CARTESIAN_MIN_GAP, RadialQuery, approximation_profile, radial_members,
                         separation_profile, shell_surrogate)
from .report import dumps
from .verify import MODELS, THEOREM_IDS, Check, UnknownTheorem, VerificationReport, run_verification

GENERATORS = GALLERY_IDS + ("schottky", "parabolic")


class UsageError(Exception):
    pass


def _emit(report: dict, args, summary: str | None = None) -> None:
    text = dumps(report) + "\n"
    if getattr(args, "json", None):
        Path(args.json).write_text(text)
    else:
        sys.stdout.write(text)
    if summary and not getattr(args, "quiet", False):
        sys.stderr.write(summary + "\n")


def _require_seeded(E, path) -> None:
    if E.meta.get("seed") is None:
        raise UsageError(f"{path}: meta has no seed; verify refuses unseeded files")


# ---------------------------------------------------------------- generate


def _gallery_params(args) -> dict:
    gid = args.name
    if gid == "sharpness":
        return {"alpha": args.alpha, "beta": args.beta}
    if gid == "gamma-radial":
        return {"t": args.t, "gamma": args.gamma}
    return {}


def _build(args):
    if args.name == "schottky":
        if args.max_len is None:
            raise UsageError("schottky needs --max-len")
        t = 4.0 if args.t is None else args.t
        return kleinian.enumerate_orbit(kleinian.schottky_group(t, args.m), args.max_len)
    if args.name == "parabolic":
        if args.steps is None:
            raise UsageError("parabolic needs --steps")
        return kleinian.enumerate_orbit(kleinian.parabolic_group(), args.steps)
    if args.depth is None:
        raise UsageError(f"{args.name} needs --depth")
    params = _gallery_params(args)
    if args.name == "gamma-radial" and params["t"] is None:
        params["t"] = 0.5
    params = {k: v for k, v in params.items() if v is not None}
    return gallery(args.name, n=args.n, K=args.depth, params=params, seed=args.seed)


def cmd_generate(args) -> int:
    E = _build(args)
    out = Path(args.out or f"{args.name}.txt")
    save(E, out)
    _emit({"file": str(out), "generator": E.meta["generator"], "count": E.count,
           "depth": E.depth, "seed": E.meta.get("seed")}, args,
          f"wrote {E.count} points to {out}")
    return 0


# ---------------------------------------------------------------- analyze


def _reference_model(E):
    p = E.meta.get("params", {}) or {}
    for key in ("X", "model"):
        if isinstance(p.get(key), dict):
            try:
                return model_from_dict(p[key])
            except (KeyError, ValueError):
                return None
    return None


ORBIT_SHELL = 8  # dyadic bins per Schottky generator step, rounded up


def analyze_set(E, box: bool = False, profiles: bool = False, c_grid=None,
                shell: int | None = None) -> dict:
    rep: dict = {"count": E.count, "n": E.n, "depth": E.depth, "min_gap": E.min_gap,
                 "generator": E.meta.get("generator"), "seed": E.meta.get("seed")}
    Kc = E.meta.get("complete_depth")
    if Kc is not None and Kc < E.depth:
        # bins deeper than this are only partly enumerated (orbits)
        E = truncate(E, int(Kc))
        rep["complete_depth"] = int(Kc)
    if shell is None:
        shell = ORBIT_SHELL if Kc is not None else 1
    bins = dyadic_counts(E)
    rep["counts"] = {str(k): v for k, v in sorted(bins.counts.items())}
    try:
        rep["exponent"] = critical_exponent(bins).as_dict()
        rep["exponent_limsup"] = critical_exponent(bins, method="limsup").delta_hat
        rep["exponent_auto"] = critical_exponent(bins, method="auto").delta_hat
    except PointSetError as exc:
        rep["exponent"] = {"error": str(exc)}
    ks, _ = bins.nonempty()
    if ks.size >= 2:
        rep["diverging"] = diverging_diagnostic(bins, E.n)
    S = None
    if box or profiles or c_grid:
        S = shell_surrogate(E, width=shell)
        rep["surrogate"] = {"rho": S.rho, "size": len(S), "resolution": S.resolution,
                            "shell": S.shell}
    if box:
        bd = box_dimension_estimate(S.points, S.box_range())
        rep["box_dimension"] = bd.as_dict()
    if profiles:
        T = E if E.min_gap >= CARTESIAN_MIN_GAP else truncate(E, 39)
        if T.count >= 2:
            sp = separation_profile(T)
            rep["separation"] = {"c1_hat": sp.c1_hat, "alpha_fit": sp.alpha_fit, "depth": T.depth}
        ref = _reference_model(E)
        ap = approximation_profile(T, ref if ref is not None else S)
        rep["approximation"] = {"reference_mode": ap.reference_mode, "resolution": ap.resolution,
                                "c2_hat": ap.c2_hat, "beta_fit": ap.beta_fit,
                                "well_approximated": ap.is_well_approximated()}
    if c_grid:
        Z = S.points[np.linspace(0, len(S) - 1, min(64, len(S))).round().astype(int)]
        res = max(S.rho, 2.0 ** -min(E.depth, 40))
        grid = {}
        for c in c_grid:
            rr = radial_members(E, Z, RadialQuery(float(c), 1.0, res))
            grid[format(c, "g")] = float(rr.accepted.mean())
        rep["radial_fraction"] = grid
    return rep


def cmd_analyze(args) -> int:
    E = load(args.file)
    c_grid = None
    if args.c_grid is not None:
        c_grid = C_GRID if args.c_grid == "" else [float(v) for v in args.c_grid.split(",")]
    rep = analyze_set(E, box=args.box, profiles=args.profiles, c_grid=c_grid, shell=args.shell)
    if args.csv:
        Path(args.csv).write_text(counts_csv(dyadic_counts(E)))
    ex = rep.get("exponent", {})
    line = f"{args.file}: count={E.count} depth={E.depth}"
    if "delta_hat" in ex:
        line += f" delta_hat={ex['delta_hat']:.6g}"
    _emit(rep, args, line)
    return 0


# ---------------------------------------------------------------- construct


def _parse_parts(text: str):
    parts = []
    for item in text.split(","):
        name, _, s = item.partition(":")
        if name not in MODELS or not s:
            raise UsageError(f"bad part {item!r}; use model:s with model in {sorted(MODELS)}")
        parts.append((MODELS[name](), float(s)))
    return parts


def cmd_construct(args) -> int:
    X = MODELS[args.model]()
    if args.kind == "net":
        E = net_construction(X, args.depth, seed=args.seed)
    elif args.kind == "vitali":
        E = vitali_construction(build_cover_family(X, args.s, args.depth))
    else:
        E = fsigma_merge(_parse_parts(args.parts), args.depth)
    bins = dyadic_counts(E)
    rep = {"construction": args.kind, "count": E.count, "depth": E.depth,
           "counts": {str(k): v for k, v in sorted(bins.counts.items())}}
    try:
        method = "auto" if args.kind == "fsigma" else "regression"
        rep["exponent"] = critical_exponent(bins, method=method).as_dict()
    except PointSetError as exc:
        rep["exponent"] = {"error": str(exc)}
    if args.out:
        save(E, args.out)
        rep["file"] = args.out
    _emit(rep, args, f"{args.kind}: count={E.count} depth={E.depth}")
    return 0


# ---------------------------------------------------------------- verify


def _verify_file(theorem: str, path: str, tol) -> VerificationReport:
    E = load(path)
    _require_seeded(E, path)
    dt = 0.1 if tol is None else float(tol)
    est = critical_exponent(dyadic_counts(E))
    if theorem == "sepwa":
        S = shell_surrogate(E)
        bd = box_dimension_estimate(S.points, S.box_range())
        checks = [Check("delta_hat <= boxdim", est.delta_hat, "<=", bd.slope, dt)]
        measured = {"delta_hat": est.delta_hat, "boxdim": bd.slope}
    elif theorem == "radial":
        r = 2.0 ** -max(1, E.depth // 2)
        hb = hausdorff_upper_bound(E, 1.0, r)
        checks = [Check("s_star <= delta_hat", hb.s_star, "<=", est.delta_hat, dt)]
        measured = {"delta_hat": est.delta_hat, "s_star": hb.s_star, "r": r}
    else:
        raise UsageError(f"--file is supported for sepwa and radial, not {theorem}")
    return VerificationReport(theorem, {"file": str(path), "generator": E.meta.get("generator"),
                                        "params": E.meta.get("params"), "seed": E.meta.get("seed"),
                                        "depth": E.depth}, measured, checks, dt)


def cmd_verify(args) -> int:
    if args.file:
        rep = _verify_file(args.theorem, args.file, args.tol)
    else:
        rep = run_verification(args.theorem, tol=args.tol, depth=args.depth)
    _emit(rep.as_dict(), args, rep.summary())
    return 0 if rep.passed else 1


# ---------------------------------------------------------------- parser


def _positive_int(v):
    i = int(v)
    if i < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return i


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="limitset", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated point set")
    g.add_argument("name", choices=GENERATORS)
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--depth", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--t", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--m", type=_positive_int, default=2, help="Schottky generator count")
    g.add_argument("--max-len", type=_positive_int)
    g.add_argument("--steps", type=_positive_int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="report exponent and profiles of a point-set file")
    a.add_argument("file")
    a.add_argument("--box", action="store_true", help="box dimension of the limit surrogate")
    a.add_argument("--profiles", action="store_true", help="separation and approximation profiles")
    a.add_argument("--c-grid", nargs="?", const="", default=None,
                   help="radial fractions over c values (comma list; default 1,2,...,64)")
    a.add_argument("--csv", help="write k,N_k,log2_N_k rows here")
    a.add_argument("--shell", type=_positive_int,
                   help="dyadic bins in the limit surrogate (default 1, orbits 8)")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("construct", help="boundary-driven constructions")
    c.add_argument("kind", choices=("net", "vitali", "fsigma"))
    c.add_argument("--model", choices=sorted(MODELS), default="cantor3")
    c.add_argument("--depth", type=int, default=12)
    c.add_argument("--s", type=float, default=0.7)
    c.add_argument("--parts", default="cantor3:0.9,cantor4:0.9")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="run a theorem-level experiment")
    v.add_argument("theorem", choices=THEOREM_IDS)
    v.add_argument("--tol", type=float)
    v.add_argument("--depth", type=int)
    v.add_argument("--file", help="check a seeded point-set file instead (sepwa, radial)")
    v.set_defaults(func=cmd_verify)

    for sp in (g, a, c, v):
        sp.add_argument("--json", help="write the JSON report here instead of stdout")
        sp.add_argument("--quiet", action="store_true", help="no text summary on stderr")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except (UsageError, PointSetError, WindowExhausted, UnknownTheorem, ValueError,
            MemoryError, OverflowError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"limitset: error: {msg}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

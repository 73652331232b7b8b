"""Canonical finite-depth experiments, one per theorem id.

Each experiment returns a :class:`VerificationReport` holding the inputs,
measured quantities and a list of checks. A check compares a measured value
with a reference (``<=``, ``>=`` or ``==``) and has a margin that is
non-negative when the relation holds exactly. The report margin is the
smallest check margin rescaled to the report tolerance, so

    passed  <=>  margin >= -tolerance

holds for the report as a whole.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kleinian
from .constructions import CantorCircle, full_circle
from .constructions.covers import build_cover_family, fsigma_merge, vitali_construction
from .constructions.gallery import gamma_radial, gamma_radial_model, sharpness
from .constructions.nets import net_construction
from .dimension import box_dimension_estimate, hausdorff_upper_bound
from .exponent import accumulation_series, critical_exponent
from .pointset import dyadic_counts, truncate
from .regularity import (approximation_profile, gamma_radial_members, radial_members, RadialQuery,
                         separation_profile, shell_surrogate)

DIM_TOL = 0.1
TARGET_TOL = 0.05

MODELS = {
    "full": lambda: full_circle(),
    "cantor3": lambda: CantorCircle(1.0 / 3.0, 2),
    "cantor4": lambda: CantorCircle(0.25, 2),
}

THEOREM_IDS = ("sepwa", "radial", "bigthm", "boxchar", "hauschar", "alphabeta", "gammaradial", "kleinian")


class UnknownTheorem(KeyError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    relation: str  # "<=", ">=", "=="
    reference: float
    tol: float

    @property
    def margin(self) -> float:
        if self.relation == "<=":
            return float(self.reference - self.value)
        if self.relation == ">=":
            return float(self.value - self.reference)
        return -abs(float(self.value - self.reference))

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "relation": self.relation,
                "reference": self.reference, "tol": self.tol, "margin": self.margin,
                "passed": self.passed}


@dataclass
class VerificationReport:
    theorem: str
    inputs: dict
    measured: dict
    checks: list[Check]
    tolerance: float
    runtime: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def margin(self) -> float:
        # rescale each margin to the report tolerance; exact checks (tol 0)
        # count as -inf on failure
        out = math.inf
        for c in self.checks:
            m = c.margin
            if c.tol > 0:
                m = m * self.tolerance / c.tol
            elif m < 0:
                m = -math.inf
            out = min(out, m)
        return out

    @property
    def passed(self) -> bool:
        return bool(self.checks) and self.margin >= -self.tolerance

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "inputs": self.inputs,
            "measured": self.measured,
            "checks": [c.as_dict() for c in self.checks],
            "margin": self.margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "notes": list(self.notes),
            "runtime": self.runtime,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        rows = [f"{self.theorem}: {status}  margin={self.margin:.6g}  tol={self.tolerance:g}"]
        w = max((len(c.name) for c in self.checks), default=0)
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            rows.append(f"  {mark} {c.name:<{w}}  {c.value:.6g} {c.relation} {c.reference:.6g}"
                        f"  (margin {c.margin:+.4g}, tol {c.tol:g})")
        return "\n".join(rows)


def _tols(tol):
    return (DIM_TOL, TARGET_TOL) if tol is None else (float(tol), float(tol))


def _delta(E, method="regression"):
    return critical_exponent(dyadic_counts(E), method=method)


def _model(name):
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


def _box(E, beta=1.0, budget=None):
    S = shell_surrogate(E, beta=beta) if budget is None else shell_surrogate(E, budget=budget, beta=beta)
    bd = box_dimension_estimate(S.points, S.box_range())
    return S, bd


def _net_measure(X, K, seed):
    E = net_construction(X, K, seed=seed)
    est = _delta(E)
    S, bd = _box(E)
    m = {"count": E.count, "delta_hat": est.delta_hat, "delta_stderr": est.slope_stderr,
         "boxdim": bd.slope, "boxdim_lower": bd.lower_slope, "boxdim_upper": bd.upper_slope,
         "box_range": list(S.box_range()), "surrogate_rho": S.rho, "surrogate_size": len(S),
         "s_sim": X.s_sim}
    return E, est, bd, m


def _midpoints(X, level, count=64):
    th = X.representatives(level)
    if th.size > count:
        th = th[np.linspace(0, th.size - 1, count).round().astype(int)]
    return np.column_stack([np.cos(th), np.sin(th)])


# ---------------------------------------------------------------- experiments


def verify_sepwa(model="cantor3", depth=20, seed=0, tol=None) -> VerificationReport:
    """delta(E) <= upper box dimension of L(E) on the net construction over ``model``."""
    dt, _ = _tols(tol)
    X = _model(model)
    E, est, bd, m = _net_measure(X, depth, seed)
    if not E.is_lazy and E.count <= 2_000_000:
        sp = separation_profile(E)
        ap = approximation_profile(E, X)
        m.update({"c1_hat": sp.c1_hat, "c2_hat": ap.c2_hat, "beta_fit": ap.beta_fit})
    checks = [Check("delta_hat <= boxdim", est.delta_hat, "<=", bd.slope, dt)]
    return VerificationReport("sepwa", {"generator": "net_construction", "model": X.describe(),
                                        "depth": depth, "seed": seed}, m, checks, dt)


def verify_boxchar(models=("full", "cantor3", "cantor4"), depth=20, seed=0, tol=None) -> VerificationReport:
    """The net construction attains the box dimension of X as its exponent."""
    dt, tt = _tols(tol)
    measured, checks = {}, []
    for name in models:
        X = _model(name)
        _, est, bd, m = _net_measure(X, depth, seed)
        measured[name] = m
        checks.append(Check(f"{name}: delta_hat <= boxdim", est.delta_hat, "<=", bd.slope, dt))
        checks.append(Check(f"{name}: delta_hat == dim X", est.delta_hat, "==", X.s_sim, tt))
        checks.append(Check(f"{name}: boxdim == dim X", bd.slope, "==", X.s_sim, tt))
    return VerificationReport("boxchar", {"generator": "net_construction", "models": list(models),
                                          "depth": depth, "seed": seed}, measured, checks, dt)


def verify_radial(depth=12, s=0.7, c=1.0, log2_r=-60, budget=1.0, tol=None) -> VerificationReport:
    """Cover-mass bound for dim_H of the radial limit set against delta, on a Vitali set."""
    dt, _ = _tols(tol)
    X = _model("cantor3")
    E = vitali_construction(build_cover_family(X, s, depth))
    est = _delta(E)
    hb = hausdorff_upper_bound(E, c, 2.0 ** log2_r, budget=budget)
    m = {"delta_hat": est.delta_hat, "s_star": hb.s_star, "c": c, "log2_r": log2_r,
         "mass_curve": [[p.s, p.mass] for p in hb.curve]}
    checks = [Check("s_star <= delta_hat", hb.s_star, "<=", est.delta_hat, dt)]
    return VerificationReport("radial", {"generator": "vitali_construction", "model": X.describe(),
                                         "s": s, "depth": depth}, m, checks, dt,
                              notes=["s_star decreases towards dim_H as r -> 0; finite r biases it upward"])


def verify_bigthm(model="cantor3", depth=20, seed=0, tol=None) -> VerificationReport:
    """dim_H L = dim_B L = delta on a separated, well-approximated net with radial limit set X."""
    dt, _ = _tols(tol)
    X = _model(model)
    E, est, bd, m = _net_measure(X, depth, seed)
    Z = _midpoints(X, 6)
    rr = radial_members(E, Z, RadialQuery(4.0, 1.0, 2.0 ** -depth))
    frac = float(rr.accepted.mean())
    m["radial_fraction"] = frac
    checks = [
        Check("delta_hat == boxdim", est.delta_hat, "==", bd.slope, dt),
        Check("delta_hat == dim_H X", est.delta_hat, "==", X.s_sim, dt),
        Check("cylinder points radial (c=4)", frac, ">=", 1.0, 0.0),
    ]
    return VerificationReport("bigthm", {"generator": "net_construction", "model": X.describe(),
                                         "depth": depth, "seed": seed}, m, checks, dt)


FSIGMA_PARTS = (("cantor3", 0.9), ("cantor4", 0.9))


def verify_hauschar(depth=12, s=0.7, fsigma_parts=FSIGMA_PARTS, fsigma_depth=4,
                    tol=None) -> VerificationReport:
    """Vitali construction with L_rad = X and delta near dim_H X; F-sigma merge of two parts."""
    dt, tt = _tols(tol)
    X = _model("cantor3")
    cover = build_cover_family(X, s, depth)
    E = vitali_construction(cover)
    est = _delta(E)
    S = accumulation_series(E, s)
    Z = _midpoints(X, 6)
    rr = radial_members(E, Z, RadialQuery(4.0, 1.0, 2.0 ** -12))
    parts = [(_model(n), float(v)) for n, v in fsigma_parts]
    F = fsigma_merge(parts, fsigma_depth)
    fest = _delta(F, method="auto")
    sp = separation_profile(F)
    dims = max(p[0].s_sim for p in parts)
    m = {
        "vitali": {"count": E.count, "depth": E.depth, "delta_hat": est.delta_hat, "S_E(s)": S,
                   "levels": [lv.level for lv in cover.levels],
                   "mass_ok": all(cover.mass_ok()), "layers_ok": all(cover.layers_ok()),
                   "radial_accepted": int(rr.accepted.sum()), "radial_tested": int(rr.accepted.size)},
        "fsigma": {"count": F.count, "depth": F.depth, "delta_hat": fest.delta_hat,
                   "delta_method": fest.notes[-1] if fest.notes else fest.method,
                   "c1_hat": sp.c1_hat, "max_part_dim": dims},
    }
    checks = [
        Check("vitali: S_E(s) < 1", S, "<=", 1.0, 0.0),
        Check("vitali: delta_hat <= s", est.delta_hat, "<=", s, 0.0),
        Check("vitali: delta_hat >= dim_H X", est.delta_hat, ">=", X.s_sim, dt),
        Check("vitali: midpoints radial (c=4)", float(rr.accepted.mean()), ">=", 1.0, 0.0),
        Check("fsigma: delta_hat <= max dim", fest.delta_hat, "<=", dims, dt),
        Check("fsigma: c1_hat >= 0.4", sp.c1_hat, ">=", 0.4, 0.0),
    ]
    return VerificationReport("hauschar", {"generator": "vitali_construction+fsigma_merge",
                                           "s": s, "depth": depth,
                                           "fsigma_parts": [list(p) for p in fsigma_parts],
                                           "fsigma_depth": fsigma_depth}, m, checks, dt)


def verify_alphabeta(alpha=1.25, beta=0.75, depth=40, n=2, tol=None) -> VerificationReport:
    """Generalized lower bound delta - 2(n alpha - (n-1) beta - 1) <= boxdim on the sharpness set."""
    dt, tt = _tols(tol)
    E = sharpness(alpha, beta, depth, n=n)
    est = _delta(E)
    S, bd = _box(E, beta=beta)
    expected = n * alpha - (n - 1) * beta - 1
    raw = est.delta_hat - 2.0 * expected
    bound = max(0.0, raw)
    sp = separation_profile(truncate(E, 20))
    m = {"count": E.count, "delta_hat": est.delta_hat, "expected_delta": expected,
         "raw_bound": raw, "bound": bound, "boxdim": bd.slope, "box_range": list(S.box_range()),
         "alpha_fit": sp.alpha_fit}
    checks = [
        Check("delta_hat == n alpha - (n-1) beta - 1", est.delta_hat, "==", expected, dt),
        Check("bound <= boxdim", bound, "<=", bd.slope, dt),
        Check("boxdim == 0", bd.slope, "==", 0.0, tt),
    ]
    return VerificationReport("alphabeta", {"generator": "sharpness", "alpha": alpha, "beta": beta,
                                            "n": n, "depth": depth}, m, checks, dt,
                              notes=["the bound is clamped at 0 since dimensions are non-negative"])


def verify_gammaradial(t=0.5, gamma=1.0, depth=30, tol=None) -> VerificationReport:
    """dim of the gamma-radial limit set <= delta / gamma, with equality on the self-similar example."""
    dt, tt = _tols(tol)
    E = gamma_radial(t, gamma, depth)
    est = _delta(E)
    S, bd = _box(E, budget=1 << 18)
    X = gamma_radial_model(t, gamma)
    res = 2.0 ** -depth
    rr = gamma_radial_members(E, _midpoints(X, 6), 4.0, gamma, res)
    m = {"count": E.count, "delta_hat": est.delta_hat, "boxdim": bd.slope,
         "box_range": list(S.box_range()), "s_sim": X.s_sim,
         "radial_accepted": int(rr.accepted.sum()), "radial_tested": int(rr.accepted.size)}
    checks = [
        Check("delta_hat == t", est.delta_hat, "==", t, tt),
        Check("boxdim <= delta_hat / gamma", bd.slope, "<=", est.delta_hat / gamma, dt),
        Check("boxdim == delta_hat / gamma", bd.slope, "==", est.delta_hat / gamma, tt),
        Check("cylinder points gamma-radial (c=4)", float(rr.accepted.mean()), ">=", 1.0, 0.0),
    ]
    return VerificationReport("gammaradial", {"generator": "gamma-radial", "t": t, "gamma": gamma,
                                              "depth": depth}, m, checks, dt)


def verify_kleinian(t=4.0, max_len=12, parabolic_steps=2000, tol=None) -> VerificationReport:
    """Schottky separation, approximation and Poincare exponent; parabolic counterexample."""
    dt, tt = _tols(tol)
    G = kleinian.schottky_group(t)
    orbit = kleinian.enumerate_orbit(G, max_len)
    rs = kleinian.kleinian_checks(orbit, G)
    P = kleinian.parabolic_group()
    rp = kleinian.kleinian_checks(kleinian.enumerate_orbit(P, parabolic_steps), P)
    d = rs["exponent"]["delta_hat"]
    checks = [
        Check("schottky: c1 spread across depths", rs["separation"]["spread"], "<=", 2.0, 0.0),
        Check("schottky: beta_fit == 1", rs["approximation"]["beta_fit"], "==", 1.0, dt),
        Check("schottky: delta_hat == boxdim", d, "==", rs["box_dimension"]["slope"], dt),
        Check("schottky: delta_hat == shell growth", d, "==", rs["shell_growth"]["rate"], dt),
        Check("parabolic: beta_fit == 0.5", rp["approximation"]["beta_fit"], "==", 0.5, tt),
        Check("parabolic: well-approximated flag", float(rp["approximation"]["well_approximated"]),
              "==", 0.0, 0.0),
        Check("parabolic: |w-x| / gap^(1/2) == sqrt 2", rp["sqrt_ratio"], "==", math.sqrt(2.0), tt),
    ]
    return VerificationReport("kleinian", {"generator": "schottky+parabolic", "t": t, "max_len": max_len,
                                           "parabolic_steps": parabolic_steps},
                              {"schottky": rs, "parabolic": rp}, checks, dt)


EXPERIMENTS = {
    "sepwa": verify_sepwa,
    "radial": verify_radial,
    "bigthm": verify_bigthm,
    "boxchar": verify_boxchar,
    "hauschar": verify_hauschar,
    "alphabeta": verify_alphabeta,
    "gammaradial": verify_gammaradial,
    "kleinian": verify_kleinian,
}


def run_verification(theorem: str, tol=None, depth=None, **kwargs) -> VerificationReport:
    """Run one experiment; ``depth`` maps to the experiment's main depth parameter."""
    if theorem not in EXPERIMENTS:
        raise UnknownTheorem(f"unknown theorem id {theorem!r}; choose from {', '.join(THEOREM_IDS)}")
    fn = EXPERIMENTS[theorem]
    if depth is not None:
        kwargs["max_len" if theorem == "kleinian" else "depth"] = int(depth)
    t0 = time.perf_counter()
    rep = fn(tol=tol, **kwargs)
    rep.runtime = time.perf_counter() - t0
    return rep

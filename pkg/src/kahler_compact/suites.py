"""Verification suites: named numerical checks with tolerances.

Each check computes a non-negative defect; it passes when the defect is at
most its tolerance. A check that raises is recorded as failed with the error
message and the run carries on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import chart_tensor as ct
from . import compactify as cpt
from . import einstein as ein
from . import lebrun as lb
from . import potentials as pots
from .errors import GeometryError

SUITES = ("chart", "potential", "compactify", "lebrun", "einstein")


@dataclass
class Check:
    suite: str
    name: str
    tolerance: float
    defect: float | None = None
    passed: bool = False
    diagnostic: str = ""

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "diagnostic": self.diagnostic,
        }


@dataclass(frozen=True)
class Context:
    beta: float
    rng: np.random.Generator
    corpus: dict
    points: int = 10


CheckFn = Callable[[Context], float]

# name -> (default tolerance, function); insertion order is report order.
REGISTRY: dict[str, dict[str, tuple[float, CheckFn]]] = {s: {} for s in SUITES}


def check(suite: str, name: str, tolerance: float):
    def register(fn: CheckFn) -> CheckFn:
        REGISTRY[suite][name] = (tolerance, fn)
        return fn

    return register


def default_tolerances() -> dict[str, float]:
    return {name: tol for suite in REGISTRY.values() for name, (tol, _) in suite.items()}


@lru_cache(maxsize=16)
def lebrun_potential(beta: float) -> lb.LeBrunPotential:
    return lb.recover_potential(beta)


def _random_points(rng: np.random.Generator, count: int, dim: int = 4, lo: float = 0.3, hi: float = 2.0) -> np.ndarray:
    v = rng.normal(size=(count, dim))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * rng.uniform(lo, hi, size=(count, 1))


def _lebrun_radii(ctx: Context, lo: float = 1.2, hi: float = 8.0) -> np.ndarray:
    return np.geomspace(lo, hi, ctx.points)


# --- chart --------------------------------------------------------------------


@check("chart", "flat_curvature", 1e-9)
def _flat(ctx):
    g = ct.euclidean(4)
    worst = 0.0
    for p in _random_points(ctx.rng, 100, lo=-5, hi=5):
        rep = ct.curvature_at(g, p)
        worst = max(worst, float(np.max(np.abs(rep.riemann))), abs(rep.scalar))
    return worst


@check("chart", "fubini_study_scalar", 1e-4)
def _fs(ctx):
    g = pots.metric_from_potential(pots.FUBINI_STUDY, 2)
    return max(abs(ct.curvature_at(g, p).scalar - 24.0) for p in _random_points(ctx.rng, ctx.points))


@check("chart", "scaling_law", 1e-9)
def _scaling(ctx):
    g = pots.metric_from_potential(pots.BURNS, 2)
    p = _random_points(ctx.rng, 1)[0]
    base = ct.curvature_at(g, p)
    worst = 0.0
    for c in (0.5, 2.0, 10.0):
        rep = ct.curvature_at(ct.scaled(g, c * c), p)
        worst = max(
            worst,
            float(np.max(np.abs(rep.riemann - base.riemann))),
            float(np.max(np.abs(rep.ricci - base.ricci))),
            abs(rep.scalar * c * c - base.scalar),
        )
    return worst


@check("chart", "bianchi_identity", 1e-10)
def _bianchi(ctx):
    g = pots.metric_from_potential(pots.BURNS, 2)
    return max(ct.bianchi_defect(ct.curvature_at(g, p)) for p in _random_points(ctx.rng, ctx.points))


@check("chart", "jet_vs_difference", 1e-6)
def _jet_fd(ctx):
    g = pots.metric_from_potential(pots.EGUCHI_HANSON, 2)
    return max(ct.jet_mismatch(g, p, 1e-3, order=4) for p in _random_points(ctx.rng, ctx.points))


@check("chart", "weyl_orientation_swap", 1e-12)
def _swap(ctx):
    g = lb.lebrun_metric(3.0, "frame")
    rep = ct.curvature_at(g, lb.frame_point(1.7))
    p1, m1 = ct.weyl_split(rep, 1)
    p2, m2 = ct.weyl_split(rep, -1)
    return float(max(np.max(np.abs(p1 - m2)), np.max(np.abs(m1 - p2))))


# --- potential --------------------------------------------------------------------


@check("potential", "corpus_kahler_defect", 1e-8)
def _corpus_kahler(ctx):
    j = ct.standard_structure(2)
    worst = 0.0
    for pot in ctx.corpus.values():
        g = pots.metric_from_potential(pot, 2)
        for p in _random_points(ctx.rng, ctx.points):
            worst = max(worst, *ct.kahler_defect(g, j, p))
    return worst


@check("potential", "unitary_invariance", 1e-9)
def _unitary(ctx):
    worst = 0.0
    for pot in ctx.corpus.values():
        g = pots.metric_from_potential(pot, 2)
        for p in _random_points(ctx.rng, ctx.points):
            a = ctx.rng.normal(size=(2, 2)) + 1j * ctx.rng.normal(size=(2, 2))
            u = pots.unitary_to_real(np.linalg.qr(a)[0])
            ui = np.linalg.inv(u)
            worst = max(worst, float(np.max(np.abs(g.value(u @ p) - ui.T @ g.value(p) @ ui))))
    return worst


@check("potential", "inversion_involution", 1e-12)
def _involution(ctx):
    pts = _random_points(ctx.rng, 200, lo=0.1, hi=10.0)
    return max(float(np.max(np.abs(pots.invert(pots.invert(p)) - p)) / np.linalg.norm(p)) for p in pts)


@check("potential", "axis_commutation", 1e-10)
def _axis(ctx):
    return max(pots.commutation_defect(pots.axis_point(Z)) for Z in np.geomspace(0.05, 20, ctx.points))


@check("potential", "burns_axis_form", 1e-12)
def _burns_axis(ctx):
    a, t = pots.kahler_form_axis(pots.BURNS, 1.0)
    return max(abs(a - 1.0), abs(t - 2.0))


# --- compactify --------------------------------------------------------------------


@check("compactify", "burns_to_fubini_study", 1e-9)
def _burns_fs(ctx):
    hat = cpt.compactified_potential(pots.BURNS, 1.0)
    xs = np.linspace(0.01, 1.0, 25)
    vals = np.array([hat(x) - math.log1p(x) for x in xs])
    return float(np.max(np.abs(vals - vals.mean())))


@check("compactify", "flat_to_flat", 1e-9)
def _flat_flat(ctx):
    hat = cpt.compactified_potential(pots.FLAT, 1.0)
    xs = np.linspace(0.01, 1.0, 25)
    vals = np.array([hat(x) - x for x in xs])
    return float(np.max(np.abs(vals - vals.mean())))


@check("compactify", "ode_system", 1e-10)
def _ode(ctx):
    hat = cpt.compactified_potential(pots.BURNS, 1.0)
    return max(max(map(abs, cpt.verify_ode_system(pots.BURNS, hat, Z))) for Z in ctx.rng.uniform(0.1, 10.0, 20))


@check("compactify", "pullback_identity_axis", 1e-8)
def _pullback(ctx):
    return max(cpt.verify_pullback_identity(pots.BURNS, Z) for Z in np.geomspace(0.1, 10.0, ctx.points))


@check("compactify", "compactified_kahler", 1e-6)
def _compact_kahler(ctx):
    j = pots.inversion_structure(2)
    worst = 0.0
    for pot in ctx.corpus.values():
        g = cpt.compactified_metric(pot, 2)
        for p in _random_points(ctx.rng, ctx.points):
            worst = max(worst, *ct.kahler_defect(g, j, p))
    return worst


@check("compactify", "lebrun_factor", 1e-8)
def _lebrun_factor(ctx):
    pot = lebrun_potential(ctx.beta)
    return max(abs(cpt.conformal_factor(pot, pot.Z_of_r(r)) * r * r - 1.0) for r in np.geomspace(1.1, 100.0, ctx.points))


@check("compactify", "ale_decay_order", 0.1)
def _ale(ctx):
    pot = lebrun_potential(ctx.beta)
    tau = cpt.ale_decay_rate(pots.metric_from_potential(pot, 2), np.geomspace(10.0, 100.0, 8))
    return max(0.0, 2.0 - tau)


# --- lebrun --------------------------------------------------------------------


@check("lebrun", "scalar_flat", 1e-5)
def _sflat(ctx):
    return lb.scalar_flat_certificate(ctx.beta, _lebrun_radii(ctx))[0]


@check("lebrun", "weyl_plus", 1e-5)
def _wplus(ctx):
    return lb.scalar_flat_certificate(ctx.beta, _lebrun_radii(ctx))[1]


@check("lebrun", "cone_angle", 1e-3)
def _cone(ctx):
    return abs(lb.cone_angle_estimate(ctx.beta) / (2 * math.pi * ctx.beta) - 1.0)


@check("lebrun", "edge_cone_leading_terms", 1e-4)
def _edge(ctx):
    rt = 1e-3
    a, b, c = lb.edge_cone_coefficients(ctx.beta, rt)
    return max(abs(a - 1.0), abs(b - 1.0), abs(c / (ctx.beta**2 * rt * rt) - 1.0))


@check("lebrun", "potential_round_trip", 1e-6)
def _round(ctx):
    pts = [lb.frame_point(r, (ctx.rng.uniform(0.3, 2.8), ctx.rng.uniform(0, 6), ctx.rng.uniform(0, 12))) for r in _lebrun_radii(ctx)]
    return lb.round_trip_defect(ctx.beta, pts, lebrun_potential(ctx.beta))


@check("lebrun", "radius_consistency", 1e-10)
def _radius(ctx):
    pot = lebrun_potential(ctx.beta)
    worst = 0.0
    for r in np.geomspace(1.05, 1e3, ctx.points):
        Z = pot.Z_of_r(r)
        worst = max(worst, abs(Z * pot.jet(Z)[1] / (r * r) - 1.0))
    return worst


@check("lebrun", "asymptotic_normalization", 1e-6)
def _asym(ctx):
    pot = lebrun_potential(ctx.beta)
    return abs(pot.jet(pot.Z_of_r(0.999 * pot.r_range[1]))[1] - 1.0)


@check("lebrun", "ricci_form_wedge", 1e-5)
def _rho(ctx):
    pot = lebrun_potential(ctx.beta)
    return lb.ricci_form_wedge_residual(ctx.beta, [pot.Z_of_r(r) for r in _lebrun_radii(ctx)], pot)


@check("lebrun", "zk_quotient", 0.5)
def _zk(ctx):
    if not float(ctx.beta).is_integer():
        return 0.0
    return 0.0 if lb.zk_quotient_check(int(ctx.beta), count=ctx.points, seed=int(ctx.rng.integers(2**31))) else 1.0


# --- einstein --------------------------------------------------------------------


def _einstein_radii(ctx) -> list[float]:
    rs = [r for r in _lebrun_radii(ctx, 1.1, 10.0) if abs(ein.scalar_curvature_hat(ctx.beta, r)) > 1.0]
    return rs


@check("einstein", "closed_form_agreement", 1e-12)
def _closed(ctx):
    return ein.closed_form_gap(ctx.beta, _lebrun_radii(ctx, 1.05, 50.0))


@check("einstein", "scalar_triangulation", 1e-4)
def _tri(ctx):
    hat = ein.compact_metric(ctx.beta)
    worst = 0.0
    for r in np.linspace(1.1, 10.0, 50):
        exact = ein.scalar_curvature_hat(ctx.beta, r)
        worst = max(
            worst,
            abs(ein.scalar_hat_pipeline(ctx.beta, r, hat=hat) - exact),
            abs(ein.scalar_hat_conformal(ctx.beta, r) - exact),
        )
    return worst


@check("einstein", "anti_self_dual_flip", 1e-5)
def _flip(ctx):
    hat = ein.compact_metric(ctx.beta)
    worst = 0.0
    for r in _lebrun_radii(ctx):
        rep = ct.curvature_at(hat, lb.frame_point(r))
        worst = max(worst, float(np.linalg.norm(ct.weyl_split(rep, hat.kahler_orientation)[1])))
    return worst


@check("einstein", "einstein_constant_normalized", 1e-4)
def _einstein(ctx):
    return ein.einstein_certificate(ctx.beta, _einstein_radii(ctx)).max_defect


@check("einstein", "einstein_constant_fit", 1e-3)
def _fit(ctx):
    return ein.einstein_certificate(ctx.beta, _einstein_radii(ctx)).lambda_relative_error


@check("einstein", "greens_function", 1e-5)
def _green(ctx):
    return ein.greens_function_check(ctx.beta, _lebrun_radii(ctx, 1.2, 6.0))


@check("einstein", "regime_consistency", 0.5)
def _regime(ctx):
    rep = ein.regime_report(ctx.beta)
    ok = (rep.regime == "ahe-split") == (rep.zero_locus_r2 is not None) and rep.sign_change in (None, True)
    return 0.0 if ok else 1.0


# --- running --------------------------------------------------------------------


def run_check(suite: str, name: str, ctx: Context, tolerance: float | None = None) -> Check:
    default, fn = REGISTRY[suite][name]
    tol = default if tolerance is None else tolerance
    out = Check(suite, name, tol)
    try:
        defect = float(fn(ctx))
    except (GeometryError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        out.diagnostic = f"{type(exc).__name__}: {exc}"
        return out
    if not math.isfinite(defect):
        out.diagnostic = "non-finite defect"
        return out
    out.defect = defect
    out.passed = defect <= tol
    return out


def run_suites(suites, beta: float, seed: int, corpus: dict, tolerances: dict | None = None, points: int = 10) -> list[Check]:
    tolerances = tolerances or {}
    rng = np.random.default_rng(seed)
    ctx = Context(beta, rng, corpus, points)
    checks = []
    for suite in suites:
        for name in REGISTRY[suite]:
            checks.append(run_check(suite, name, ctx, tolerances.get(name)))
    return checks


def profile_table(beta: float, r_values) -> list[dict]:
    """Rows of ``r, V, R_hat, u, Z`` for the LeBrun profile and its compactification."""
    r_values = [float(r) for r in r_values]
    pot = lebrun_potential(beta)
    lo, hi = min(r_values), max(r_values)
    if lo <= pot.r_range[0] or hi >= pot.r_range[1]:
        # the domain is open, so widen strictly past the requested ends
        pot = lb.recover_potential(beta, (min(1.0 + 0.5 * (lo - 1.0), pot.r_range[0]), max(2.0 * hi, pot.r_range[1])))
    prof = lb.CoframeProfile(beta)
    rows = []
    for r in r_values:
        r = float(r)
        Z = pot.Z_of_r(r)
        rows.append(
            {
                "r": r,
                "V": float(prof.V(r)),
                "R_hat": float(ein.scalar_curvature_hat(beta, r)),
                "u": float(cpt.conformal_factor(pot, Z)),
                "z": Z,
            }
        )
    return rows

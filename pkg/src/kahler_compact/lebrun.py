"""U(2)-invariant scalar-flat Kähler metrics with profile

    V(r) = 1 + (beta - 2)/r^2 + (1 - beta)/r^4,
    g = dr^2 / V + r^2 (s1^2 + s2^2 + V s3^2),

where ``s1, s2, s3`` is a left-invariant coframe on S^3 normalized so that
``V = 1`` is flat space.

Two charts are used. The *frame* chart has coordinates ``(r, theta, phi, psi)``
with ``s1^2 + s2^2 = (d theta^2 + sin^2 theta d phi^2)/4`` and
``s3 = (d psi + cos theta d phi)/2``; ``psi`` has period ``4 pi``. The
*complex* chart is C^2 with the metric of a radial potential recovered by
integrating the radial flow ``d log Z / dr = 2 / (r V)``. The two are related by

    z1 = sqrt(Z) cos(theta/2) exp(i (psi + phi)/2),
    z2 = sqrt(Z) sin(theta/2) exp(i (psi - phi)/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from . import jets
from .chart_tensor import (
    ChartMetricField,
    curvature_at,
    standard_j,
    weyl_split,
)
from .errors import ConeAngleError, DomainError, NotALEError, ODEError, QuadratureError
from .jets import Jet, Taylor
from .potentials import RadialPotential, metric_from_potential, unitary_to_real

FLOW_CONSTANT = 2.0
FRAME_ANGLES = (1.1, 0.4, 0.7)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0:
        raise ValueError("cone parameter must be positive")
    return beta


@dataclass(frozen=True)
class CoframeProfile:
    """Radial profile ``V(r) = 1 + a2/r^2 + a3/r^3 + a4/r^4``.

    ``a2``/``a4`` default to ``beta - 2`` and ``1 - beta`` and ``a3`` to zero;
    overriding them gives profiles outside the family. Every profile with
    ``a3 = 0`` is scalar-flat; only ``a2 + a4 = -1`` closes off at ``r = 1``.
    """

    beta: float
    a2: float | None = None
    a4: float | None = None
    a3: float = 0.0
    quotient_k: int | None = field(default=None)

    def __post_init__(self):
        _check_beta(self.beta)
        if self.a2 is None:
            object.__setattr__(self, "a2", self.beta - 2.0)
        if self.a4 is None:
            object.__setattr__(self, "a4", 1.0 - self.beta)
        if self.quotient_k is None and float(self.beta).is_integer():
            object.__setattr__(self, "quotient_k", int(self.beta))

    @property
    def is_family_member(self) -> bool:
        return self.a2 == self.beta - 2.0 and self.a4 == 1.0 - self.beta and self.a3 == 0.0

    def V(self, r):
        """Jet-, series- and array-evaluable."""
        s = 1.0 / r
        s2 = s * s
        v = 1.0 + self.a2 * s2 + self.a4 * (s2 * s2)
        return v + self.a3 * (s2 * s) if self.a3 else v

    def V_jet(self, r: float) -> np.ndarray:
        return Taylor(self.V(Taylor.variable(r, 2)).c).derivatives()

    def corrupted(self) -> "CoframeProfile":
        """``1 - beta`` replaced by ``2 - beta``.

        Still scalar-flat, but ``V(1) = 1`` so the exceptional orbit is lost.
        """
        return CoframeProfile(self.beta, self.a2, 2.0 - self.beta)

    def perturbed(self, a3: float = 1.0) -> "CoframeProfile":
        """Adds ``a3 / r^3``; scalar curvature becomes proportional to ``a3 / r^5``."""
        return CoframeProfile(self.beta, self.a2, self.a4, a3)


def V(beta: float, r):
    return CoframeProfile(beta).V(r)


# --- frame chart ----------------------------------------------------------------


def frame_formula(profile: CoframeProfile):
    """``(r, theta, phi, psi) -> g``."""

    def formula(x):
        r, th = x[0], x[1]
        v = profile.V(r)
        r2 = r * r
        c, s = jets.cos(th), jets.sin(th)
        g_rr = 1.0 / v
        g_thth = 0.25 * r2
        g_phph = 0.25 * r2 * (s * s + v * c * c)
        g_psps = 0.25 * r2 * v
        g_phps = 0.25 * r2 * v * c
        rows = [
            [g_rr, 0.0, 0.0, 0.0],
            [0.0, g_thth, 0.0, 0.0],
            [0.0, 0.0, g_phph, g_phps],
            [0.0, 0.0, g_phps, g_psps],
        ]
        return jets.matrix(rows, dim=len(x))

    return formula


def frame_point(r: float, angles: Sequence[float] = FRAME_ANGLES) -> np.ndarray:
    return np.array([r, *angles], dtype=float)


def _chart_map(rho, x):
    """Frame coordinates to (x1, y1, x2, y2), given ``rho = sqrt(Z)`` as a function of ``r``."""
    r, th, ph, ps = x
    a, b = 0.5 * (ps + ph), 0.5 * (ps - ph)
    R = rho(r)
    ch, sh = jets.cos(0.5 * th), jets.sin(0.5 * th)
    return [R * ch * jets.cos(a), R * ch * jets.sin(a), R * sh * jets.cos(b), R * sh * jets.sin(b)]


def _frame_orientation() -> int:
    comps = _chart_map(lambda r: r, Jet.variables(frame_point(2.0)))
    return int(np.sign(np.linalg.det(np.array([c.grad for c in comps]))))


# Sign of the Jacobian determinant of the frame-to-complex map: the frame
# coordinate order is this orientation relative to (x1, y1, x2, y2).
FRAME_KAHLER_ORIENTATION = _frame_orientation()


# --- potential recovery ---------------------------------------------------------


class LeBrunPotential(RadialPotential):
    """Potential recovered from a profile by integrating the radial flow.

    ``log Z - 2 log r`` is integrated in ``s = 1/r`` from ``s = 0``, where it
    vanishes (this is the normalization ``phi' -> 1`` at infinity). Given
    ``Z``, ``r(Z)`` is found by root-finding on the dense ODE solution; the
    order-4 jet of ``phi`` then follows exactly from Taylor recursion of
    ``dr/dZ = r V(r) / (2 Z)`` and ``phi' = r^2 / Z``.
    """

    def __init__(self, profile: CoframeProfile, r_range=(1.01, 1e4), tol: float = 1e-10, r_anchor: float = 2.0):
        r_lo, r_hi = float(r_range[0]), float(r_range[1])
        if not 1.0 < r_lo < r_hi:
            raise DomainError("radial range must lie in (1, inf)")
        self.profile = profile
        self.r_range = (r_lo, r_hi)
        self.tol = tol
        grid = np.linspace(r_lo, r_hi, 64)
        if np.any(profile.V(grid) <= 0):
            raise NotALEError("profile not ALE (V vanishes inside the radial range)")
        a2, a3, a4 = profile.a2, profile.a3, profile.a4

        def rhs(s, y):
            s2 = s * s
            v = 1.0 + a2 * s2 + a3 * s2 * s + a4 * s2 * s2
            return [FLOW_CONSTANT * (a2 * s + a3 * s2 + a4 * s * s2) / v]

        sol = integrate.solve_ivp(
            rhs, (0.0, 1.0 / r_lo), [0.0], method="RK45", rtol=tol, atol=tol * 1e-2, dense_output=True
        )
        if not sol.success:
            raise ODEError(f"ODE failure: {sol.message}")
        self._sol = sol.sol
        self.r_anchor = min(max(r_anchor, r_lo), r_hi)
        z_lo, z_hi = self.Z_of_r(r_lo), self.Z_of_r(r_hi)
        super().__init__(f"lebrun[{profile.beta:g}]", self._series, (z_lo, z_hi))

    def log_ratio(self, r: float) -> float:
        """``log Z - 2 log r`` at ``r``."""
        return float(self._sol(1.0 / r)[0])

    def Z_of_r(self, r: float) -> float:
        return r * r * math.exp(self.log_ratio(r))

    def r_of_Z(self, Z: float) -> float:
        lo, hi = self.r_range
        logz = math.log(Z)

        def f(r):
            return 2.0 * math.log(r) + self.log_ratio(r) - logz

        fa, fb = f(lo), f(hi)
        if fa * fb > 0:
            if abs(fa) < 1e-13:
                return lo
            if abs(fb) < 1e-13:
                return hi
            raise DomainError(f"potential not defined here (Z={Z!r} outside the integrated range)")
        return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)

    def _r_series(self, Z0: float, order: int) -> Taylor:
        r0 = self.r_of_Z(Z0)
        zs = Taylor.variable(Z0, order)
        r = Taylor(np.r_[r0, np.zeros(order)])
        # Picard iteration: each pass fixes one more coefficient.
        for _ in range(order):
            rhs = r * self.profile.V(r) / (FLOW_CONSTANT * zs)
            r = rhs.truncate(order - 1).integrate(r0)
        return r

    def phi_value(self, r: float) -> float:
        """``phi`` at radius ``r``: the integral of ``2 r / V`` from the anchor radius."""
        val, err = integrate.quad(lambda t: 2.0 * t / self.profile.V(t), self.r_anchor, r, epsabs=1e-12, epsrel=1e-12, limit=200)
        if err > 1e-8 * max(1.0, abs(val)):
            raise QuadratureError("integral did not converge")
        return float(val)

    def _series(self, Z0: float, order: int) -> Taylor:
        r = self._r_series(Z0, order)
        dphi = (r * r / Taylor.variable(Z0, order)).truncate(max(order - 1, 0))
        return dphi.integrate(self.phi_value(float(r.c[0]))).truncate(order)

    def chart_map(self, x):
        """Frame coordinates to complex-chart coordinates, jet-evaluable."""
        return _chart_map(self._rho, x)

    def _rho(self, r):
        if isinstance(r, Jet):
            r0 = float(r.val)
            v = self.profile.V(r0)
            dv = self.profile.V_jet(r0)[1]
            Z = self.Z_of_r(r0)
            z1 = FLOW_CONSTANT * Z / (r0 * v)
            z2 = FLOW_CONSTANT * z1 / (r0 * v) - FLOW_CONSTANT * Z * (v + r0 * dv) / (r0 * v) ** 2
            return jets.sqrt(r.apply(Z, z1, z2))
        return math.sqrt(self.Z_of_r(float(r)))


def recover_potential(beta: float, r_range=(1.01, 1e4), tol: float = 1e-10) -> LeBrunPotential:
    return LeBrunPotential(CoframeProfile(_check_beta(beta)), r_range, tol)


def lebrun_metric(beta: float, chart: str = "frame", profile: CoframeProfile | None = None, **kwargs) -> ChartMetricField:
    """The metric in the frame chart ``(r, theta, phi, psi)`` or in the complex chart."""
    profile = CoframeProfile(_check_beta(beta)) if profile is None else profile
    if chart == "frame":
        return ChartMetricField(4, frame_formula(profile), f"g_LB({profile.beta:g}) frame", FRAME_KAHLER_ORIENTATION)
    if chart == "complex":
        pot = LeBrunPotential(profile, **kwargs)
        return metric_from_potential(pot, 2).with_label(f"g_LB({profile.beta:g}) complex")
    raise ValueError(f"unknown chart {chart!r}")


def frame_to_complex(pot: LeBrunPotential, q) -> tuple[np.ndarray, np.ndarray]:
    """Image of a frame point and the Jacobian of the chart map there."""
    comps = pot.chart_map(Jet.variables(np.asarray(q, dtype=float)))
    return np.array([float(c.val) for c in comps]), np.array([c.grad for c in comps])


def round_trip_defect(beta: float, frame_points, pot: LeBrunPotential | None = None) -> float:
    """Max relative gap between the frame metric and the pulled-back complex-chart metric."""
    pot = recover_potential(beta) if pot is None else pot
    frame = lebrun_metric(beta, "frame", pot.profile)
    complex_metric = metric_from_potential(pot, 2)
    worst = 0.0
    for q in frame_points:
        x, d = frame_to_complex(pot, q)
        pulled = d.T @ complex_metric.value(x) @ d
        g = frame.value(q)
        worst = max(worst, float(np.max(np.abs(pulled - g)) / np.max(np.abs(g))))
    return worst


# --- certificates ---------------------------------------------------------------


def scalar_flat_certificate(
    beta: float, r_samples, profile: CoframeProfile | None = None, angles: Sequence[float] = FRAME_ANGLES
) -> tuple[float, float]:
    """Max ``|scalar|`` and max ``|W+|`` (Kähler orientation) over frame-chart samples."""
    metric = lebrun_metric(beta, "frame", profile)
    worst_s = worst_w = 0.0
    for r in r_samples:
        rep = curvature_at(metric, frame_point(r, angles))
        wp, _ = weyl_split(rep, metric.kahler_orientation)
        worst_s = max(worst_s, abs(rep.scalar))
        worst_w = max(worst_w, float(np.linalg.norm(wp)))
    return worst_s, worst_w


def _wedge(a: np.ndarray, b: np.ndarray) -> float:
    """Coefficient of ``dx0 ^ dx1 ^ dx2 ^ dx3`` in ``a ^ b`` for 2-forms given as matrices."""
    return float(
        a[0, 1] * b[2, 3] - a[0, 2] * b[1, 3] + a[0, 3] * b[1, 2]
        + a[1, 2] * b[0, 3] - a[1, 3] * b[0, 2] + a[2, 3] * b[0, 1]
    )


def ricci_form_wedge_residual(beta: float, Z_samples, pot: LeBrunPotential | None = None) -> float:
    """Max ``|rho ^ omega|`` in the complex chart, with ``rho(x, y) = Ric(Jx, y)``.

    Points are taken along a fixed generic direction at the given ``Z``.
    """
    pot = recover_potential(beta) if pot is None else pot
    metric = metric_from_potential(pot, 2)
    j = standard_j(2)
    e = np.array([0.8, 0.3, -0.4, 0.35])
    e = e / np.linalg.norm(e)
    worst = 0.0
    for Z in Z_samples:
        rep = curvature_at(metric, math.sqrt(Z) * e)
        rho = j.T @ rep.ricci
        omega = j.T @ rep.metric
        worst = max(worst, abs(_wedge(rho, omega)))
    return worst


def edge_cone_radius(beta: float, rt: float) -> float:
    """``r`` with ``rt^2 = (r^2 - 1) / beta``."""
    return math.sqrt(1.0 + beta * rt * rt)


def edge_cone_coefficients(beta: float, rt: float, profile: CoframeProfile | None = None) -> tuple[float, float, float]:
    """Coefficients of ``d rt^2``, ``s1^2`` (= ``s2^2``) and ``s3^2`` at ``rt``."""
    profile = CoframeProfile(_check_beta(beta)) if profile is None else profile
    r = edge_cone_radius(beta, rt)
    v = profile.V(r)
    drdrt = beta * rt / r
    return drdrt * drdrt / v, r * r, r * r * v


def geodesic_radius(profile: CoframeProfile, r: float) -> float:
    """Distance from the exceptional orbit ``r = 1`` along a radial line.

    The substitution ``r = 1 + t^2`` removes the inverse-square-root endpoint
    singularity; ``r^4 V = (r^2 - 1)(r^2 + beta - 1)`` makes the integrand
    free of cancellation.
    """
    beta = profile.beta

    def integrand(t):
        rr = 1.0 + t * t
        return 2.0 * rr * rr / math.sqrt((2.0 + t * t) * (rr * rr + beta - 1.0))

    val, err = integrate.quad(integrand, 0.0, math.sqrt(r - 1.0), epsabs=1e-15, epsrel=1e-13)
    return float(val)


def circumference(profile: CoframeProfile, r: float) -> float:
    """Length of the fibre circle at ``r`` (``psi`` has period ``4 pi``)."""
    return 2.0 * math.pi * r * math.sqrt(profile.V(r))


def cone_angle_estimate(beta: float, rts: Sequence[float] = (1e-2, 1e-3)) -> float:
    """Limit of circumference / geodesic radius at the exceptional orbit.

    The ratio is computed at two small edge-cone radii and extrapolated
    (Richardson, error quadratic in the geodesic radius).
    """
    profile = CoframeProfile(_check_beta(beta))
    ratios, s2 = [], []
    for rt in rts:
        r = edge_cone_radius(beta, rt)
        s = geodesic_radius(profile, r)
        ratios.append(circumference(profile, r) / s)
        s2.append(s * s)
    (q1, q2), (a, b) = ratios, s2
    limit = (q2 * a - q1 * b) / (a - b)
    if not math.isfinite(limit) or abs(limit - q2) > 1e-2 * abs(limit):
        raise ConeAngleError("cone angle unresolved")
    return float(limit)


def invariance_defect(metric: ChartMetricField, transform: np.ndarray, points) -> float:
    """Max ``|g(A p) - A^{-T} g(p) A^{-1}|`` over ``points`` for a linear map ``A``."""
    ainv = np.linalg.inv(transform)
    worst = 0.0
    for p in points:
        lhs = metric.value(transform @ p)
        rhs = ainv.T @ metric.value(p) @ ainv
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def zk_generator(k: int) -> np.ndarray:
    """Real 4x4 matrix of ``(z1, z2) -> exp(2 pi i / k) (z1, z2)``."""
    w = np.exp(2j * math.pi / k)
    return unitary_to_real(np.diag([w, w]))


def complex_chart_samples(pot: LeBrunPotential, count: int, rng: np.random.Generator, r_bounds=(1.2, 20.0)) -> np.ndarray:
    """Random chart points with LeBrun radius in ``r_bounds``."""
    out = np.empty((count, 4))
    for i in range(count):
        r = rng.uniform(*r_bounds)
        v = rng.normal(size=4)
        out[i] = math.sqrt(pot.Z_of_r(r)) * v / np.linalg.norm(v)
    return out


def zk_quotient_check(k: int, count: int = 50, seed: int = 0, tol: float = 1e-10) -> bool:
    """Generator invariance of ``g_LB(k)`` and cone angle ``2 pi`` after dividing by ``k``."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = int(k)
    pot = recover_potential(k)
    metric = metric_from_potential(pot, 2)
    pts = complex_chart_samples(pot, count, np.random.default_rng(seed))
    invariant = invariance_defect(metric, zk_generator(k), pts) < tol
    angle = cone_angle_estimate(k) / k
    return bool(invariant and abs(angle - 2 * math.pi) < 1e-3 * 2 * math.pi)

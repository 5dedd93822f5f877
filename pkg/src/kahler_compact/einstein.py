"""Compactified LeBrun metrics and the Einstein metrics conformal to them.

``g_hat = r^-4 g_LB`` is Kähler for the orientation opposite to that of
``g_LB`` and has vanishing Weyl half there (Bochner-Kähler). Its scalar
curvature has the closed form ``24 [(2 - beta) + 2 (beta - 1) / r^2]`` and
``(R_hat / 24)^-2 g_hat`` is Einstein with constant ``6 beta^2 (2 - beta)``
wherever ``R_hat`` does not vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from . import jets
from .chart_tensor import ChartMetricField, conformal, curvature_at, laplacian
from .errors import GeometryError, SingularFactorError
from .lebrun import FRAME_ANGLES, FRAME_KAHLER_ORIENTATION, CoframeProfile, _check_beta, frame_point, lebrun_metric

SCALAR_NORMALIZATION = 24.0
FACTOR_MARGIN = 0.1
CLOSED_FORM_TOL = 1e-12


def scalar_curvature_hat(beta: float, r):
    """Closed-form scalar curvature of the compactified metric (jet-evaluable in ``r``)."""
    return 24.0 * ((2.0 - beta) + 2.0 * (beta - 1.0) / (r * r))


def einstein_constant(beta: float) -> float:
    return 6.0 * beta * beta * (2.0 - beta)


def zero_locus_r2(beta: float) -> float | None:
    """``r^2`` where the compactified scalar curvature vanishes, when inside ``r > 1``."""
    if beta <= 2.0:
        return None
    return 2.0 * (beta - 1.0) / (beta - 2.0)


def bochner_kahler_closed_form(beta: float) -> ChartMetricField:
    """``dr^2 / ((r^2 + beta - 1)(r^2 - 1)) + r^-2 [s1^2 + s2^2 + V s3^2]`` in the frame chart."""
    profile = CoframeProfile(_check_beta(beta))

    def formula(x):
        r, th = x[0], x[1]
        r2 = r * r
        v = profile.V(r)
        c, s = jets.cos(th), jets.sin(th)
        q = 0.25 / r2
        g_phps = q * v * c
        rows = [
            [1.0 / ((r2 + beta - 1.0) * (r2 - 1.0)), 0.0, 0.0, 0.0],
            [0.0, q, 0.0, 0.0],
            [0.0, 0.0, q * (s * s + v * c * c), g_phps],
            [0.0, 0.0, g_phps, q * v],
        ]
        return jets.matrix(rows, dim=len(x))

    return ChartMetricField(4, formula, f"g_BK({beta:g})", -FRAME_KAHLER_ORIENTATION)


def _inverse_fourth_power(x):
    r2 = x[0] * x[0]
    return 1.0 / (r2 * r2)


def compact_metric(beta: float, check_points: Sequence[float] = (1.3, 2.0, 7.0)) -> ChartMetricField:
    """``r^-4 g_LB(beta)`` in the frame chart, checked against the closed form."""
    g = lebrun_metric(beta, "frame")
    hat = conformal(g, _inverse_fourth_power, f"g_hat({beta:g})", kahler_orientation=-g.kahler_orientation)
    gap = closed_form_gap(beta, check_points, hat)
    if gap > CLOSED_FORM_TOL:
        raise GeometryError(f"compactified metric disagrees with its closed form ({gap:.2e})")
    return hat


def closed_form_gap(beta: float, r_samples, hat: ChartMetricField | None = None) -> float:
    """Max relative entry gap between ``r^-4 g_LB`` and the closed form."""
    if hat is None:
        g = lebrun_metric(beta, "frame")
        hat = conformal(g, _inverse_fourth_power)
    ref = bochner_kahler_closed_form(beta)
    worst = 0.0
    for r in r_samples:
        p = frame_point(r)
        a, b = hat.value(p), ref.value(p)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    return worst


def scalar_hat_pipeline(beta: float, r: float, angles=FRAME_ANGLES, hat: ChartMetricField | None = None) -> float:
    hat = compact_metric(beta) if hat is None else hat
    return curvature_at(hat, frame_point(r, angles)).scalar


def scalar_hat_conformal(beta: float, r: float, angles=FRAME_ANGLES) -> float:
    """``-6 u^-3 Delta_g u`` with ``u = r^-2`` on the scalar-flat ``g_LB``."""
    g = lebrun_metric(beta, "frame")
    lap = laplacian(g, lambda x: 1.0 / (x[0] * x[0]), frame_point(r, angles))
    u = r**-2
    return -6.0 * lap / u**3


def zero_locus_root(beta: float) -> float:
    """``r^2`` of the zero of the closed form, by bracketing root-finding."""
    r2 = zero_locus_r2(beta)
    if r2 is None:
        raise ValueError("scalar curvature has no zero for beta <= 2")
    root = optimize.brentq(lambda r: scalar_curvature_hat(beta, r), 1.0 + 1e-9, 1e6, xtol=1e-15, rtol=1e-15)
    return root * root


def einstein_metric(beta: float, normalization: float = SCALAR_NORMALIZATION) -> ChartMetricField:
    """``(R_hat / normalization)^-2 g_hat``; ``normalization=1`` is the bare ``R_hat^-2`` factor."""
    g = lebrun_metric(beta, "frame")

    def factor(x):
        r = x[0]
        rh = scalar_curvature_hat(beta, r) / normalization
        r2 = r * r
        return 1.0 / (rh * rh * r2 * r2)

    return conformal(g, factor, f"g_tilde({beta:g})", kahler_orientation=-g.kahler_orientation)


@dataclass(frozen=True)
class EinsteinCertificate:
    max_defect: float
    fitted_lambda: float
    expected_lambda: float

    @property
    def lambda_relative_error(self) -> float:
        scale = max(abs(self.expected_lambda), 1.0)
        return abs(self.fitted_lambda - self.expected_lambda) / scale


def _frame_norm(t: np.ndarray, g: np.ndarray) -> float:
    gi = np.linalg.inv(g)
    return math.sqrt(max(float(np.einsum("ij,jk,kl,li->", gi, t, gi, t)), 0.0))


def einstein_certificate(
    beta: float,
    r_samples,
    angles=FRAME_ANGLES,
    normalization: float = SCALAR_NORMALIZATION,
    expected_lambda: float | None = None,
) -> EinsteinCertificate:
    """Max of ``|Ric(g_tilde) - lambda g_tilde|`` (in the norm of ``g_tilde``) over samples."""
    beta = _check_beta(beta)
    lam = einstein_constant(beta) if expected_lambda is None else expected_lambda
    metric = einstein_metric(beta, normalization)
    worst, traces = 0.0, []
    for r in r_samples:
        if abs(scalar_curvature_hat(beta, r)) <= FACTOR_MARGIN:
            raise SingularFactorError(f"conformal factor singular here (r={r!r})")
        rep = curvature_at(metric, frame_point(r, angles))
        worst = max(worst, _frame_norm(rep.ricci - lam * rep.metric, rep.metric))
        traces.append(rep.scalar / 4.0)
    return EinsteinCertificate(worst, float(np.mean(traces)), lam)


def proportionality_defect(a: ChartMetricField, b: ChartMetricField, r_samples, angles=FRAME_ANGLES) -> tuple[float, float]:
    """Best constant ``c`` with ``a = c b`` over the samples, and the max relative deviation."""
    pairs = [(a.value(frame_point(r, angles)), b.value(frame_point(r, angles))) for r in r_samples]
    num = sum(float(np.sum(x * y)) for x, y in pairs)
    den = sum(float(np.sum(y * y)) for _, y in pairs)
    c = num / den
    dev = max(float(np.max(np.abs(x - c * y)) / np.max(np.abs(x))) for x, y in pairs)
    return c, dev


def greens_function_check(beta: float, r_samples, coefficient: float = 1.0 / 6.0, angles=FRAME_ANGLES) -> float:
    """Max ``|(-Delta_hat + coefficient * R_hat)(r^2)|`` with ``R_hat`` from the curvature pipeline."""
    hat = compact_metric(beta)
    worst = 0.0
    for r in r_samples:
        p = frame_point(r, angles)
        lap = laplacian(hat, lambda x: x[0] * x[0], p)
        scal = curvature_at(hat, p).scalar
        worst = max(worst, abs(-lap + coefficient * scal * r * r))
    return worst


REGIMES = ("positive-einstein", "ricci-flat-boundary", "ahe-split")


@dataclass(frozen=True)
class RegimeReport:
    beta: float
    regime: str
    einstein_constant: float
    zero_locus_r2: float | None = None
    sign_change: bool | None = None

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "regime": self.regime,
            "einstein_constant": self.einstein_constant,
            "zero_locus_r2": self.zero_locus_r2,
            "sign_change": self.sign_change,
        }


def regime_report(beta: float, tol: float = 1e-12) -> RegimeReport:
    beta = _check_beta(beta)
    lam = einstein_constant(beta)
    if abs(beta - 2.0) <= tol:
        return RegimeReport(beta, REGIMES[1], 0.0)
    if beta < 2.0:
        return RegimeReport(beta, REGIMES[0], lam)
    r2 = zero_locus_r2(beta)
    r0 = math.sqrt(r2)
    inner = scalar_curvature_hat(beta, 0.5 * (1.0 + r0))
    outer = scalar_curvature_hat(beta, 2.0 * r0)
    return RegimeReport(beta, REGIMES[2], lam, r2, bool(inner > 0 > outer))

"""Conformal compactification of radial Kähler metrics.

For a potential ``phi(Z)`` the factor ``u = 1 / (Z phi'(Z))`` turns ``g`` into a
metric ``u^2 g`` that is again Kähler, for the complex structure pulled back
from the inverted chart, and whose potential there is

    phi_hat'(xi) = 1 / phi'(1 / xi),     xi = 1 / Z.

Equivalently ``d phi_hat / dZ = -1 / (Z^2 phi'(Z))``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from . import potentials as pots
from .chart_tensor import ChartMetricField, conformal, standard_j
from .errors import DomainError, NotALEError, QuadratureError
from .jets import Jet, Taylor
from .potentials import RadialPotential

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-12
NOISE_FLOOR = 1e-13


def conformal_factor(pot: RadialPotential, Z: float) -> float:
    d = pot.jet(Z)
    zp = Z * d[1]
    if zp <= 0:
        raise DomainError(f"metric degenerate, factor undefined (Z phi' = {zp:.3e})")
    return 1.0 / zp


@dataclass(frozen=True)
class ConformalFactor:
    """``u = 1/(Z phi')`` as a function of the radial variable and of chart points."""

    source: RadialPotential

    def __call__(self, Z: float) -> float:
        return conformal_factor(self.source, Z)

    def series(self, Z: float, order: int = 2) -> Taylor:
        zphi = Taylor.variable(Z, order) * self.source.derivative_series(Z, order)
        if zphi.c[0] <= 0:
            raise DomainError(f"metric degenerate, factor undefined (Z phi' = {zphi.c[0]:.3e})")
        return zphi.reciprocal()

    def jet(self, Z: float) -> np.ndarray:
        """``[u, u', u'']`` in the radial variable."""
        return self.series(Z, 2).derivatives()

    def on_chart(self, x: Sequence):
        """``u(Z(x))``; jet-evaluable in the chart coordinates ``x``."""
        Z = sum(c * c for c in x)
        if isinstance(Z, Jet):
            d = self.jet(float(Z.val))
            return Z.apply(*d)
        return self(float(Z))

    def squared_on_chart(self, x: Sequence):
        u = self.on_chart(x)
        return u * u


def compactified_metric(pot: RadialPotential, n: int = 2) -> ChartMetricField:
    """``u^2 g`` on the original chart.

    Its Kähler structure is the one pulled back through the inversion, which
    reverses orientation, so ``kahler_orientation`` is -1 in real dimension 4.
    """
    factor = ConformalFactor(pot)
    g = pots.metric_from_potential(pot, n)
    return conformal(g, factor.squared_on_chart, f"u^2 g[{pot.label}]", kahler_orientation=-1)


class _QuadCache:
    """Memoized quadrature values, shared across threads under a lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self._values: dict[tuple, float] = {}

    def get(self, key, compute):
        with self._lock:
            if key in self._values:
                return self._values[key]
        value = compute()
        with self._lock:
            self._values.setdefault(key, value)
        return value

    def clear(self):
        with self._lock:
            self._values.clear()


_CACHE = _QuadCache()


def _inverse_slope(pot: RadialPotential):
    """``t -> 1 / phi'(1/t)``, the xi-derivative of the compactified potential."""

    def f(t):
        d1 = pot.jet(1.0 / t)[1]
        if d1 <= 0:
            raise DomainError(f"metric degenerate, factor undefined (phi' = {d1:.3e})")
        return 1.0 / d1

    return f


def _quad(f, a: float, b: float) -> float:
    if a == b:
        return 0.0
    val, err, info = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200, full_output=1)[:3]
    if not math.isfinite(val) or err > 1e-9 * max(1.0, abs(val)):
        raise QuadratureError(f"integral did not converge (estimate {val!r}, error {err:.2e})")
    return float(val)


def compactified_potential(pot: RadialPotential, z0: float = 1.0) -> RadialPotential:
    """The potential of ``u^2 g`` on the inverted chart, as a function of ``xi``.

    The additive constant is fixed by ``phi_hat(1/z0) = 0``. Values come from
    adaptive quadrature; derivatives are exact Taylor jets of the integrand.
    Use :func:`potentials.in_inverse_variable` for the ``Z`` parametrization.
    """
    if pot.variable != "z":
        raise ValueError("compactify a potential given in the original radial variable")
    xi0 = 1.0 / z0
    if not pot.contains(z0):
        raise DomainError(f"potential not defined here (anchor Z={z0!r})")
    slope = _inverse_slope(pot)
    key_base = (id(pot), float(z0))

    def value(xi: float) -> float:
        return _CACHE.get(key_base + (float(xi),), lambda: _quad(slope, xi0, xi))

    def series(xi: float, order: int) -> Taylor:
        inner = 1.0 / Taylor.variable(xi, order)
        dphi = pot.derivative_series(1.0 / xi, max(order - 1, 0)).compose(inner.truncate(max(order - 1, 0)))
        dphi_hat = dphi.reciprocal()
        return dphi_hat.integrate(value(xi)).truncate(order)

    lo, hi = pot.domain
    domain = (0.0 if hi == math.inf else 1.0 / hi, math.inf if lo == 0.0 else 1.0 / lo)
    return RadialPotential(f"hat[{pot.label}]", series, domain, variable="xi")


def compactified_potential_z(pot: RadialPotential, z0: float = 1.0) -> RadialPotential:
    """The compactified potential as a function of ``Z``."""
    return pots.in_inverse_variable(compactified_potential(pot, z0))


def verify_ode_system(pot: RadialPotential, hat: RadialPotential, Z: float) -> tuple[float, float]:
    """Residuals of ``u^2 (phi' + Z phi'') = phi_hat' + Z phi_hat''`` and ``u^2 phi' = -phi_hat'``.

    ``hat`` may be parametrized by ``xi`` or by ``Z``; derivatives are taken in ``Z``.
    """
    hz = pots.in_inverse_variable(hat) if hat.variable == "xi" else hat
    d = pot.jet(Z)
    h = hz.jet(Z)
    u2 = conformal_factor(pot, Z) ** 2
    return float(u2 * (d[1] + Z * d[2]) - (h[1] + Z * h[2])), float(u2 * d[1] + h[1])


def pullback_form_residual(pot: RadialPotential, p, n: int = 2, z0: float = 1.0) -> float:
    """``|invert^* omega_hat - u^2 omega|`` at the chart point ``p``."""
    p = np.asarray(p, dtype=float)
    Z = float(p @ p)
    hat = compactified_potential(pot, z0)
    g_hat = pots.metric_from_potential(hat, n).value(pots.invert(p))
    g = pots.metric_from_potential(pot, n).value(p)
    j0 = standard_j(n)
    omega_hat = j0.T @ g_hat
    omega = j0.T @ g
    dmap = pots.invert_jacobian(p)
    pulled = dmap.T @ omega_hat @ dmap
    return float(np.max(np.abs(pulled - conformal_factor(pot, Z) ** 2 * omega)))


def verify_pullback_identity(pot: RadialPotential, Z: float, point=None, n: int = 2, z0: float = 1.0) -> float:
    """Pullback residual at the axis point ``(sqrt Z, 0, ..., 0)`` unless ``point`` is given."""
    p = pots.axis_point(Z, n) if point is None else np.asarray(point, dtype=float)
    return pullback_form_residual(pot, p, n, z0)


def _unit(direction, dim: int) -> np.ndarray:
    if direction is None:
        v = np.arange(1.0, dim + 1.0)
    else:
        v = np.asarray(direction, dtype=float)
    return v / np.linalg.norm(v)


def euclidean_defects(metric: ChartMetricField, r_samples, direction=None) -> np.ndarray:
    e = _unit(direction, metric.dim)
    eye = np.eye(metric.dim)
    return np.array([np.max(np.abs(metric.value(r * e) - eye)) for r in r_samples])


def ale_decay_rate(metric: ChartMetricField, r_samples, direction=None) -> float:
    """Decay exponent of ``|g - delta|`` along a ray; ``inf`` when the defect is at noise level."""
    r = np.sort(np.asarray(r_samples, dtype=float))
    if r.shape[0] < 2 or r[-1] / r[0] < 10.0 - 1e-12:
        raise ValueError("samples must span at least one decade of r")
    defect = euclidean_defects(metric, r, direction)
    if np.all(defect < NOISE_FLOOR):
        return math.inf
    if np.any(defect < NOISE_FLOOR) or np.any(np.diff(defect) >= 0):
        raise NotALEError("not ALE at sampled scales (defect not decreasing)")
    slope = np.polyfit(np.log(r), np.log(defect), 1)[0]
    return float(-slope)

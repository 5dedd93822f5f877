"""Radial Kähler potentials on C^n minus the origin and what they induce.

A potential is a function of the radial variable ``z = |z_1|^2 + ... + |z_n|^2``
(written ``Z`` in code to keep it apart from complex coordinates). Its
Kähler form is ``i d dbar phi(Z)``, i.e. the Hermitian matrix

    g_{i jbar} = phi'(Z) delta_ij + phi''(Z) zbar_i z_j .

Real/complex bookkeeping: with ``z_j = x_j + i y_j`` and real coordinate
order ``(x_1, y_1, ..., x_n, y_n)``, a Hermitian matrix ``H = A + iB`` is the
real metric with ``g(dx_i, dx_j) = g(dy_i, dy_j) = A_ij`` and
``g(dx_i, dy_j) = B_ij``. ``hermitian_to_real`` and ``real_to_hermitian``
implement that bijection.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import jets
from .chart_tensor import ChartMetricField, ComplexStructureField, pulled_back_structure, standard_j
from .errors import DomainError, ExpressionError
from .expr import compile_expression
from .jets import Jet, Taylor

SeriesFn = Callable[[float, int], Taylor]


class RadialPotential:
    """A radial potential evaluated as exact Taylor jets up to order 4.

    ``series(x0, order)`` returns the truncated Taylor series of the potential
    about ``x0``. ``variable`` records whether the argument is the radial
    variable of the original chart (``"z"``) or of the inverted chart
    (``"xi"``, with ``xi = 1/z``).
    """

    def __init__(
        self,
        label: str,
        series: SeriesFn,
        domain: tuple[float, float] = (0.0, math.inf),
        variable: str = "z",
        expression: str | None = None,
    ):
        self.label = label
        self._series = series
        self.domain = (float(domain[0]), float(domain[1]))
        self.variable = variable
        self.expression = expression

    def __repr__(self) -> str:
        return f"RadialPotential({self.label!r}, domain={self.domain}, variable={self.variable!r})"

    def contains(self, x: float) -> bool:
        lo, hi = self.domain
        return lo < x < hi

    def series(self, x0: float, order: int = 4) -> Taylor:
        if not self.contains(x0):
            raise DomainError(f"potential not defined here ({self.label} at {self.variable}={x0!r})")
        return self._series(float(x0), order)

    def jet(self, x0: float) -> np.ndarray:
        """``[phi, phi', phi'', phi''', phi'''']`` at ``x0``."""
        return self.series(x0, 4).derivatives()

    def derivative_series(self, x0: float, order: int = 3) -> Taylor:
        """Series of ``phi'`` about ``x0``."""
        return self.series(x0, order + 1).differentiate()

    def __call__(self, x0: float) -> float:
        return float(self.series(x0, 0).c[0])

    def is_positive_at(self, x0: float) -> bool:
        """The induced metric is positive definite iff ``phi' > 0`` and ``(x phi')' > 0``."""
        d = self.jet(x0)
        return bool(d[1] > 0 and d[1] + x0 * d[2] > 0)


def from_expression(label: str, text: str, domain=(0.0, math.inf)) -> RadialPotential:
    f = compile_expression(text)

    def series(x0, order):
        return f(Taylor.variable(x0, order))

    return RadialPotential(label, series, domain, expression=text)


def in_inverse_variable(pot: RadialPotential) -> RadialPotential:
    """The same function re-expressed in the reciprocal radial variable ``1/x``."""

    def series(x0, order):
        inner = 1.0 / Taylor.variable(x0, order)
        return pot.series(1.0 / x0, order).compose(inner)

    lo, hi = pot.domain
    domain = (0.0 if hi == math.inf else 1.0 / hi, math.inf if lo == 0.0 else 1.0 / lo)
    other = "xi" if pot.variable == "z" else "z"
    return RadialPotential(f"{pot.label}[{other}]", series, domain, variable=other)


# --- corpus -----------------------------------------------------------------

_CORPUS_LINE = re.compile(
    r"^\s*(?P<name>[A-Za-z_][\w\-]*)\s*,\s*(?P<expr>[^,]+?)\s*,\s*\(\s*(?P<lo>[^,()]+?)\s*,\s*(?P<hi>[^,()]+?)\s*\)\s*$"
)


def _bound(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise ExpressionError(f"bad domain bound {text!r}") from None


def parse_corpus(text: str) -> dict[str, RadialPotential]:
    """Parse ``name, expression, (lo, hi)`` lines; ``#`` starts a comment line."""
    out: dict[str, RadialPotential] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _CORPUS_LINE.match(line)
        if not m:
            raise ExpressionError(f"line {lineno}: expected 'name, expression, (lo, hi)'")
        lo, hi = _bound(m["lo"]), _bound(m["hi"])
        if not lo < hi:
            raise ExpressionError(f"line {lineno}: empty domain")
        if m["name"] in out:
            raise ExpressionError(f"line {lineno}: duplicate name {m['name']!r}")
        try:
            out[m["name"]] = from_expression(m["name"], m["expr"], (lo, hi))
        except ExpressionError as exc:
            raise ExpressionError(f"line {lineno}: {exc}") from None
    return out


def load_corpus(path: str | Path | None = None) -> dict[str, RadialPotential]:
    """Load a corpus file; with no path, the corpus shipped with the package."""
    if path is None:
        text = resources.files("kahler_compact.data").joinpath("potentials.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_corpus(text)


FLAT = from_expression("flat", "z")
BURNS = from_expression("burns", "z + log(z)")
FUBINI_STUDY = from_expression("fubini_study", "log(1 + z)")
EGUCHI_HANSON = from_expression("eguchi_hanson", "sqrt(1 + z^2) + log(z) - log(1 + sqrt(1 + z^2))")


# --- induced metric ---------------------------------------------------------


def _radial_pair(pot: RadialPotential, Z):
    """``phi'(Z)`` and ``phi''(Z)`` as jets (or floats) of the chart coordinates."""
    zval = float(Z.val) if isinstance(Z, Jet) else float(Z)
    d = pot.jet(zval)
    if isinstance(Z, Jet):
        return Z.apply(d[1], d[2], d[3]), Z.apply(d[2], d[3], d[4])
    return d[1], d[2]


def potential_metric_formula(pot: RadialPotential, n: int):
    def formula(x):
        xs, ys = x[0::2], x[1::2]
        Z = sum(c * c for c in x)
        p1, p2 = _radial_pair(pot, Z)
        rows = [[0.0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            for j in range(i, n):
                a = p2 * (xs[i] * xs[j] + ys[i] * ys[j])
                if i == j:
                    a = a + p1
                b_ij = p2 * (xs[i] * ys[j] - ys[i] * xs[j])
                rows[2 * i][2 * j] = rows[2 * j][2 * i] = a
                rows[2 * i + 1][2 * j + 1] = rows[2 * j + 1][2 * i + 1] = a
                rows[2 * i][2 * j + 1] = rows[2 * j + 1][2 * i] = b_ij
                rows[2 * i + 1][2 * j] = rows[2 * j][2 * i + 1] = -b_ij if i != j else 0.0
        return jets.matrix(rows, dim=len(x))

    return formula


def metric_from_potential(pot: RadialPotential, n: int = 2) -> ChartMetricField:
    """Real 2n x 2n metric of ``i d dbar phi`` on the complex chart."""
    if n < 2:
        raise ValueError("complex dimension must be at least 2")
    return ChartMetricField(2 * n, potential_metric_formula(pot, n), f"g[{pot.label}]")


def kahler_form_axis(pot: RadialPotential, Z: float) -> tuple[float, float]:
    """Coefficients of ``dz1 ^ dzbar1`` and of ``dz_i ^ dzbar_i`` (i >= 2) on the z1-axis."""
    d = pot.jet(Z)
    return float(d[1] + Z * d[2]), float(d[1])


def quotient_profile(pot: RadialPotential, Z: float) -> tuple[float, float]:
    """Hopf-fibre coefficient ``(Z phi')'`` and CP^{n-1} coefficient ``Z phi'``."""
    d = pot.jet(Z)
    return float(d[1] + Z * d[2]), float(Z * d[1])


def hermitian_to_real(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    a, b = h.real, h.imag
    g = np.zeros((2 * n, 2 * n))
    g[0::2, 0::2] = a
    g[1::2, 1::2] = a
    g[0::2, 1::2] = b
    g[1::2, 0::2] = b.T
    return g


def real_to_hermitian(g: np.ndarray) -> np.ndarray:
    return g[0::2, 0::2] + 1j * g[0::2, 1::2]


def unitary_to_real(u: np.ndarray) -> np.ndarray:
    """Real 2n x 2n matrix of a complex-linear map in the (x1, y1, ...) ordering."""
    n = u.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[0::2, 0::2] = u.real
    out[0::2, 1::2] = -u.imag
    out[1::2, 0::2] = u.imag
    out[1::2, 1::2] = u.real
    return out


# --- inversion maps -----------------------------------------------------------


def _radius_sq(x):
    return sum(c * c for c in x)


def invert_formula(x: Sequence):
    """(z1, ..., zn) -> (conj(z1), z2, ..., zn) / Z, jet-evaluable."""
    Z = _radius_sq(x)
    out = [c / Z for c in x]
    out[1] = -out[1]
    return out


def inversion_formula(x: Sequence):
    """The U(n)-equivariant inversion z -> z / Z."""
    Z = _radius_sq(x)
    return [c / Z for c in x]


def _nonzero(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        raise DomainError("inversion undefined at origin")
    return p


def invert(p) -> np.ndarray:
    """The involution ``(z1, z2, ..., zn) -> (conj(z1)/Z, z2/Z, ..., zn/Z)``."""
    return np.array(invert_formula(list(_nonzero(p))))


def invert_jacobian(p) -> np.ndarray:
    comps = invert_formula(Jet.variables(_nonzero(p)))
    return np.array([c.grad for c in comps])


def pullback_structure(n: int = 2) -> ComplexStructureField:
    """Standard structure of the inverted chart, pulled back through ``invert``."""
    base = pulled_back_structure(invert_formula, 2 * n, "J_xi (via invert)")

    def formula(p):
        return base.formula(_nonzero(p))

    return ComplexStructureField(2 * n, formula, base.label)


def pullback_J(p) -> np.ndarray:
    p = _nonzero(p)
    return pullback_structure(len(p) // 2).at(p)


def inversion_structure(n: int = 2) -> ComplexStructureField:
    """Standard structure pulled back through ``z -> z/Z``.

    This agrees with ``-J_z`` on the complex line through the point and with
    ``J_z`` on its orthogonal complement; it is the structure for which the
    compactified metric is Kähler away from the axes as well.
    """
    base = pulled_back_structure(inversion_formula, 2 * n, "J_xi (equivariant)")

    def formula(p):
        return base.formula(_nonzero(p))

    return ComplexStructureField(2 * n, formula, base.label)


def inversion_J(p) -> np.ndarray:
    p = _nonzero(p)
    return inversion_structure(len(p) // 2).at(p)


def commutation_defect(p) -> float:
    """``|J_std . D(invert) - D(invert) . J_z|`` at ``p``; zero exactly on the z1-axis."""
    p = _nonzero(p)
    d = invert_jacobian(p)
    j0 = standard_j(len(p) // 2)
    return float(np.max(np.abs(j0 @ d - d @ j0)))


def axis_point(Z: float, n: int = 2) -> np.ndarray:
    p = np.zeros(2 * n)
    p[0] = math.sqrt(Z)
    return p

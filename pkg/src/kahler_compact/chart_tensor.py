"""Tensor calculus on a single coordinate chart.

A metric field is a formula from chart coordinates to a symmetric matrix. The
formula is evaluated on :class:`~kahler_compact.jets.Jet` coordinates, so one
call returns the metric together with its first and second coordinate
derivatives; curvature is assembled from that 2-jet.

Conventions
-----------
* ``dg[i, j, k] = d_k g_ij`` and ``d2g[i, j, k, l] = d_k d_l g_ij``.
* ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`` and
  ``riemann[l, i, j, k]`` is the component of ``R(d_i, d_j) d_k`` along ``d_l``.
  Ricci is ``R^i_{ijk}``, so round spheres have positive scalar curvature.
* In real dimension 4 the coordinate order is the positive orientation; for
  complex charts ``(x1, y1, x2, y2)`` this is the orientation of the standard
  complex structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import jets
from .errors import (
    DegenerateMetricError,
    DimensionError,
    JetConsistencyError,
    NotAlmostComplexError,
)
from .jets import Jet

MetricFormula = Callable[[Sequence], object]

DEFAULT_STEP = 1e-4
JET_RTOL = 1e-5


def as_chart_point(coords) -> np.ndarray:
    """Validate real chart coordinates: even length >= 4, all finite."""
    p = np.asarray(coords, dtype=float).reshape(-1)
    if p.shape[0] < 4 or p.shape[0] % 2:
        raise ValueError(f"chart point must have even length >= 4, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("chart point has non-finite entries")
    return p


@dataclass(frozen=True)
class ChartMetricField:
    """Metric on one chart, given by a jet-evaluable formula.

    ``kahler_orientation`` is +1 when the coordinate order is the orientation
    in which the Kähler form of the relevant complex structure is self-dual.
    """

    dim: int
    formula: MetricFormula
    label: str = ""
    kahler_orientation: int = 1

    def jet(self, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        out = self.formula(Jet.variables(p))
        g, dg, d2g = jets.unpack(out, self.dim)
        return g, dg, d2g

    def value(self, p) -> np.ndarray:
        out = self.formula(list(np.asarray(p, dtype=float)))
        if isinstance(out, Jet):
            return out.val
        return np.asarray(out, dtype=float)

    def with_label(self, label: str) -> "ChartMetricField":
        return ChartMetricField(self.dim, self.formula, label, self.kahler_orientation)


def euclidean(dim: int = 4) -> ChartMetricField:
    eye = np.eye(dim)

    def formula(x):
        return eye.copy()

    return ChartMetricField(dim, formula, f"euclidean R^{dim}")


def scaled(metric: ChartMetricField, c2: float) -> ChartMetricField:
    """Constant rescaling ``c2 * g``."""

    def formula(x):
        return metric.formula(x) * c2

    return ChartMetricField(metric.dim, formula, f"{c2:g}*{metric.label}", metric.kahler_orientation)


def conformal(
    metric: ChartMetricField,
    factor: Callable[[Sequence], object],
    label: str | None = None,
    kahler_orientation: int | None = None,
) -> ChartMetricField:
    """Pointwise rescaling ``factor(x) * g``; ``factor`` must be jet-evaluable."""

    def formula(x):
        g = metric.formula(x)
        f = factor(x)
        if isinstance(g, Jet) or isinstance(f, Jet):
            if not isinstance(g, Jet):
                g = Jet.constant(g, f.dim)
            if isinstance(f, Jet):
                f = Jet(f.val[..., None, None], f.grad[None, None], f.hess[None, None])
            return g * f
        return g * f

    orient = metric.kahler_orientation if kahler_orientation is None else kahler_orientation
    return ChartMetricField(metric.dim, formula, label or f"conformal({metric.label})", orient)


def difference_gradient(metric: ChartMetricField, p, h: float = DEFAULT_STEP, order: int = 2) -> np.ndarray:
    """Central-difference coordinate gradient of the metric, ``out[i, j, k] ~ d_k g_ij``."""
    p = np.asarray(p, dtype=float)
    n = metric.dim
    out = np.zeros((n, n, p.shape[0]))
    for k in range(p.shape[0]):
        e = np.zeros_like(p)
        e[k] = h
        if order == 2:
            out[:, :, k] = (metric.value(p + e) - metric.value(p - e)) / (2 * h)
        elif order == 4:
            out[:, :, k] = (
                -metric.value(p + 2 * e) + 8 * metric.value(p + e) - 8 * metric.value(p - e) + metric.value(p - 2 * e)
            ) / (12 * h)
        else:
            raise ValueError("order must be 2 or 4")
    return out


def jet_mismatch(metric: ChartMetricField, p, h: float = DEFAULT_STEP, order: int = 2) -> float:
    """Relative disagreement between jet and finite-difference first derivatives."""
    g, dg, _ = metric.jet(p)
    fd = difference_gradient(metric, p, h, order)
    scale = np.max(np.abs(dg)) + np.max(np.abs(g))
    return float(np.max(np.abs(fd - dg)) / scale)


def _check_positive(g: np.ndarray, p) -> None:
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DegenerateMetricError(np.linalg.eigvalsh(0.5 * (g + g.T)).min(), where=p) from None


@dataclass
class CurvatureReport:
    point: np.ndarray
    metric: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl_plus: np.ndarray | None = None
    weyl_minus: np.ndarray | None = None
    weyl: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def riemann_lowered(self) -> np.ndarray:
        """``Rm[i, j, k, l] = g(R(d_i, d_j) d_k, d_l)``."""
        return np.einsum("lm,mijk->ijkl", self.metric, self.riemann)


def christoffel_from_jet(g: np.ndarray, dg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ginv = np.linalg.inv(g)
    low = 0.5 * (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    )
    return ginv, np.einsum("kl,lij->kij", ginv, low)


def _curvature_tensors(g, dg, d2g):
    ginv, gamma = christoffel_from_jet(g, dg)
    low = 0.5 * (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    )
    dlow = 0.5 * (
        np.einsum("jlim->lijm", d2g) + np.einsum("iljm->lijm", d2g) - np.einsum("ijlm->lijm", d2g)
    )
    dginv = -np.einsum("ka,abm,bl->klm", ginv, dg, ginv)
    # dgamma[k, i, j, m] = d_m Gamma^k_ij
    dgamma = np.einsum("klm,lij->kijm", dginv, low) + np.einsum("kl,lijm->kijm", ginv, dlow)
    riemann = (
        np.einsum("ljki->lijk", dgamma)
        - np.einsum("likj->lijk", dgamma)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    ricci = np.einsum("iijk->jk", riemann)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum("ij,ij->", ginv, ricci))
    return gamma, riemann, ricci, scalar


def weyl_tensor(g: np.ndarray, riemann: np.ndarray, ricci: np.ndarray, scalar: float) -> np.ndarray:
    """Fully covariant Weyl tensor in the same slot convention as ``riemann_lowered``."""
    n = g.shape[0]
    rm = np.einsum("lm,mijk->ijkl", g, riemann)
    schouten = (ricci - scalar / (2 * (n - 1)) * g) / (n - 2)
    kn = (
        np.einsum("bc,ad->abcd", schouten, g)
        + np.einsum("ad,bc->abcd", schouten, g)
        - np.einsum("ac,bd->abcd", schouten, g)
        - np.einsum("bd,ac->abcd", schouten, g)
    )
    return rm - kn


def orthonormal_frame(g: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Gram-Schmidt on the coordinate vectors; columns are the frame vectors."""
    n = g.shape[0]
    frame = np.zeros((n, n))
    for a in range(n):
        v = np.zeros(n)
        v[a] = 1.0
        for b in range(a):
            v = v - (frame[:, b] @ g @ v) * frame[:, b]
        frame[:, a] = v / math.sqrt(v @ g @ v)
    if orientation < 0:
        frame[:, -1] *= -1.0
    return frame


def _two_form(pairs) -> np.ndarray:
    m = np.zeros((4, 4))
    for (a, b), s in pairs:
        m[a, b] += s
        m[b, a] -= s
    return m / math.sqrt(2.0)


# Frame-index bases of self-dual and anti-self-dual 2-forms. The orderings are
# chosen so that flipping the last frame vector maps one basis onto the other
# exactly, hence W+ and W- swap as matrices, not merely up to signs.
SELF_DUAL_BASIS = np.array(
    [
        _two_form([((0, 1), 1), ((2, 3), 1)]),
        _two_form([((0, 2), 1), ((1, 3), -1)]),
        _two_form([((0, 3), 1), ((1, 2), 1)]),
    ]
)
ANTI_SELF_DUAL_BASIS = np.array(
    [
        _two_form([((0, 1), 1), ((2, 3), -1)]),
        _two_form([((0, 2), 1), ((1, 3), 1)]),
        _two_form([((1, 2), 1), ((0, 3), -1)]),
    ]
)


def _weyl_blocks(weyl: np.ndarray, g: np.ndarray, orientation: int):
    frame = orthonormal_frame(g, orientation)
    w = np.einsum("ijkl,ia,jb,kc,ld->abcd", weyl, frame, frame, frame, frame)
    plus = 0.25 * np.einsum("abcd,Iab,Jcd->IJ", w, SELF_DUAL_BASIS, SELF_DUAL_BASIS)
    minus = 0.25 * np.einsum("abcd,Iab,Jcd->IJ", w, ANTI_SELF_DUAL_BASIS, ANTI_SELF_DUAL_BASIS)
    return plus, minus


def curvature_at(
    metric: ChartMetricField, p, h: float = DEFAULT_STEP, check_jets: bool = True
) -> CurvatureReport:
    """Christoffel symbols, Riemann, Ricci, scalar and (in 4d) W+/W- at ``p``.

    ``h`` is the step of the central-difference cross-check of the jet; set
    ``check_jets=False`` to skip it inside tight loops.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    p = np.asarray(p, dtype=float)
    g, dg, d2g = metric.jet(p)
    _check_positive(g, p)
    if check_jets:
        mismatch = jet_mismatch(metric, p, h)
        if mismatch > JET_RTOL:
            raise JetConsistencyError(mismatch)
    gamma, riemann, ricci, scalar = _curvature_tensors(g, dg, d2g)
    report = CurvatureReport(p, g, gamma, riemann, ricci, scalar)
    if metric.dim == 4:
        report.weyl = weyl_tensor(g, riemann, ricci, scalar)
        report.weyl_plus, report.weyl_minus = _weyl_blocks(report.weyl, g, 1)
    return report


def weyl_split(report: CurvatureReport, orientation: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Self-dual and anti-self-dual Weyl blocks for the chosen orientation.

    ``orientation=+1`` uses the coordinate order; ``-1`` reverses it by
    flipping the last frame vector, which swaps the two blocks.
    """
    if report.dim != 4 or report.weyl is None:
        raise DimensionError("self-duality undefined outside real dimension 4")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    return _weyl_blocks(report.weyl, report.metric, orientation)


def bianchi_defect(report: CurvatureReport) -> float:
    r = report.riemann
    cyc = r + np.einsum("ljki->lijk", r) + np.einsum("lkij->lijk", r)
    return float(np.max(np.abs(cyc)))


# --- complex structures -----------------------------------------------------

StructureFormula = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ComplexStructureField:
    """Endomorphism field ``J`` with its first derivatives.

    ``formula(p)`` returns ``(J, dJ)`` with ``J[i, j] = J^i_j`` acting on
    column vectors and ``dJ[i, j, k] = d_k J^i_j``.
    """

    dim: int
    formula: StructureFormula
    label: str = ""

    def at(self, p) -> np.ndarray:
        return self.formula(np.asarray(p, dtype=float))[0]

    def jet(self, p) -> tuple[np.ndarray, np.ndarray]:
        return self.formula(np.asarray(p, dtype=float))


def standard_j(n: int) -> np.ndarray:
    """Multiplication by i on C^n in the real ordering (x1, y1, ..., xn, yn)."""
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    return np.kron(np.eye(n), block)


def standard_structure(n: int) -> ComplexStructureField:
    j0 = standard_j(n)
    zero = np.zeros((2 * n, 2 * n, 2 * n))

    def formula(p):
        return j0.copy(), zero.copy()

    return ComplexStructureField(2 * n, formula, "J_z")


def pulled_back_structure(
    chart_map: Callable[[Sequence], Sequence], dim: int, label: str, target: np.ndarray | None = None
) -> ComplexStructureField:
    """``DF^{-1} J0 DF`` for a map ``F`` into a chart carrying the constant structure ``J0``.

    ``chart_map`` must be jet-evaluable; its Hessian supplies ``dJ``.
    """
    j0 = standard_j(dim // 2) if target is None else target

    def formula(p):
        comps = chart_map(Jet.variables(p))
        d = np.array([c.grad for c in comps])  # d[a, i] = d_i F^a
        dd = np.array([c.hess for c in comps])  # dd[a, i, k] = d_k d_i F^a
        dinv = np.linalg.inv(d)
        j = dinv @ j0 @ d
        # d_k J = D^{-1} (J0 d_k D - d_k D J)
        dj = np.einsum("ia,abk->ibk", dinv, np.einsum("ac,cbk->abk", j0, dd) - np.einsum("ack,cb->abk", dd, j))
        return j, dj

    return ComplexStructureField(dim, formula, label)


class KahlerDefect(NamedTuple):
    hermitian: float
    closedness: float
    parallel: float


def kahler_defect(metric: ChartMetricField, structure: ComplexStructureField, p) -> KahlerDefect:
    """How far ``(g, J)`` is from Kähler at ``p``.

    Returns ``|g(J., J.) - g|``, ``|d omega|`` with ``omega(x, y) = g(Jx, y)``
    and ``|nabla J|`` (Frobenius norms of the component arrays).
    """
    p = np.asarray(p, dtype=float)
    j, dj = structure.jet(p)
    sq = np.max(np.abs(j @ j + np.eye(j.shape[0])))
    if sq > 1e-10:
        raise NotAlmostComplexError(sq)
    g, dg, _ = metric.jet(p)
    herm = np.linalg.norm(j.T @ g @ j - g)
    # domega[b, c, a] = d_a omega_bc with omega = J^T g
    domega = np.einsum("cak,cb->abk", dj, g) + np.einsum("ca,cbk->abk", j, dg)
    d_omega = (
        np.einsum("bca->abc", domega) + np.einsum("cab->abc", domega) + np.einsum("abc->abc", domega)
    )
    _, gamma = christoffel_from_jet(g, dg)
    nabla = (
        np.einsum("ijk->kij", dj)
        + np.einsum("ikm,mj->kij", gamma, j)
        - np.einsum("mkj,im->kij", gamma, j)
    )
    return KahlerDefect(float(herm), float(np.linalg.norm(d_omega)), float(np.linalg.norm(nabla)))


def laplacian(metric: ChartMetricField, f: Callable[[Sequence], Jet], p) -> float:
    """Laplace-Beltrami operator (divergence of gradient) of a jet-evaluable scalar."""
    p = np.asarray(p, dtype=float)
    g, dg, _ = metric.jet(p)
    ginv, gamma = christoffel_from_jet(g, dg)
    fj = f(Jet.variables(p))
    return float(np.einsum("ij,ij->", ginv, fj.hess - np.einsum("kij,k->ij", gamma, fj.grad)))

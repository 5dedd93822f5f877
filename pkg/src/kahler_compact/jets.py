"""Forward-mode jet arithmetic.

Two small number types live here:

``Jet``
    A multivariate jet truncated at order 2. It carries a value together with
    its gradient and Hessian with respect to the chart coordinates, and is
    what every metric field is evaluated on. Values may be arrays; gradients
    and Hessians then carry the extra trailing axes ``(d,)`` and ``(d, d)``.

``Taylor``
    A univariate truncated power series ``c0 + c1 e + ... + cN e^N``. Radial
    potentials are evaluated on it so their derivatives up to order 4 come
    out exactly.

The module-level functions (``sqrt``, ``log``, ...) dispatch on the argument
type, so the same formula can be evaluated on floats, ``Jet`` or ``Taylor``.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np


class Jet:
    """Value, gradient and Hessian of a (possibly array valued) function."""

    __slots__ = ("val", "grad", "hess")
    __array_ufunc__ = None

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    @classmethod
    def variables(cls, point: Sequence[float]) -> list["Jet"]:
        """Seed one jet per coordinate of ``point``."""
        p = np.asarray(point, dtype=float)
        d = p.shape[0]
        eye = np.eye(d)
        zero = np.zeros((d, d))
        return [cls(p[i], eye[i], zero) for i in range(d)]

    @classmethod
    def constant(cls, value, dim: int) -> "Jet":
        v = np.asarray(value, dtype=float)
        return cls(v, np.zeros(v.shape + (dim,)), np.zeros(v.shape + (dim, dim)))

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.dim)

    def apply(self, f0, f1, f2) -> "Jet":
        """Compose with a scalar function given its value and two derivatives at ``val``."""
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        g = self.grad
        grad = f1[..., None] * g
        hess = f1[..., None, None] * self.hess + f2[..., None, None] * (g[..., :, None] * g[..., None, :])
        return Jet(f0, grad, hess)

    def __add__(self, other):
        o = self._lift(other)
        return Jet(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        val = a.val * b.val
        grad = a.val[..., None] * b.grad + b.val[..., None] * a.grad
        cross = a.grad[..., :, None] * b.grad[..., None, :]
        hess = (
            a.val[..., None, None] * b.hess
            + b.val[..., None, None] * a.hess
            + cross
            + np.swapaxes(cross, -1, -2)
        )
        return Jet(val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.val
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        p = float(p)
        v = self.val
        if p == int(p) and p >= 0:
            k = int(p)
            f1 = k * v ** (k - 1) if k >= 1 else np.zeros_like(v)
            f2 = k * (k - 1) * v ** (k - 2) if k >= 2 else np.zeros_like(v)
            return self.apply(v**k, f1, f2)
        return self.apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def __repr__(self) -> str:
        return f"Jet(val={self.val!r})"


class Taylor:
    """Truncated univariate power series in a small increment ``e``.

    ``coeffs[k]`` is the coefficient of ``e**k``; the k-th derivative of the
    represented function at the expansion point is ``k! * coeffs[k]``.
    """

    __slots__ = ("c",)
    __array_ufunc__ = None

    def __init__(self, coeffs: Iterable[float]):
        self.c = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=float)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, x0: float, order: int) -> "Taylor":
        c = np.zeros(order + 1)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def from_derivatives(cls, derivs: Sequence[float]) -> "Taylor":
        return cls([d / math.factorial(k) for k, d in enumerate(derivs)])

    def derivatives(self) -> np.ndarray:
        return np.array([math.factorial(k) * ck for k, ck in enumerate(self.c)])

    def _lift(self, other) -> "Taylor":
        if isinstance(other, Taylor):
            return other
        c = np.zeros_like(self.c)
        c[0] = float(other)
        return Taylor(c)

    def __add__(self, other):
        return Taylor(self.c + self._lift(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Taylor(-self.c)

    def __sub__(self, other):
        return Taylor(self.c - self._lift(other).c)

    def __rsub__(self, other):
        return Taylor(self._lift(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c * float(other))
        n = self.order + 1
        return Taylor(np.convolve(self.c, other.c)[:n])

    __rmul__ = __mul__

    def reciprocal(self) -> "Taylor":
        a = self.c
        if a[0] == 0.0:
            raise ZeroDivisionError("series has zero constant term")
        b = np.zeros_like(a)
        b[0] = 1.0 / a[0]
        for k in range(1, len(a)):
            b[k] = -np.dot(a[1 : k + 1], b[k - 1 :: -1][:k]) / a[0]
        return Taylor(b)

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c / float(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, p):
        if isinstance(p, Taylor):
            return exp(p * log(self))
        p = float(p)
        if p == int(p) and 0 <= p <= 8:
            out = self._lift(1.0)
            for _ in range(int(p)):
                out = out * self
            return out
        a = self.c
        if a[0] <= 0.0:
            raise ValueError("real power of a series with non-positive constant term")
        b = np.zeros_like(a)
        b[0] = a[0] ** p
        for k in range(1, len(a)):
            j = np.arange(1, k + 1)
            b[k] = np.sum(((p + 1.0) * j - k) * a[j] * b[k - j]) / (k * a[0])
        return Taylor(b)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def integrate(self, constant: float) -> "Taylor":
        """Antiderivative in ``e`` with the given constant term (one order higher)."""
        c = np.zeros(len(self.c) + 1)
        c[0] = constant
        c[1:] = self.c / np.arange(1, len(self.c) + 1)
        return Taylor(c)

    def differentiate(self) -> "Taylor":
        return Taylor(self.c[1:] * np.arange(1, len(self.c)))

    def truncate(self, order: int) -> "Taylor":
        return Taylor(self.c[: order + 1])

    def compose(self, inner: "Taylor") -> "Taylor":
        """Evaluate this series (about ``x0``) at ``x0 + (inner - inner[0])``."""
        delta = inner - inner.c[0]
        out = Taylor(np.zeros_like(inner.c))
        power = inner._lift(1.0)
        for ck in self.c[: inner.order + 1]:
            out = out + power * ck
            power = power * delta
        return out

    def __repr__(self) -> str:
        return f"Taylor({self.c.tolist()!r})"


def _taylor_exp(a: Taylor) -> Taylor:
    c = a.c
    b = np.zeros_like(c)
    b[0] = math.exp(c[0])
    for k in range(1, len(c)):
        j = np.arange(1, k + 1)
        b[k] = np.sum(j * c[j] * b[k - j]) / k
    return Taylor(b)


def _taylor_log(a: Taylor) -> Taylor:
    c = a.c
    if c[0] <= 0.0:
        raise ValueError("log of a series with non-positive constant term")
    b = np.zeros_like(c)
    b[0] = math.log(c[0])
    for k in range(1, len(c)):
        j = np.arange(1, k)
        b[k] = (c[k] - np.sum(j * b[j] * c[k - j]) / k) / c[0]
    return Taylor(b)


def _taylor_sincos(a: Taylor) -> tuple[Taylor, Taylor]:
    c = a.c
    s = np.zeros_like(c)
    co = np.zeros_like(c)
    s[0], co[0] = math.sin(c[0]), math.cos(c[0])
    for k in range(1, len(c)):
        j = np.arange(1, k + 1)
        s[k] = np.sum(j * c[j] * co[k - j]) / k
        co[k] = -np.sum(j * c[j] * s[k - j]) / k
    return Taylor(s), Taylor(co)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.val)
        return x.apply(e, e, e)
    if isinstance(x, Taylor):
        return _taylor_exp(x)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        v = x.val
        return x.apply(np.log(v), 1.0 / v, -1.0 / v**2)
    if isinstance(x, Taylor):
        return _taylor_log(x)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        s = np.sqrt(x.val)
        return x.apply(s, 0.5 / s, -0.25 / (s * x.val))
    if isinstance(x, Taylor):
        return x**0.5
    return np.sqrt(x)


def sin(x):
    if isinstance(x, Jet):
        return x.apply(np.sin(x.val), np.cos(x.val), -np.sin(x.val))
    if isinstance(x, Taylor):
        return _taylor_sincos(x)[0]
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return x.apply(np.cos(x.val), -np.sin(x.val), -np.cos(x.val))
    if isinstance(x, Taylor):
        return _taylor_sincos(x)[1]
    return np.cos(x)


def matrix(rows: Sequence[Sequence], dim: int | None = None):
    """Assemble a square matrix from scalar entries.

    Entries may be floats or ``Jet``. The result is a ``Jet`` with matrix
    value when any entry is a jet, otherwise a plain ndarray.
    """
    flat = [e for row in rows for e in row]
    jets = [e for e in flat if isinstance(e, Jet)]
    m, n = len(rows), len(rows[0])
    if not jets:
        return np.array([[float(e) for e in row] for row in rows])
    d = jets[0].dim if dim is None else dim
    val = np.zeros((m, n))
    grad = np.zeros((m, n, d))
    hess = np.zeros((m, n, d, d))
    for i, row in enumerate(rows):
        for j, e in enumerate(row):
            if isinstance(e, Jet):
                val[i, j], grad[i, j], hess[i, j] = e.val, e.grad, e.hess
            else:
                val[i, j] = float(e)
    return Jet(val, grad, hess)


def unpack(x, dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(value, gradient, hessian)`` arrays for a jet or a constant."""
    if isinstance(x, Jet):
        return x.val, x.grad, x.hess
    v = np.asarray(x, dtype=float)
    return v, np.zeros(v.shape + (dim,)), np.zeros(v.shape + (dim, dim))

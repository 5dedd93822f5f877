from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from kahler_compact import jets
from kahler_compact.jets import Jet, Taylor

z = sp.Symbol("z", positive=True)

SERIES_CASES = [
    (lambda t: t + jets.log(t), z + sp.log(z)),
    (lambda t: jets.log(1 + t), sp.log(1 + z)),
    (lambda t: jets.sqrt(1 + t * t) + jets.log(t) - jets.log(1 + jets.sqrt(1 + t * t)),
     sp.sqrt(1 + z**2) + sp.log(z) - sp.log(1 + sp.sqrt(1 + z**2))),
    (lambda t: jets.exp(-t) * t**3 / (2 + t), sp.exp(-z) * z**3 / (2 + z)),
    (lambda t: t**1.5 + t**-2, z**sp.Rational(3, 2) + z**-2),
    (lambda t: jets.sin(t) * jets.cos(2 * t), sp.sin(z) * sp.cos(2 * z)),
    (lambda t: 2.0**t, 2**z),
]


@pytest.mark.parametrize("f, expr", SERIES_CASES)
@pytest.mark.parametrize("x0", [0.3, 1.0, 4.7])
def test_taylor_derivatives_match_symbolic(f, expr, x0):
    got = f(Taylor.variable(x0, 4)).derivatives()
    want = [float(sp.diff(expr, z, k).subs(z, x0)) for k in range(5)]
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_jet_hessian_matches_symbolic():
    xs = sp.symbols("x0:3")
    expr = sp.exp(xs[0] * xs[1]) / (1 + xs[2] ** 2) + sp.sqrt(xs[0] ** 2 + xs[1] ** 2 + 1)
    p = np.array([0.4, -0.7, 1.3])
    a, b, c = Jet.variables(p)
    out = jets.exp(a * b) / (1 + c**2) + jets.sqrt(a * a + b * b + 1)
    subs = dict(zip(xs, p))
    grad = [float(sp.diff(expr, x).subs(subs)) for x in xs]
    hess = [[float(sp.diff(expr, x, y).subs(subs)) for y in xs] for x in xs]
    assert float(out.val) == pytest.approx(float(expr.subs(subs)), rel=1e-14)
    np.testing.assert_allclose(out.grad, grad, rtol=1e-13)
    np.testing.assert_allclose(out.hess, hess, rtol=1e-13)


def test_numpy_scalars_defer_to_jets():
    (x,) = Jet.variables([2.0])
    out = np.float64(3.0) * x
    assert isinstance(out, Jet)
    assert isinstance(np.float64(1.0) + Taylor.variable(1.0, 2), Taylor)


def test_matrix_assembly():
    x, y = Jet.variables([1.0, 2.0])
    m = jets.matrix([[x * y, 0.0], [0.0, x]])
    assert m.val.tolist() == [[2.0, 0.0], [0.0, 1.0]]
    assert m.grad[0, 0].tolist() == [2.0, 1.0]
    assert m.hess[0, 0].tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert isinstance(jets.matrix([[1.0]]), np.ndarray)


def test_compose_and_integrate():
    # log(1/t) about t = 2, built by composing log about 1/2 with 1/t
    inner = 1.0 / Taylor.variable(2.0, 4)
    outer = jets.log(Taylor.variable(0.5, 4))
    got = outer.compose(inner).derivatives()
    want = [-math.log(2.0), -0.5, 0.25, -0.25, 0.375]
    np.testing.assert_allclose(got, want, rtol=1e-13)
    integ = Taylor([1.0, 2.0, 3.0]).integrate(5.0)
    assert integ.c.tolist() == [5.0, 1.0, 1.0, 1.0]
    assert integ.differentiate().c.tolist() == [1.0, 2.0, 3.0]


def test_log_of_nonpositive_series_rejected():
    with pytest.raises(ValueError):
        jets.log(Taylor.variable(-1.0, 2))


finite = st.floats(min_value=0.2, max_value=5.0)


@given(finite, finite)
def test_series_field_identities(a, b):
    x = Taylor.variable(a, 4)
    lhs = (x + b) * (x + b).reciprocal()
    np.testing.assert_allclose(lhs.c, [1, 0, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(jets.exp(jets.log(x)).c, x.c, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose((x**2.5).c, (x * x * jets.sqrt(x)).c, rtol=1e-12, atol=1e-12)


@given(finite, finite, finite)
def test_jet_product_rule(a, b, c):
    x, y, w = Jet.variables([a, b, c])
    f = x * y / w
    np.testing.assert_allclose(f.grad, [b / c, a / c, -a * b / c**2], rtol=1e-12)
    np.testing.assert_allclose(f.hess, f.hess.T, atol=1e-14)

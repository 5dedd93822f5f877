from __future__ import annotations

import math

import pytest

from kahler_compact.errors import ExpressionError
from kahler_compact.expr import compile_expression, parse, tokenize


@pytest.mark.parametrize(
    "text, z, value",
    [
        ("z", 3.0, 3.0),
        ("z + log(z)", 1.0, 1.0),
        ("-z^2", 3.0, -9.0),
        ("2^-1", 0.0, 0.5),
        ("2^3^2", 0.0, 512.0),
        ("1 - 2 - 3", 0.0, -4.0),
        ("8 / 4 / 2", 0.0, 1.0),
        ("sqrt(1 + z^2)", 0.75, 1.25),
        ("exp(log(z))", 2.5, 2.5),
        ("1.5e1 * .5", 0.0, 7.5),
        ("(z + 1) * (z - 1)", 3.0, 8.0),
        ("z^z", 2.0, 4.0),
    ],
)
def test_evaluation(text, z, value):
    assert compile_expression(text)(z) == pytest.approx(value, rel=1e-15)


def test_tree_shape():
    assert parse("-z^2") == ("neg", ("^", ("z",), ("num", 2.0)))
    assert parse("log(z)") == ("call", "log", ("z",))


def test_tokens():
    assert [t[1] for t in tokenize("  sqrt(z)+1.5e-3 ")] == ["sqrt", "(", "z", ")", "+", "1.5e-3"]


@pytest.mark.parametrize("text", ["", "z +", "(z", "z)", "foo(z)", "y", "z $ 2", "log z", "1 2"])
def test_malformed(text):
    with pytest.raises(ExpressionError):
        compile_expression(text)


def test_eguchi_hanson_slope():
    f = compile_expression("sqrt(1 + z^2) + log(z) - log(1 + sqrt(1 + z^2))")
    h = 1e-6
    for z in (0.3, 2.0):
        slope = (f(z + h) - f(z - h)) / (2 * h)
        assert slope == pytest.approx(math.sqrt(1 + z * z) / z, rel=1e-8)

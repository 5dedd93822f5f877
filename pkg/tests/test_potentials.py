from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kahler_compact import chart_tensor as ct
from kahler_compact import potentials as pots
from kahler_compact.errors import DomainError, ExpressionError

finite = st.floats(-2.0, 2.0, allow_nan=False)


def hermitian_oracle(pot, p):
    """phi' delta_ij + phi'' conj(z_i) z_j built directly in complex arithmetic."""
    z = np.asarray(p[0::2]) + 1j * np.asarray(p[1::2])
    d = pot.jet(float(np.vdot(z, z).real))
    return d[1] * np.eye(len(z)) + d[2] * np.outer(z.conj(), z)


def random_unitary(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_flat_potential_gives_identity(rng):
    g = pots.metric_from_potential(pots.FLAT, 2)
    for p in rng.uniform(-3, 3, size=(10, 4)):
        np.testing.assert_array_equal(g.value(p), np.eye(4))


@pytest.mark.parametrize("Z, want", [(1.0, (1.0, 2.0)), (4.0, (1.0, 1.25))])
def test_burns_axis_form(Z, want):
    assert pots.kahler_form_axis(pots.BURNS, Z) == pytest.approx(want, abs=1e-14)


def test_fubini_study_axis_form():
    assert pots.kahler_form_axis(pots.FUBINI_STUDY, 1.0) == pytest.approx((0.25, 0.5), abs=1e-15)


def test_eguchi_hanson_slope():
    for Z in (0.1, 1.0, 7.0):
        assert Z * pots.EGUCHI_HANSON.jet(Z)[1] == pytest.approx(math.sqrt(1 + Z * Z), rel=1e-13)


def test_quotient_profile_flat():
    assert pots.quotient_profile(pots.FLAT, 3.0) == (1.0, 3.0)


@pytest.mark.parametrize("pot", [pots.BURNS, pots.FUBINI_STUDY, pots.EGUCHI_HANSON])
def test_metric_matches_hermitian_form(pot, rng):
    g = pots.metric_from_potential(pot, 2)
    for p in rng.uniform(-1.5, 1.5, size=(5, 4)):
        h = hermitian_oracle(pot, p)
        np.testing.assert_allclose(g.value(p), pots.hermitian_to_real(h), atol=1e-14)
        np.testing.assert_allclose(pots.real_to_hermitian(g.value(p)), h, atol=1e-14)


def test_metric_in_three_complex_dimensions(rng):
    g = pots.metric_from_potential(pots.BURNS, 3)
    p = rng.uniform(-1, 1, size=6)
    np.testing.assert_allclose(g.value(p), pots.hermitian_to_real(hermitian_oracle(pots.BURNS, p)), atol=1e-14)


def test_metric_needs_two_complex_dimensions():
    with pytest.raises(ValueError):
        pots.metric_from_potential(pots.FLAT, 1)


@given(st.lists(finite, min_size=4, max_size=4), st.lists(finite, min_size=4, max_size=4))
def test_hermitian_real_round_trip(re_, im_):
    h = np.array(re_).reshape(2, 2) + 1j * np.array(im_).reshape(2, 2)
    h = h + h.conj().T
    g = pots.hermitian_to_real(h)
    np.testing.assert_allclose(g, g.T)
    np.testing.assert_allclose(pots.real_to_hermitian(g), h)
    # the real form is J-invariant
    j = ct.standard_j(2)
    np.testing.assert_allclose(j.T @ g @ j, g, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    u = pots.unitary_to_real(random_unitary(rng, 2))
    np.testing.assert_allclose(u.T @ u, np.eye(4), atol=1e-12)
    p = rng.uniform(-1.5, 1.5, size=4)
    if p @ p < 0.05:
        p = p + 0.5
    for pot in (pots.BURNS, pots.EGUCHI_HANSON):
        g = pots.metric_from_potential(pot, 2)
        np.testing.assert_allclose(u.T @ g.value(u @ p) @ u, g.value(p), atol=1e-11)


@pytest.mark.parametrize(
    "p, want",
    [
        ([2.0, 0.0, 0.0, 0.0], [0.5, 0.0, 0.0, 0.0]),
        ([1.0, 1.0, 0.0, 0.0], [0.5, -0.5, 0.0, 0.0]),
        ([0.0, 0.0, 0.0, 2.0], [0.0, 0.0, 0.0, 0.5]),
    ],
)
def test_invert_examples(p, want):
    np.testing.assert_allclose(pots.invert(p), want)


@given(st.lists(finite, min_size=4, max_size=4))
def test_invert_is_involution(p):
    p = np.array(p)
    if p @ p < 1e-4:
        return
    np.testing.assert_allclose(pots.invert(pots.invert(p)), p, atol=1e-12)
    q = pots.invert(p)
    assert q @ q == pytest.approx(1.0 / (p @ p), rel=1e-12)


def test_invert_fixes_unit_sphere_setwise(rng):
    for p in rng.normal(size=(10, 4)):
        p /= np.linalg.norm(p)
        assert np.linalg.norm(pots.invert(p)) == pytest.approx(1.0)


def test_invert_jacobian_matches_differences():
    p = np.array([0.4, -0.3, 0.9, 0.2])
    h = 1e-6
    fd = np.array([(pots.invert(p + h * e) - pots.invert(p - h * e)) / (2 * h) for e in np.eye(4)]).T
    np.testing.assert_allclose(pots.invert_jacobian(p), fd, atol=1e-8)


def test_inversion_undefined_at_origin():
    for f in (pots.invert, pots.invert_jacobian, pots.pullback_J, pots.inversion_J, pots.commutation_defect):
        with pytest.raises(DomainError, match="inversion undefined at origin"):
            f(np.zeros(4))


def test_structures_square_to_minus_one(rng):
    for p in rng.uniform(-2, 2, size=(10, 4)):
        for j in (pots.pullback_J(p), pots.inversion_J(p)):
            np.testing.assert_allclose(j @ j, -np.eye(4), atol=1e-12)


def test_pullback_structure_differs_off_axis():
    j0 = ct.standard_j(2)
    p = np.array([1.0, 0.0, 0.5, 0.0])
    j = pots.pullback_J(p)
    assert np.max(np.abs(j - j0)) > 0.1 and np.max(np.abs(j + j0)) > 0.1
    on_axis = pots.axis_point(2.0)
    np.testing.assert_allclose(pots.pullback_J(on_axis), j0, atol=1e-14)


def test_commutation_only_on_axis():
    for Z in (0.3, 1.0, 5.0):
        assert pots.commutation_defect(pots.axis_point(Z)) < 1e-10
    assert pots.commutation_defect([0.6, 0.8, 0.0, 0.0]) < 1e-10
    assert pots.commutation_defect([1.0, 0.0, 0.5, 0.0]) > 1e-2
    assert pots.commutation_defect([0.3, 0.2, 0.7, -0.4]) > 1e-2


def test_inversion_structure_flips_complex_line():
    p = np.array([1.0, 0.0, 0.0, 0.0])
    j = pots.inversion_J(p)
    # -J0 on the z1 line, J0 on the z2 line
    np.testing.assert_allclose(j[:2, :2], -ct.standard_j(1), atol=1e-14)
    np.testing.assert_allclose(j[2:, 2:], ct.standard_j(1), atol=1e-14)


def test_axis_point():
    np.testing.assert_array_equal(pots.axis_point(4.0, 3), [2.0, 0, 0, 0, 0, 0])


def test_bundled_corpus():
    corpus = pots.load_corpus()
    assert set(corpus) == {"flat", "burns", "fubini_study", "eguchi_hanson"}
    for name, pot in corpus.items():
        assert pot.domain == (0.0, math.inf)
        for Z in (0.5, 2.0):
            np.testing.assert_allclose(pot.jet(Z), getattr(pots, name.upper()).jet(Z), rtol=1e-14)


def test_parse_corpus_comments_and_domains(tmp_path):
    text = "# a comment\n\nshifted, log(z) + z^2, (1, 5)\n  cubic , z^3 , ( 0 , inf )\n"
    path = tmp_path / "c.txt"
    path.write_text(text)
    corpus = pots.load_corpus(path)
    assert corpus["shifted"].domain == (1.0, 5.0)
    assert corpus["cubic"].jet(2.0)[:4] == pytest.approx([8.0, 12.0, 12.0, 6.0])


@pytest.mark.parametrize(
    "text, msg",
    [
        ("flat, z", "expected"),
        ("flat, z, (2, 1)", "empty domain"),
        ("flat, z, (0, big)", "bad domain bound"),
        ("flat, z, (0, inf)\nflat, z, (0, inf)", "duplicate"),
        ("flat, z +, (0, inf)", "line 1"),
    ],
)
def test_parse_corpus_errors(text, msg):
    with pytest.raises(ExpressionError, match=msg):
        pots.parse_corpus(text)


def test_domain_is_enforced():
    pot = pots.from_expression("narrow", "z", (1.0, 2.0))
    with pytest.raises(DomainError, match="potential not defined here"):
        pot.jet(3.0)
    with pytest.raises(DomainError):
        pots.FLAT(0.0)


def test_positivity():
    assert pots.FUBINI_STUDY.is_positive_at(1.0)
    assert not pots.from_expression("neg", "-z").is_positive_at(1.0)
    # Burns has (Z phi')' = 1 but phi' < 0 nowhere on (0, inf)
    assert pots.BURNS.is_positive_at(0.01)


def test_inverse_variable():
    flat_xi = pots.in_inverse_variable(pots.FLAT)
    assert flat_xi.variable == "xi"
    np.testing.assert_allclose(flat_xi.jet(2.0), [0.5, -0.25, 0.25, -0.375, 0.75], rtol=1e-14)
    back = pots.in_inverse_variable(flat_xi)
    assert back.variable == "z"
    np.testing.assert_allclose(back.jet(3.0), pots.FLAT.jet(3.0), atol=1e-14)

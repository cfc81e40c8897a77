import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudobosons import jets
from pseudobosons.jets import (
    Jet,
    JetError,
    jet_binary,
    jet_compose,
    jet_hermite,
    jet_lift,
)
from pseudobosons.expressions import parse_expr


def coeffs(j):
    return np.asarray(j.coeffs)


class TestExamples:
    def test_exp_series_at_zero(self):
        j = jet_lift(parse_expr("exp(x)"), 0.0, 3)
        assert np.allclose(coeffs(j), [1, 1, 0.5, 1 / 6], atol=1e-15)

    def test_constant_one(self):
        j = jet_lift(parse_expr("1"), 0.37, 2)
        assert np.allclose(coeffs(j), [1, 0, 0], atol=0)

    def test_rational_by_hand(self):
        # d/dx (1+x^2)^(-1) = -2x/(1+x^2)^2, so at x=1: value 1/2, slope -1/2
        j = jet_lift(parse_expr("1/(1+x^2)"), 1.0, 1)
        assert np.allclose(coeffs(j), [0.5, -0.5], atol=1e-15)

    def test_mul(self):
        a = Jet(0.0, [1, 1])
        b = Jet(0.0, [1, -1])
        assert np.allclose(coeffs(jet_binary("mul", a, b)), [1, 0], atol=0)

    def test_div_geometric(self):
        a = Jet(0.0, [1, 0, 0])
        b = Jet(0.0, [1, 0, 1])
        assert np.allclose(coeffs(jet_binary("div", a, b)), [1, 0, -1], atol=0)

    def test_add_inverse(self):
        a = Jet(0.0, [2, 3])
        b = Jet(0.0, [-2, -3])
        assert np.allclose(coeffs(jet_binary("add", a, b)), [0, 0], atol=0)

    def test_exp_compose(self):
        u = Jet(0.0, [0, 1, 0])
        assert np.allclose(coeffs(jet_compose("exp", u)), [1, 1, 0.5],
                           atol=1e-15)

    def test_hermite2_at_zero(self):
        u = Jet(0.0, [0.0])
        assert np.allclose(coeffs(jet_compose("hermite_n", u, 2)), [-2.0])

    def test_sinh_series(self):
        u = Jet(0.0, [0, 1, 0, 0])
        assert np.allclose(coeffs(jet_compose("sinh", u)), [0, 1, 0, 1 / 6],
                           atol=1e-15)


class TestErrors:
    def test_mismatched_base(self):
        with pytest.raises(JetError, match="base"):
            Jet(0.0, [1, 2]) + Jet(1.0, [1, 2])

    def test_mismatched_order(self):
        with pytest.raises(JetError, match="order"):
            Jet(0.0, [1, 2]) * Jet(0.0, [1, 2, 3])

    def test_div_by_zero_constant_term(self):
        with pytest.raises(JetError, match="zero constant term"):
            Jet(0.0, [1.0, 0.0]) / Jet(0.0, [0.0, 1.0])

    def test_capacity(self):
        with pytest.raises(JetError, match="capacity"):
            Jet.constant(1.0, 0.0, jets.get_max_order() + 1)

    def test_capacity_configurable(self):
        old = jets.get_max_order()
        try:
            jets.set_max_order(old + 5)
            Jet.constant(1.0, 0.0, old + 5)
        finally:
            jets.set_max_order(old)

    def test_deriv_needs_order(self):
        with pytest.raises(JetError):
            Jet(0.0, [1.0]).deriv()


def _poly_expr(cs):
    # built programmatically: the grammar has no negative literals
    from pseudobosons.expressions import BinOp, Const, Pow, Var

    node = Const(cs[0])
    for k, c in enumerate(cs[1:], start=1):
        node = BinOp("+", node, BinOp("*", Const(c), Pow(Var(), k)))
    return node


small_floats = st.floats(min_value=-3, max_value=3,
                         allow_nan=False, allow_infinity=False)


class TestProperties:
    @settings(max_examples=80, deadline=None)
    @given(cs=st.lists(small_floats, min_size=1, max_size=6),
           x=small_floats, order=st.integers(0, 8))
    def test_polynomial_oracle(self, cs, x, order):
        # oracle: exact polynomial differentiation
        j = jet_lift(_poly_expr(cs), x, order)
        p = np.polynomial.Polynomial(cs)
        for k in range(order + 1):
            want = p.deriv(k)(x) / math.factorial(k) if k <= len(cs) else 0.0
            scale = 1.0 + abs(want)
            assert abs(j.coeffs[k] - want) <= 1e-12 * scale

    @settings(max_examples=60, deadline=None)
    @given(cs=st.lists(small_floats, min_size=1, max_size=5),
           x=small_floats, n=st.integers(2, 8), k=st.integers(0, 2))
    def test_coefficients_independent_of_order(self, cs, x, n, k):
        k = min(k, n - 1)
        expr = _poly_expr(cs)
        low = jet_lift(expr, x, k)
        high = jet_lift(expr, x, n)
        assert abs(low.coeffs[k] - high.coeffs[k]) <= 1e-13 * (
            1 + abs(high.coeffs[k]))

    @settings(max_examples=60, deadline=None)
    @given(a=st.lists(small_floats, min_size=1, max_size=5),
           b=st.lists(small_floats, min_size=1, max_size=5),
           x=small_floats, order=st.integers(0, 6))
    def test_leibniz(self, a, b, x, order):
        from pseudobosons.expressions import BinOp

        ea, eb = _poly_expr(a), _poly_expr(b)
        direct = jet_lift(BinOp("*", ea, eb), x, order)
        via_mul = jet_binary("mul", jet_lift(ea, x, order),
                             jet_lift(eb, x, order))
        assert np.allclose(direct.coeffs, via_mul.coeffs,
                           rtol=1e-12, atol=1e-12)


class TestAgainstMpmath:
    @pytest.mark.parametrize("fn,src", [
        ("exp", "exp(x)"),
        ("sinh", "sinh(x)"),
        ("cosh", "cosh(x)"),
        ("tanh", "tanh(x)"),
    ])
    def test_composition_coefficients(self, fn, src):
        # mpmath.taylor differentiates independently of the jet recurrences
        expr = parse_expr(f"{src[:-3]}(x + x^2/2)")
        for x in (-0.7, 0.0, 0.9):
            j = expr.eval_jet(x, 8)
            ref = mpmath.taylor(
                lambda t: getattr(mpmath, fn)(t + t * t / 2), x, 8)
            for k in range(9):
                assert abs(j.coeffs[k] - float(ref[k])) < 1e-11 * (
                    1 + abs(float(ref[k])))

    def test_sqrt_jet(self):
        expr = parse_expr("sqrt(1 + x^2)")
        j = expr.eval_jet(0.5, 6)
        ref = mpmath.taylor(lambda t: mpmath.sqrt(1 + t * t), 0.5, 6)
        assert np.allclose(j.coeffs, [float(r) for r in ref], atol=1e-13)

    def test_hermite_jet_matches_recurrence_values(self):
        u = Jet.variable(0.8, 3)
        j = jet_hermite(u, 7)
        h7 = lambda y: mpmath.hermite(7, y)
        ref = mpmath.taylor(h7, 0.8, 3)
        assert np.allclose(j.coeffs, [float(r) for r in ref],
                           rtol=1e-12, atol=1e-9)


def test_conjugate_is_pointwise_conjugation():
    expr = parse_expr("(1 + 2*i)*x + exp(x)")
    j = expr.eval_jet(0.4, 4)
    jc = j.conjugate()
    assert np.allclose(jc.coeffs, np.conj(j.coeffs), atol=0)


def test_antideriv_roundtrip_with_deriv():
    j = parse_expr("sinh(x)").eval_jet(0.3, 5)
    back = j.antideriv(123.0).deriv()
    assert np.allclose(back.coeffs, j.coeffs, atol=0)

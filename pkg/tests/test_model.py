import math

import numpy as np
import pytest

from pseudobosons import (
    ModelError,
    TestFunction,
    apply_ladder,
    build_builtin,
    check_pb_conditions,
    commutator_residual,
    from_expressions,
)
from pseudobosons.expressions import to_source
from pseudobosons.quad import oscillator_en


def broken_model():
    # alpha_a alpha_b' - alpha_a' alpha_b = 1 identically: not pseudo-bosonic
    return from_expressions("1", "0", "x", "0", name="broken")


class TestBuiltins:
    def test_bosonic_coefficients(self):
        m = build_builtin("bosonic")
        xs = np.array([0.0, 1.0, -2.0])
        inv = 1 / math.sqrt(2)
        assert np.allclose(m.alpha_a.eval_values(xs), inv)
        assert np.allclose(m.alpha_b.eval_values(xs), inv)
        assert np.allclose(m.beta_a.eval_values(xs), inv * xs)
        assert np.allclose(m.beta_b.eval_values(xs), inv * xs)

    def test_swanson_coefficients(self):
        th = 0.3
        m = build_builtin("swanson", theta=th)
        xs = np.array([0.5, -1.5])
        inv = 1 / math.sqrt(2)
        assert np.allclose(m.alpha_a.eval_values(xs),
                           np.exp(-1j * th) * inv)
        assert np.allclose(m.beta_a.eval_values(xs),
                           np.exp(1j * th) * xs * inv)

    def test_example2_beta_a(self):
        m = build_builtin("example2")
        xs = np.linspace(-2, 2, 9)
        assert np.allclose(m.beta_a.eval_values(xs), 2 * np.sinh(xs))
        assert np.allclose(m.beta_b.eval_values(xs),
                           -np.sinh(xs) / (2 * np.cosh(xs) ** 2))

    def test_example1_closed_inverse(self):
        m = build_builtin("example1")
        us = np.linspace(-30, 30, 25)
        xs = m.rho_inverse(us)
        assert np.allclose(xs + xs**3 / 3, us, rtol=1e-12, atol=1e-12)

    def test_unknown_builtin(self):
        with pytest.raises(ModelError, match="unknown builtin"):
            build_builtin("nope")

    def test_zero_alpha_rejected(self):
        with pytest.raises(ModelError, match="nonzero"):
            build_builtin("constant_alpha", alpha_a=0.0, alpha_b=1.0, k=0.0)

    def test_swanson_angle_limit(self):
        with pytest.raises(ModelError, match="pi/4"):
            build_builtin("swanson", theta=1.0)

    def test_model_echo_is_grammar_valid(self):
        from pseudobosons.expressions import parse_expr

        for name, kw in [("swanson", {"theta": 0.3}),
                         ("shifted", {"alpha": 0.1 + 0.2j, "beta": 0.3}),
                         ("example1", {}), ("example2", {})]:
            m = build_builtin(name, **kw)
            for coeff in (m.alpha_a, m.beta_a, m.alpha_b, m.beta_b):
                parse_expr(to_source(coeff))  # must not raise


class TestConditions:
    def test_all_builtins_pass_on_wide_grid(self, all_builtins):
        grid = np.linspace(-5, 5, 1001)
        for name, m in all_builtins.items():
            rep = check_pb_conditions(m, grid, tol=1e-10)
            assert rep.passed, (name, rep.max_abs1, rep.max_abs2)

    def test_broken_model_residual_one(self):
        rep = check_pb_conditions(broken_model(), np.linspace(0.5, 3, 11))
        assert np.allclose(rep.residual1, 1.0)
        assert not rep.passed
        assert rep.verdict == "fail"

    def test_bosonic_residual2_vanishes(self, bosonic):
        # theta' = (alpha_a beta_b + alpha_b beta_a)' = x' = 1 for constant
        # alphas, which is exactly the second condition there
        rep = check_pb_conditions(bosonic, np.linspace(-3, 3, 21))
        assert rep.max_abs2 < 1e-14

    def test_constant_alpha_theta_is_x_plus_k(self, constant_alpha):
        xs = np.linspace(-4, 4, 41)
        k = constant_alpha.flavor.k
        assert np.allclose(constant_alpha.theta_values(xs), xs + k,
                           atol=1e-14)


class TestApplyLadder:
    def test_bosonic_vacuum_killed(self, bosonic):
        from pseudobosons.expressions import parse_expr

        gauss = parse_expr("exp(-x^2/2)")
        for x in (-1.3, 0.0, 2.1):
            out = apply_ladder(bosonic, "a", gauss.eval_jet, x, 1)
            assert np.max(np.abs(out.coeffs)) < 1e-14

    def test_example1_vacuum_killed(self, example1):
        for x in (-2.0, 0.3, 1.7):
            out = apply_ladder(example1, "a", example1.phi_vacuum_jet, x, 0)
            assert abs(out.value) < 1e-12

    def test_bosonic_b_raises_ground_state(self, bosonic):
        # b e_0 = e_1 in the oscillator normalization
        from pseudobosons.expressions import parse_expr

        e0 = parse_expr("exp(-x^2/2)")  # pi^(1/4) e_0
        for x in (-0.9, 0.4, 1.6):
            out = apply_ladder(bosonic, "b", e0.eval_jet, x, 0)
            want = math.pi ** 0.25 * oscillator_en(1, x)
            assert abs(out.value - want) < 1e-13

    def test_adjoints_conjugate_coefficients(self, swanson):
        g = TestFunction(0.0, 1.5)
        x = 0.37
        a_val = apply_ladder(swanson, "b_dag", g.jet, x, 0).value
        ab = swanson.alpha_b.eval_values(np.array([x]))[0]
        bb = swanson.beta_b.eval_values(np.array([x]))[0]
        gj = g.jet(x, 1)
        want = np.conj(ab) * gj.derivative(1) + np.conj(bb) * gj.value
        assert abs(a_val - want) < 1e-14

    def test_unknown_operator(self, bosonic):
        with pytest.raises(ModelError):
            apply_ladder(bosonic, "c", TestFunction().jet, 0.0, 0)


class TestCommutator:
    def test_example2_bump(self, example2):
        f = TestFunction(center=0.3, width=1.2)
        grid = np.linspace(-0.9, 1.5, 101)
        stats = commutator_residual(example2, f.jet, grid)
        assert stats.sup_abs <= 1e-10

    def test_broken_model_nonzero(self):
        from pseudobosons.expressions import parse_expr

        m = broken_model()
        f = parse_expr("x")
        grid = np.linspace(0.5, 2.0, 7)
        stats = commutator_residual(m, f.eval_jet, grid)
        # [a,b]x = -1 for this model, so the defect is |(-1) - x|
        assert np.allclose(stats.residuals, np.abs(-1.0 - grid), atol=1e-12)

    def test_zero_function(self, example1):
        from pseudobosons.expressions import parse_expr

        zero = parse_expr("0")
        stats = commutator_residual(example1, zero.eval_jet,
                                    np.linspace(-2, 2, 11))
        assert stats.sup_abs == 0.0

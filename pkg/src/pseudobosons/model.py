"""Ladder-operator models.

A model is a pair of first-order differential operators

    a = alpha_a(x) d/dx + beta_a(x)
    b = -d/dx alpha_b(x) + beta_b(x)

together with their formal adjoints

    a^dag = -d/dx conj(alpha_a(x)) + conj(beta_a(x))
    b^dag = conj(alpha_b(x)) d/dx + conj(beta_b(x)).

The pair satisfies [a, b] f = f on C^2 functions exactly when the two
coefficient conditions checked by :func:`check_pb_conditions` hold.  The
formal adjoints are taken as definitions; no Hilbert-space domain
bookkeeping is attempted.

Built-in models cover the harmonic oscillator, its shifted and Swanson
variants, general constant coefficients, and the two worked
variable-coefficient examples (a rational-alpha equal-alpha model and a
proportional sinh model).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import expressions as ex
from .expressions import FunctionExpr, parse_expr
from .jets import Jet

__all__ = [
    "ModelError",
    "GeneralFlavor",
    "ConstantAlphaFlavor",
    "ProportionalFlavor",
    "PBModel",
    "ConditionReport",
    "CommutatorStats",
    "parse_expr",
    "build_builtin",
    "from_expressions",
    "proportional_model",
    "check_pb_conditions",
    "apply_ladder",
    "commutator_residual",
    "BUILTIN_NAMES",
]


class ModelError(Exception):
    """Invalid model construction or use."""


@dataclass(frozen=True)
class GeneralFlavor:
    kind = "general"


@dataclass(frozen=True)
class ConstantAlphaFlavor:
    """Constant alpha_a, alpha_b with theta(x) = x + k."""

    alpha_a: complex
    alpha_b: complex
    k: complex
    kind = "constant_alpha"


@dataclass(frozen=True)
class ProportionalFlavor:
    """alpha_a = ratio * alpha_b with real alpha_b, beta_a = rho =
    antideriv(1/alpha_b) and beta_b = alpha_b'.  ratio == 1 is the
    equal-alpha case."""

    ratio: float

    @property
    def kind(self) -> str:
        return "equal_alpha" if self.ratio == 1.0 else "proportional"


Flavor = Union[GeneralFlavor, ConstantAlphaFlavor, ProportionalFlavor]


@dataclass
class PBModel:
    """The four coefficient functions plus registered derived data."""

    alpha_a: FunctionExpr
    beta_a: FunctionExpr
    alpha_b: FunctionExpr
    beta_b: FunctionExpr
    flavor: Flavor = field(default_factory=GeneralFlavor)
    name: str = "custom"
    rho: Optional[FunctionExpr] = None
    rho_inverse: Optional[Callable] = None  # maps a rho value back to x
    vacuum_phi: Optional[FunctionExpr] = None
    vacuum_psi: Optional[FunctionExpr] = None
    norm_product: Optional[complex] = None  # conj(N_psi) * N_phi once fixed
    _phi_vac_generic: Optional[FunctionExpr] = field(
        default=None, repr=False, compare=False)
    _psi_vac_generic: Optional[FunctionExpr] = field(
        default=None, repr=False, compare=False)

    # -- coefficient access --------------------------------------------

    def coefficient(self, which: str) -> FunctionExpr:
        try:
            return {"alpha_a": self.alpha_a, "beta_a": self.beta_a,
                    "alpha_b": self.alpha_b, "beta_b": self.beta_b}[which]
        except KeyError:
            raise ModelError(f"unknown coefficient {which!r}") from None

    def theta_jet(self, x: float, order: int) -> Jet:
        """theta = alpha_a beta_b + alpha_b beta_a."""
        return (self.alpha_a.eval_jet(x, order) * self.beta_b.eval_jet(x, order)
                + self.alpha_b.eval_jet(x, order) * self.beta_a.eval_jet(x, order))

    def theta_values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return (self.alpha_a.eval_values(xs) * self.beta_b.eval_values(xs)
                + self.alpha_b.eval_values(xs) * self.beta_a.eval_values(xs))

    # -- vacua -----------------------------------------------------------
    #
    # phi_0 = N_phi exp(-antideriv(beta_a / alpha_a))
    # psi_0 = N_psi exp(-antideriv(conj(beta_b) / conj(alpha_b)))
    #        = N_psi conj(exp(-antideriv(beta_b / alpha_b)))
    #
    # Built-ins register explicit closed forms (vacuum_psi is stored
    # already conjugated, i.e. it evaluates to psi_0 directly); otherwise
    # the antiderivative is evaluated numerically with its constant fixed
    # by F(0) = 0.

    def _generic_vacuum(self, side: str) -> FunctionExpr:
        if side == "phi":
            if self._phi_vac_generic is None:
                ratio = ex.BinOp("/", self.beta_a, self.alpha_a)
                self._phi_vac_generic = ex.Call(
                    "exp", ex.BinOp("-", ex.Const(0.0), ex.Antideriv(ratio)))
            return self._phi_vac_generic
        if self._psi_vac_generic is None:
            ratio = ex.BinOp("/", self.beta_b, self.alpha_b)
            self._psi_vac_generic = ex.Call(
                "exp", ex.BinOp("-", ex.Const(0.0), ex.Antideriv(ratio)))
        return self._psi_vac_generic

    def phi_vacuum_jet(self, x: float, order: int) -> Jet:
        expr = self.vacuum_phi or self._generic_vacuum("phi")
        return expr.eval_jet(x, order)

    def psi_vacuum_jet(self, x: float, order: int) -> Jet:
        if self.vacuum_psi is not None:
            return self.vacuum_psi.eval_jet(x, order)
        return self._generic_vacuum("psi").eval_jet(x, order).conjugate()

    def phi_vacuum_values(self, xs) -> np.ndarray:
        expr = self.vacuum_phi or self._generic_vacuum("phi")
        return expr.eval_values(xs)

    def psi_vacuum_values(self, xs) -> np.ndarray:
        if self.vacuum_psi is not None:
            return self.vacuum_psi.eval_values(xs)
        return np.conj(self._generic_vacuum("psi").eval_values(xs))

    def ensure_normalized(self) -> complex:
        if self.norm_product is None:
            raise ModelError(
                "normalization not fixed: call states.fix_normalization"
            )
        return self.norm_product


# ----------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------

BUILTIN_NAMES = ("bosonic", "shifted", "swanson", "constant_alpha",
                 "example1", "example2")


def _expr(src_or_tree) -> FunctionExpr:
    if isinstance(src_or_tree, FunctionExpr):
        return src_or_tree
    return parse_expr(src_or_tree)


def _exp_of_neg(inner: FunctionExpr) -> FunctionExpr:
    return ex.Call("exp", ex.BinOp("-", ex.Const(0.0), inner))


def build_builtin(name: str, **params) -> PBModel:
    """Construct a named built-in model.

    bosonic                        a = (d/dx + x)/sqrt(2), b = a^dag
    shifted(alpha, beta)           oscillator with complex shifts
    swanson(theta)                 complex-rotated oscillator, |theta| < pi/4
    constant_alpha(alpha_a, alpha_b, k)
                                   constant coefficients, theta(x) = x + k
    example1                       alpha = 1/(1+x^2), beta_a = x + x^3/3
    example2                       alpha_a = 2 alpha_b = 1/cosh(x)
    """
    if name == "bosonic":
        return build_builtin("shifted", alpha=0.0, beta=0.0, _name="bosonic")

    if name == "shifted":
        al = complex(params.pop("alpha", 0.0))
        be = complex(params.pop("beta", 0.0))
        _check_no_extra(name, params, allow={"_name"})
        inv = 1.0 / math.sqrt(2.0)
        x = ex.Var()
        half_x = ex.BinOp("*", ex.Const(inv), x)
        model_name = params.get("_name", "shifted")
        return PBModel(
            alpha_a=ex.Const(inv),
            beta_a=_maybe_shift(half_x, al),
            alpha_b=ex.Const(inv),
            beta_b=_maybe_shift(half_x, be),
            flavor=ConstantAlphaFlavor(inv, inv, (al + be) * inv),
            name=model_name,
            vacuum_phi=_exp_of_neg(_quadratic(0.5, al * math.sqrt(2.0))),
            vacuum_psi=_exp_of_neg(_quadratic(0.5, be.conjugate() * math.sqrt(2.0))),
        )

    if name == "swanson":
        th = float(params.pop("theta"))
        _check_no_extra(name, params)
        if not abs(th) < math.pi / 4:
            raise ModelError("swanson requires |theta| < pi/4")
        inv = 1.0 / math.sqrt(2.0)
        ca = cmath.exp(-1j * th) * inv
        cb = cmath.exp(1j * th) * inv
        x = ex.Var()
        return PBModel(
            alpha_a=ex.Const(ca),
            beta_a=ex.BinOp("*", ex.Const(cb), x),
            alpha_b=ex.Const(ca),
            beta_b=ex.BinOp("*", ex.Const(cb), x),
            flavor=ConstantAlphaFlavor(ca, ca, 0.0),
            name="swanson",
            vacuum_phi=_exp_of_neg(_quadratic(0.5 * cmath.exp(2j * th), 0.0)),
            vacuum_psi=_exp_of_neg(_quadratic(0.5 * cmath.exp(-2j * th), 0.0)),
        )

    if name == "constant_alpha":
        aa = complex(params.pop("alpha_a"))
        ab = complex(params.pop("alpha_b"))
        k = complex(params.pop("k", 0.0))
        _check_no_extra(name, params)
        if aa == 0 or ab == 0:
            raise ModelError("constant_alpha requires nonzero alphas")
        x = ex.Var()
        prod = aa * ab
        return PBModel(
            alpha_a=ex.Const(aa),
            beta_a=ex.BinOp("*", ex.Const(1.0 / ab), x),
            alpha_b=ex.Const(ab),
            beta_b=ex.Const(k / aa),
            flavor=ConstantAlphaFlavor(aa, ab, k),
            name="constant_alpha",
            vacuum_phi=_exp_of_neg(_quadratic(0.5 / prod, 0.0)),
            vacuum_psi=_exp_of_neg(
                _quadratic(0.0, (k / prod).conjugate())),
        )

    if name == "example1":
        _check_no_extra(name, params)
        rho = parse_expr("x + x^3/3")
        return PBModel(
            alpha_a=parse_expr("1/(1+x^2)"),
            beta_a=rho,
            alpha_b=parse_expr("1/(1+x^2)"),
            beta_b=parse_expr("-2*x/(1+x^2)^2"),
            flavor=ProportionalFlavor(1.0),
            name="example1",
            rho=rho,
            rho_inverse=_example1_rho_inverse,
            vacuum_phi=parse_expr("exp(-(x + x^3/3)^2/2)"),
            vacuum_psi=parse_expr("1 + x^2"),
        )

    if name == "example2":
        _check_no_extra(name, params)
        rho = parse_expr("2*sinh(x)")
        return PBModel(
            alpha_a=parse_expr("1/cosh(x)"),
            beta_a=rho,
            alpha_b=parse_expr("1/(2*cosh(x))"),
            beta_b=parse_expr("-sinh(x)/(2*cosh(x)^2)"),
            flavor=ProportionalFlavor(2.0),
            name="example2",
            rho=rho,
            rho_inverse=lambda u: np.arcsinh(np.asarray(u, dtype=float) / 2.0),
            vacuum_phi=parse_expr("exp(-cosh(x)^2)"),
            vacuum_psi=parse_expr("2*cosh(x)"),
        )

    raise ModelError(f"unknown builtin {name!r}; known: {BUILTIN_NAMES}")


def _check_no_extra(name, params, allow=frozenset()):
    extra = set(params) - set(allow)
    if extra:
        raise ModelError(f"unexpected parameters for {name!r}: {sorted(extra)}")


def _maybe_shift(expr: FunctionExpr, c: complex) -> FunctionExpr:
    if c == 0:
        return expr
    return ex.BinOp("+", expr, ex.Const(c))


def _quadratic(c2: complex, c1: complex) -> FunctionExpr:
    """c2*x^2 + c1*x as an expression tree (dropping zero parts)."""
    x = ex.Var()
    terms = []
    if c2 != 0:
        terms.append(ex.BinOp("*", ex.Const(c2), ex.Pow(x, 2)))
    if c1 != 0:
        terms.append(ex.BinOp("*", ex.Const(c1), x))
    if not terms:
        return ex.Const(0.0)
    node = terms[0]
    for t in terms[1:]:
        node = ex.BinOp("+", node, t)
    return node


def _example1_rho_inverse(u):
    """Real root of x + x^3/3 = u (Cardano, arranged to avoid
    cancellation for large |u|)."""
    u = np.asarray(u, dtype=float)
    root = np.sqrt(4.0 + 9.0 * u * u)
    v = (3.0 * u + root) / 2.0          # always >= 1 in magnitude for u >= 0
    v = np.where(u >= 0, v, 1.0 / ((root - 3.0 * u) / 2.0))
    w = 1.0 / v
    return np.cbrt(v) - np.cbrt(w)


def from_expressions(alpha_a, beta_a, alpha_b, beta_b, *,
                     name: str = "custom") -> PBModel:
    """General model from four coefficient expressions (source text or
    parsed trees)."""
    return PBModel(
        alpha_a=_expr(alpha_a), beta_a=_expr(beta_a),
        alpha_b=_expr(alpha_b), beta_b=_expr(beta_b),
        flavor=GeneralFlavor(), name=name,
    )


def proportional_model(alpha_b, *, ratio: float = 1.0,
                       name: str = "proportional") -> PBModel:
    """Model with alpha_a = ratio * alpha_b, beta_a = rho =
    antideriv(1/alpha_b), beta_b = alpha_b'.

    alpha_b must be real and strictly positive; ratio = 1 gives the
    equal-alpha construction.
    """
    ab = _expr(alpha_b)
    probe = ab.eval_values(np.linspace(-3, 3, 31))
    if np.max(np.abs(probe.imag)) > 1e-12 or np.min(probe.real) <= 0:
        raise ModelError("proportional models need real positive alpha_b")
    ratio = float(ratio)
    aa = ab if ratio == 1.0 else ex.BinOp("*", ex.Const(ratio), ab)
    rho = ex.Antideriv(ex.BinOp("/", ex.Const(1.0), ab))
    c = ratio
    vac_phi = _exp_of_neg(
        ex.BinOp("*", ex.Const(0.5 / c), ex.Pow(rho, 2)))
    vac_psi = ex.BinOp("/", ex.Const(1.0), ab)
    return PBModel(
        alpha_a=aa, beta_a=rho, alpha_b=ab, beta_b=ex.Deriv(ab),
        flavor=ProportionalFlavor(ratio), name=name,
        rho=rho, vacuum_phi=vac_phi, vacuum_psi=vac_psi,
    )


# ----------------------------------------------------------------------
# Pseudo-bosonic conditions and operator application
# ----------------------------------------------------------------------

@dataclass
class ConditionReport:
    """Pointwise residuals of the two coefficient conditions

        r1 = alpha_a alpha_b' - alpha_a' alpha_b
        r2 = alpha_a beta_b' + alpha_b beta_a' - 1 - alpha_a alpha_b''
    """

    grid: np.ndarray
    residual1: np.ndarray
    residual2: np.ndarray
    max_abs1: float
    max_abs2: float
    tol: float
    passed: bool

    @property
    def max_abs(self) -> float:
        return max(self.max_abs1, self.max_abs2)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def check_pb_conditions(m: PBModel, grid, tol: float = 1e-10) -> ConditionReport:
    grid = np.asarray(grid, dtype=float)
    r1 = np.empty(grid.size, dtype=np.complex128)
    r2 = np.empty(grid.size, dtype=np.complex128)
    for i, x in enumerate(grid):
        aa = m.alpha_a.eval_jet(x, 1)
        ab = m.alpha_b.eval_jet(x, 2)
        ba = m.beta_a.eval_jet(x, 1)
        bb = m.beta_b.eval_jet(x, 1)
        aa0, aa1 = aa.value, aa.derivative(1)
        ab0, ab1, ab2 = ab.value, ab.derivative(1), ab.derivative(2)
        r1[i] = aa0 * ab1 - aa1 * ab0
        r2[i] = aa0 * bb.derivative(1) + ab0 * ba.derivative(1) - 1.0 - aa0 * ab2
    m1 = float(np.max(np.abs(r1)))
    m2 = float(np.max(np.abs(r2)))
    return ConditionReport(grid, r1, r2, m1, m2, tol,
                           passed=(m1 < tol and m2 < tol))


def apply_ladder(m: PBModel, which: str, f, x: float, order: int) -> Jet:
    """Apply one of the four operators to a jet-valued function.

    ``f`` is a callable (x, order) -> Jet; one derivative order is
    consumed, so ``f`` is evaluated at order + 1.

        a:     alpha_a f' + beta_a f
        b:     -(alpha_b f)' + beta_b f
        a_dag: -(conj(alpha_a) f)' + conj(beta_a) f
        b_dag: conj(alpha_b) f' + conj(beta_b) f
    """
    fj = f(x, order + 1)
    if which == "a":
        aa = m.alpha_a.eval_jet(x, order)
        ba = m.beta_a.eval_jet(x, order)
        return aa * fj.deriv() + ba * fj.truncate(order)
    if which == "b":
        ab = m.alpha_b.eval_jet(x, order + 1)
        bb = m.beta_b.eval_jet(x, order)
        return -((ab * fj).deriv()) + bb * fj.truncate(order)
    if which == "a_dag":
        aa = m.alpha_a.eval_jet(x, order + 1).conjugate()
        ba = m.beta_a.eval_jet(x, order).conjugate()
        return -((aa * fj).deriv()) + ba * fj.truncate(order)
    if which == "b_dag":
        ab = m.alpha_b.eval_jet(x, order).conjugate()
        bb = m.beta_b.eval_jet(x, order).conjugate()
        return ab * fj.deriv() + bb * fj.truncate(order)
    raise ModelError(f"unknown ladder operator {which!r}")


@dataclass
class CommutatorStats:
    grid: np.ndarray
    residuals: np.ndarray
    sup_abs: float


def commutator_residual(m: PBModel, f, grid) -> CommutatorStats:
    """sup over the grid of |(ab - ba) f(x) - f(x)| for a C^2 function f
    given as a jet-valued callable."""
    grid = np.asarray(grid, dtype=float)
    res = np.empty(grid.size, dtype=float)

    def bf(xx, oo):
        return apply_ladder(m, "b", f, xx, oo)

    def af(xx, oo):
        return apply_ladder(m, "a", f, xx, oo)

    for i, x in enumerate(grid):
        ab_val = apply_ladder(m, "a", bf, x, 0).value
        ba_val = apply_ladder(m, "b", af, x, 0).value
        res[i] = abs(ab_val - ba_val - f(x, 0).value)
    return CommutatorStats(grid, res, float(np.max(res)))

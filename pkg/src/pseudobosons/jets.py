"""Truncated univariate Taylor ("jet") arithmetic.

A jet stores the Taylor coefficients of a function at a real base point,
c_k = f^(k)(x) / k!, up to a fixed truncation order.  All derivative
propagation in this package happens through jets: applying a first-order
ladder operator consumes exactly one order, applying a second-order
Hamiltonian consumes two, and the state recursions consume one order per
level.  Truncation is exact: retained coefficients never depend on the
discarded ones.

Coefficients are complex throughout; real models simply carry zero
imaginary parts.  Conjugating a jet coefficient-wise yields the jet of
x -> conj(f(x)), which is valid because base points and increments are
real.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Jet",
    "JetError",
    "get_max_order",
    "set_max_order",
    "jet_lift",
    "jet_binary",
    "jet_compose",
    "jet_exp",
    "jet_sinh",
    "jet_cosh",
    "jet_tanh",
    "jet_sqrt",
    "jet_powi",
    "jet_hermite",
    "sqrt_factorial",
]

_MAX_ORDER = 40


class JetError(Exception):
    """Raised for invalid jet arithmetic (mismatched jets, singular division,
    or exceeded truncation-order capacity)."""


def get_max_order() -> int:
    return _MAX_ORDER


def set_max_order(order: int) -> None:
    """Raise or lower the global jet-order capacity (default 40)."""
    global _MAX_ORDER
    if order < 0:
        raise ValueError("max order must be nonnegative")
    _MAX_ORDER = int(order)


def _check_order(order: int) -> int:
    order = int(order)
    if order < 0:
        raise JetError("jet order must be nonnegative")
    if order > _MAX_ORDER:
        raise JetError(
            f"jet capacity exceeded: order {order} > max {_MAX_ORDER} "
            "(raise it with jets.set_max_order)"
        )
    return order


class Jet:
    """Taylor coefficients c_0..c_order of a function at a real base point."""

    __slots__ = ("base", "coeffs")

    def __init__(self, base: float, coeffs):
        self.base = float(base)
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size == 0:
            raise JetError("coefficients must be a nonempty 1-d sequence")
        _check_order(c.size - 1)
        self.coeffs = c

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value: complex, base: float, order: int) -> "Jet":
        c = np.zeros(_check_order(order) + 1, dtype=np.complex128)
        c[0] = value
        return cls(base, c)

    @classmethod
    def variable(cls, base: float, order: int) -> "Jet":
        c = np.zeros(_check_order(order) + 1, dtype=np.complex128)
        c[0] = base
        if order >= 1:
            c[1] = 1.0
        return cls(base, c)

    # -- basic queries ------------------------------------------------

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def derivative(self, k: int = 1) -> complex:
        """k-th derivative value, f^(k)(base) = k! * c_k."""
        if k > self.order:
            raise JetError(f"jet of order {self.order} has no derivative {k}")
        return complex(self.coeffs[k]) * math.factorial(k)

    def __repr__(self) -> str:
        return f"Jet(base={self.base!r}, coeffs={self.coeffs.tolist()!r})"

    # -- structural ops -----------------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError("cannot truncate upwards")
        return Jet(self.base, self.coeffs[: order + 1])

    def deriv(self) -> "Jet":
        """Jet of f' at the same base point, one order lower."""
        if self.order == 0:
            raise JetError("insufficient jet order for a derivative")
        k = np.arange(1, self.order + 1)
        return Jet(self.base, self.coeffs[1:] * k)

    def antideriv(self, value_at_base: complex) -> "Jet":
        """Jet of an antiderivative F with F(base) = value_at_base."""
        _check_order(self.order + 1)
        c = np.empty(self.order + 2, dtype=np.complex128)
        c[0] = value_at_base
        c[1:] = self.coeffs / np.arange(1, self.order + 2)
        return Jet(self.base, c)

    def conjugate(self) -> "Jet":
        """Jet of x -> conj(f(x)); valid because increments are real."""
        return Jet(self.base, np.conj(self.coeffs))

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.base != self.base:
                raise JetError(
                    f"mismatched base points: {self.base} vs {other.base}"
                )
            if other.order != self.order:
                raise JetError(
                    f"mismatched orders: {self.order} vs {other.order}"
                )
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Jet.constant(complex(other), self.base, self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.base, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base, -self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.base, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.base, o.coeffs - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Jet(self.base, self.coeffs * complex(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        conv = np.convolve(self.coeffs, o.coeffs)[: self.order + 1]
        return Jet(self.base, conv)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Jet(self.base, self.coeffs / complex(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _div(self, o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _div(o, self)


def _div(a: Jet, b: Jet) -> Jet:
    if b.coeffs[0] == 0:
        raise JetError("division by a jet with zero constant term")
    n = a.order
    out = np.empty(n + 1, dtype=np.complex128)
    out[0] = a.coeffs[0] / b.coeffs[0]
    for k in range(1, n + 1):
        acc = a.coeffs[k] - np.dot(b.coeffs[1 : k + 1], out[k - 1 :: -1][:k])
        out[k] = acc / b.coeffs[0]
    return Jet(a.base, out)


# -- analytic compositions ---------------------------------------------
#
# These use the standard power-series recurrences driven by u' rather than
# a generic Faa di Bruno expansion; each is O(order^2) and exact for the
# retained coefficients.


def jet_exp(u: Jet) -> Jet:
    n = u.order
    f = np.zeros(n + 1, dtype=np.complex128)
    f[0] = np.exp(u.coeffs[0])
    ku = np.arange(n + 1) * u.coeffs
    for k in range(1, n + 1):
        f[k] = np.dot(ku[1 : k + 1], f[:k][::-1]) / k
    return Jet(u.base, f)


def _jet_sinh_cosh(u: Jet) -> tuple[Jet, Jet]:
    n = u.order
    s = np.zeros(n + 1, dtype=np.complex128)
    c = np.zeros(n + 1, dtype=np.complex128)
    s[0] = np.sinh(u.coeffs[0])
    c[0] = np.cosh(u.coeffs[0])
    ku = np.arange(n + 1) * u.coeffs
    for k in range(1, n + 1):
        s[k] = np.dot(ku[1 : k + 1], c[:k][::-1]) / k
        c[k] = np.dot(ku[1 : k + 1], s[:k][::-1]) / k
    return Jet(u.base, s), Jet(u.base, c)


def jet_sinh(u: Jet) -> Jet:
    return _jet_sinh_cosh(u)[0]


def jet_cosh(u: Jet) -> Jet:
    return _jet_sinh_cosh(u)[1]


def jet_tanh(u: Jet) -> Jet:
    s, c = _jet_sinh_cosh(u)
    return s / c


def jet_sqrt(u: Jet) -> Jet:
    if u.coeffs[0] == 0:
        raise JetError("sqrt of a jet with zero constant term")
    n = u.order
    r = np.zeros(n + 1, dtype=np.complex128)
    r[0] = np.sqrt(u.coeffs[0] + 0j)  # principal branch
    for k in range(1, n + 1):
        acc = u.coeffs[k] - np.dot(r[1:k], r[k - 1 : 0 : -1])
        r[k] = acc / (2 * r[0])
    return Jet(u.base, r)


def jet_powi(u: Jet, k: int) -> Jet:
    """Integer power by binary exponentiation; negative k via reciprocal."""
    k = int(k)
    if k < 0:
        return jet_powi(Jet.constant(1.0, u.base, u.order) / u, -k)
    result = Jet.constant(1.0, u.base, u.order)
    square = u
    while k:
        if k & 1:
            result = result * square
        k >>= 1
        if k:
            square = square * square
    return result


def jet_hermite(u: Jet, n: int) -> Jet:
    """Jet of H_n(u) via the three-term recurrence
    H_{k+1}(y) = 2 y H_k(y) - 2 k H_{k-1}(y).

    The recurrence is used instead of expanded monomial coefficients to
    avoid catastrophic cancellation at moderate degree.
    """
    if n < 0:
        raise JetError("Hermite degree must be nonnegative")
    h_prev = Jet.constant(1.0, u.base, u.order)
    if n == 0:
        return h_prev
    two_u = u * 2.0
    h = two_u
    for k in range(1, n):
        h, h_prev = two_u * h - (2.0 * k) * h_prev, h
    return h


_COMPOSE = {
    "exp": jet_exp,
    "sinh": jet_sinh,
    "cosh": jet_cosh,
    "tanh": jet_tanh,
    "sqrt": jet_sqrt,
}


def jet_compose(outer: str, a: Jet, k: int | None = None) -> Jet:
    """Apply a named analytic outer function to a jet.

    ``outer`` is one of exp, sinh, cosh, tanh, sqrt, pow_k, hermite_n;
    the last two take the integer parameter ``k``.
    """
    if outer in _COMPOSE:
        return _COMPOSE[outer](a)
    if outer == "pow_k":
        if k is None:
            raise JetError("pow_k requires the integer exponent k")
        return jet_powi(a, k)
    if outer == "hermite_n":
        if k is None:
            raise JetError("hermite_n requires the integer degree k")
        return jet_hermite(a, k)
    raise JetError(f"unknown composition {outer!r}")


def jet_binary(kind: str, a: Jet, b: Jet) -> Jet:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise JetError(f"unknown binary operation {kind!r}")


def jet_lift(expr, x: float, order: int):
    """Exact Taylor coefficients of a coefficient expression at x.

    ``expr`` is any object exposing ``eval_jet(x, order)``; in practice a
    parsed expression tree (see :mod:`pseudobosons.expressions`).
    """
    return expr.eval_jet(float(x), _check_order(order))


def sqrt_factorial(n: int) -> float:
    """sqrt(n!) computed in log space; safe far beyond n = 170."""
    return math.exp(0.5 * math.lgamma(n + 1.0))

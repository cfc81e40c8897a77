"""Coefficient-function expression language.

The four coefficient functions of a ladder-operator model are small
closed-form expressions of one real variable.  This module provides the
expression trees, a recursive-descent parser for the documented grammar,
a printer whose output reparses to a structurally identical tree, and two
evaluators: an exact jet evaluator (values plus derivatives) and a
vectorized pointwise evaluator for quadrature grids.

Grammar (whitespace insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | 'x' | 'i' | func '(' expr ')' | '(' expr ')'
    func   := exp | sinh | cosh | tanh | sqrt | antideriv

A leading minus is accepted as sugar for ``0 - ...``.  ``antideriv(e)``
denotes the antiderivative of ``e`` vanishing at 0; it is evaluated
numerically unless the model registers a closed form.  An internal
``Deriv`` node (not part of the grammar) represents exact differentiation
of a subtree and is used when a model derives one coefficient from
another.
"""

from __future__ import annotations

import bisect

import numpy as np

from .jets import (
    Jet,
    jet_cosh,
    jet_exp,
    jet_powi,
    jet_sinh,
    jet_sqrt,
    jet_tanh,
)

__all__ = [
    "FunctionExpr",
    "Const",
    "Var",
    "BinOp",
    "Pow",
    "Call",
    "Antideriv",
    "Deriv",
    "ExpressionError",
    "ExpressionSyntaxError",
    "ExpressionDomainError",
    "parse_expr",
    "to_source",
    "same_structure",
]


class ExpressionError(Exception):
    """Base class for expression-language failures."""


class ExpressionSyntaxError(ExpressionError):
    """Malformed source text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ExpressionDomainError(ExpressionError):
    """Evaluation hit a pole or singularity; carries the offending subtree."""

    def __init__(self, message: str, node: "FunctionExpr", x: float):
        super().__init__(f"{message} in '{to_source(node)}' at x = {x}")
        self.node = node
        self.x = x


class FunctionExpr:
    """Base expression node."""

    __slots__ = ()

    def eval_jet(self, x: float, order: int) -> Jet:
        raise NotImplementedError

    def eval_values(self, xs) -> np.ndarray:
        """Vectorized values on a float array (falls back to per-point jets
        for subtrees the fast path cannot handle)."""
        xs = np.asarray(xs, dtype=float)
        try:
            out = self._values(xs)
        except NotImplementedError:
            out = np.array(
                [self.eval_jet(float(x), 0).value for x in np.ravel(xs)],
                dtype=np.complex128,
            ).reshape(xs.shape)
        return np.broadcast_to(out, xs.shape).astype(np.complex128)

    def eval_dual(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized (values, first derivative) via forward-mode rules;
        per-point jets for subtrees without a fast path."""
        xs = np.asarray(xs, dtype=float)
        try:
            v, d = self._dual(xs)
        except NotImplementedError:
            pairs = [self.eval_jet(float(x), 1) for x in np.ravel(xs)]
            v = np.array([p.value for p in pairs],
                         dtype=np.complex128).reshape(xs.shape)
            d = np.array([p.derivative(1) for p in pairs],
                         dtype=np.complex128).reshape(xs.shape)
            return v, d
        shape = xs.shape
        return (np.broadcast_to(v, shape).astype(np.complex128),
                np.broadcast_to(d, shape).astype(np.complex128))

    def _values(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dual(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def __call__(self, xs):
        return self.eval_values(xs)


class Const(FunctionExpr):
    __slots__ = ("value",)

    def __init__(self, value: complex):
        self.value = complex(value)

    def eval_jet(self, x, order):
        return Jet.constant(self.value, x, order)

    def _values(self, xs):
        return np.full(xs.shape, self.value, dtype=np.complex128)

    def _dual(self, xs):
        zero = np.zeros(xs.shape, dtype=np.complex128)
        return np.full(xs.shape, self.value, dtype=np.complex128), zero


class Var(FunctionExpr):
    __slots__ = ()

    def eval_jet(self, x, order):
        return Jet.variable(x, order)

    def _values(self, xs):
        return xs.astype(np.complex128)

    def _dual(self, xs):
        return (xs.astype(np.complex128),
                np.ones(xs.shape, dtype=np.complex128))


class BinOp(FunctionExpr):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: FunctionExpr, right: FunctionExpr):
        if op not in "+-*/":
            raise ValueError(f"unknown operator {op!r}")
        self.op = op
        self.left = left
        self.right = right

    def eval_jet(self, x, order):
        a = self.left.eval_jet(x, order)
        b = self.right.eval_jet(x, order)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b.value == 0:
            raise ExpressionDomainError("division by zero", self.right, x)
        return a / b

    def _values(self, xs):
        a = self.left.eval_values(xs)
        b = self.right.eval_values(xs)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if np.any(b == 0):
            x_bad = float(xs[np.nonzero(b == 0)[0][0]]) if xs.ndim else float(xs)
            raise ExpressionDomainError("division by zero", self.right, x_bad)
        return a / b

    def _dual(self, xs):
        a, da = self.left.eval_dual(xs)
        b, db = self.right.eval_dual(xs)
        if self.op == "+":
            return a + b, da + db
        if self.op == "-":
            return a - b, da - db
        if self.op == "*":
            return a * b, da * b + a * db
        if np.any(b == 0):
            x_bad = float(xs[np.nonzero(b == 0)[0][0]]) if xs.ndim else float(xs)
            raise ExpressionDomainError("division by zero", self.right, x_bad)
        return a / b, (da * b - a * db) / (b * b)


class Pow(FunctionExpr):
    __slots__ = ("base_expr", "exponent")

    def __init__(self, base_expr: FunctionExpr, exponent: int):
        self.base_expr = base_expr
        self.exponent = int(exponent)

    def eval_jet(self, x, order):
        u = self.base_expr.eval_jet(x, order)
        if self.exponent < 0 and u.value == 0:
            raise ExpressionDomainError("zero raised to a negative power",
                                        self.base_expr, x)
        return jet_powi(u, self.exponent)

    def _values(self, xs):
        u = self.base_expr.eval_values(xs)
        if self.exponent < 0 and np.any(u == 0):
            x_bad = float(xs[np.nonzero(u == 0)[0][0]]) if xs.ndim else float(xs)
            raise ExpressionDomainError("zero raised to a negative power",
                                        self.base_expr, x_bad)
        return u ** self.exponent

    def _dual(self, xs):
        u, du = self.base_expr.eval_dual(xs)
        k = self.exponent
        if k < 0 and np.any(u == 0):
            x_bad = float(xs[np.nonzero(u == 0)[0][0]]) if xs.ndim else float(xs)
            raise ExpressionDomainError("zero raised to a negative power",
                                        self.base_expr, x_bad)
        if k == 0:
            return np.ones_like(u), np.zeros_like(u)
        return u ** k, k * u ** (k - 1) * du


_JET_CALLS = {
    "exp": jet_exp,
    "sinh": jet_sinh,
    "cosh": jet_cosh,
    "tanh": jet_tanh,
    "sqrt": jet_sqrt,
}

_VEC_CALLS = {
    "exp": np.exp,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sqrt": lambda v: np.sqrt(v.astype(np.complex128)),
}


class Call(FunctionExpr):
    __slots__ = ("func", "arg")

    def __init__(self, func: str, arg: FunctionExpr):
        if func not in _JET_CALLS:
            raise ValueError(f"unknown function {func!r}")
        self.func = func
        self.arg = arg

    def eval_jet(self, x, order):
        u = self.arg.eval_jet(x, order)
        if self.func == "sqrt" and u.value == 0:
            raise ExpressionDomainError("sqrt at a zero", self.arg, x)
        return _JET_CALLS[self.func](u)

    def _values(self, xs):
        return _VEC_CALLS[self.func](self.arg.eval_values(xs))

    def _dual(self, xs):
        u, du = self.arg.eval_dual(xs)
        if self.func == "exp":
            v = np.exp(u)
            return v, v * du
        if self.func == "sinh":
            return np.sinh(u), np.cosh(u) * du
        if self.func == "cosh":
            return np.cosh(u), np.sinh(u) * du
        if self.func == "tanh":
            v = np.tanh(u)
            return v, (1.0 - v * v) * du
        v = np.sqrt(u.astype(np.complex128))
        return v, du / (2.0 * v)


class Deriv(FunctionExpr):
    """Exact derivative of a subtree (internal node, not in the grammar)."""

    __slots__ = ("arg",)

    def __init__(self, arg: FunctionExpr):
        self.arg = arg

    def eval_jet(self, x, order):
        return self.arg.eval_jet(x, order + 1).deriv()

    # no vectorized fast path: falls back to per-point jets


class Antideriv(FunctionExpr):
    """Antiderivative with value 0 at x = 0, evaluated by cumulative
    adaptive quadrature.

    Scalar values are cached as monotone anchors so that repeated
    evaluations (state generation, root finding on rho) only ever pay for
    short incremental integrals.  The anchor table is grown while a model
    is being set up and is read-only afterwards.
    """

    __slots__ = ("arg", "_anchor_x", "_anchor_v")

    def __init__(self, arg: FunctionExpr):
        self.arg = arg
        self._anchor_x = [0.0]
        self._anchor_v = [0.0 + 0.0j]

    def _integrand(self, xs):
        return self.arg.eval_values(xs)

    def value_at(self, x: float) -> complex:
        from .quad import integrate_line  # deferred: quad imports nothing back

        x = float(x)
        i = bisect.bisect_left(self._anchor_x, x)
        if i < len(self._anchor_x) and self._anchor_x[i] == x:
            return self._anchor_v[i]
        # nearest existing anchor
        candidates = []
        if i > 0:
            candidates.append(i - 1)
        if i < len(self._anchor_x):
            candidates.append(i)
        j = min(candidates, key=lambda k: abs(self._anchor_x[k] - x))
        a, va = self._anchor_x[j], self._anchor_v[j]
        inc = integrate_line(self._integrand, a, x, tol=1e-13).value
        v = va + inc
        self._anchor_x.insert(i, x)
        self._anchor_v.insert(i, v)
        return v

    def eval_jet(self, x, order):
        v = self.value_at(x)
        if order == 0:
            return Jet(x, [v])
        return self.arg.eval_jet(x, order - 1).antideriv(v)

    def _values(self, xs):
        flat = np.ravel(xs)
        out = np.array([self.value_at(float(x)) for x in flat],
                       dtype=np.complex128)
        return out.reshape(np.asarray(xs).shape)

    def _dual(self, xs):
        return self._values(xs), self.arg.eval_values(xs)


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

_FUNCS = ("exp", "sinh", "cosh", "tanh", "sqrt", "antideriv")


class _Scanner:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def _line_col(self, pos: int) -> tuple[int, int]:
        upto = self.src[:pos]
        line = upto.count("\n") + 1
        col = pos - (upto.rfind("\n") + 1) + 1
        return line, col

    def error(self, message: str, pos: int | None = None):
        line, col = self._line_col(self.pos if pos is None else pos)
        raise ExpressionSyntaxError(message, line, col)

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def match(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.match(ch):
            got = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {got!r}")

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        src = self.src
        n = len(src)
        while self.pos < n and src[self.pos].isdigit():
            self.pos += 1
        if self.pos < n and src[self.pos] == ".":
            self.pos += 1
            while self.pos < n and src[self.pos].isdigit():
                self.pos += 1
        if self.pos == start or src[start : self.pos] == ".":
            self.error("expected a number", start)
        if self.pos < n and src[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < n and src[self.pos] in "+-":
                self.pos += 1
            if self.pos < n and src[self.pos].isdigit():
                while self.pos < n and src[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # not an exponent after all
        return float(src[start : self.pos])

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.src) and self.src[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.error("expected an integer exponent", start)
        return int(self.src[start : self.pos])

    def identifier(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isalpha():
            self.pos += 1
        return self.src[start : self.pos]


def parse_expr(src: str) -> FunctionExpr:
    """Parse source text into an expression tree.

    Raises :class:`ExpressionSyntaxError` with line/column on malformed
    input and on unknown identifiers.
    """
    sc = _Scanner(src)
    tree = _parse_sum(sc)
    sc.skip_ws()
    if sc.pos != len(sc.src):
        sc.error(f"unexpected trailing input {sc.src[sc.pos]!r}")
    return tree


def _parse_sum(sc: _Scanner) -> FunctionExpr:
    if sc.peek() == "-":  # leading minus: sugar for 0 - term
        sc.take()
        node = BinOp("-", Const(0.0), _parse_term(sc))
    else:
        node = _parse_term(sc)
    while True:
        ch = sc.peek()
        if ch in ("+", "-"):
            sc.take()
            node = BinOp(ch, node, _parse_term(sc))
        else:
            return node


def _parse_term(sc: _Scanner) -> FunctionExpr:
    node = _parse_factor(sc)
    while True:
        ch = sc.peek()
        if ch in ("*", "/"):
            sc.take()
            node = BinOp(ch, node, _parse_factor(sc))
        else:
            return node


def _parse_factor(sc: _Scanner) -> FunctionExpr:
    node = _parse_base(sc)
    if sc.peek() == "^":
        sc.take()
        node = Pow(node, sc.integer())
    return node


def _parse_base(sc: _Scanner) -> FunctionExpr:
    ch = sc.peek()
    if ch == "":
        sc.error("unexpected end of input")
    if ch == "(":
        sc.take()
        node = _parse_sum(sc)
        sc.expect(")")
        return node
    if ch.isdigit() or ch == ".":
        return Const(sc.number())
    if ch.isalpha():
        start = sc.pos
        name = sc.identifier()
        if name == "x":
            return Var()
        if name == "i":
            return Const(1j)
        if name in _FUNCS:
            sc.expect("(")
            arg = _parse_sum(sc)
            sc.expect(")")
            if name == "antideriv":
                return Antideriv(arg)
            return Call(name, arg)
        sc.error(f"unknown identifier {name!r}", start)
    sc.error(f"unexpected character {ch!r}")


# ----------------------------------------------------------------------
# Printer and structural comparison
# ----------------------------------------------------------------------

def _num_to_source(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return repr(int(v))
    return repr(v)


def to_source(expr: FunctionExpr) -> str:
    """Grammar-conformant source for a tree.

    For any tree the parser can produce, reparsing the printed source
    yields a structurally identical tree.  Programmatically built trees
    holding negative or complex constants print to valid, value-equal
    source (the grammar has no negative literals, so structure is not
    preserved for those).  ``Deriv`` nodes print for diagnostics only and
    do not reparse.
    """
    return _print(expr, 0)


def _print(e: FunctionExpr, parent_prec: int) -> str:
    # precedence: sum 1, term 2, power 3, atom 4
    if isinstance(e, Const):
        v = e.value
        if v.imag == 0:
            s = _num_to_source(v.real)
            prec = 4 if v.real >= 0 else 1
        elif v.real == 0 and v.imag == 1:
            s, prec = "i", 4
        elif v.real == 0:
            s = f"{_num_to_source(v.imag)}*i"
            prec = 2 if v.imag > 0 else 1
        else:
            sign = "+" if v.imag >= 0 else "-"
            s = (f"{_num_to_source(v.real)} {sign} "
                 f"{_num_to_source(abs(v.imag))}*i")
            prec = 1
        return f"({s})" if prec < parent_prec else s
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Call):
        return f"{e.func}({_print(e.arg, 0)})"
    if isinstance(e, Antideriv):
        return f"antideriv({_print(e.arg, 0)})"
    if isinstance(e, Deriv):
        return f"deriv({_print(e.arg, 0)})"
    if isinstance(e, Pow):
        base = _print(e.base_expr, 4)
        if isinstance(e.base_expr, Pow):  # '^' does not self-nest
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, BinOp):
        if e.op in "+-":
            prec = 1
            s = f"{_print(e.left, 1)} {e.op} {_print(e.right, 2)}"
        else:
            prec = 2
            s = f"{_print(e.left, 2)}{e.op}{_print(e.right, 3)}"
        return f"({s})" if prec < parent_prec else s
    raise TypeError(f"not an expression node: {e!r}")


def same_structure(a: FunctionExpr, b: FunctionExpr) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Const):
        return a.value == b.value
    if isinstance(a, Var):
        return True
    if isinstance(a, BinOp):
        return (a.op == b.op and same_structure(a.left, b.left)
                and same_structure(a.right, b.right))
    if isinstance(a, Pow):
        return (a.exponent == b.exponent
                and same_structure(a.base_expr, b.base_expr))
    if isinstance(a, Call):
        return a.func == b.func and same_structure(a.arg, b.arg)
    if isinstance(a, (Antideriv, Deriv)):
        return same_structure(a.arg, b.arg)
    return False

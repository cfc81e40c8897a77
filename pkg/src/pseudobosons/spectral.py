"""Non-self-adjoint Hamiltonians H = b a and H^dag = a^dag b^dag.

Both factorizations are second-order differential operators

    H      = -k2(x) d^2/dx^2 + k1(x) d/dx + k0(x)
    H^dag  = -q2(x) d^2/dx^2 + q1(x) d/dx + q0(x)

with coefficients assembled from the model's coefficient functions by jet
arithmetic at each evaluation point (no symbolic expansion, which would
swell badly for rational alphas):

    k2 = alpha_a alpha_b
    k1 = alpha_a beta_b - alpha_b beta_a - 2 alpha_a alpha_b'
    k0 = beta_a beta_b - (beta_a alpha_b)'

    q2 = conj(alpha_a alpha_b)
    q1 = conj(alpha_b beta_a - alpha_a beta_b - 2 alpha_b alpha_a')
    q0 = conj(beta_a beta_b - (beta_b alpha_a)')

phi_n are eigenfunctions of H and psi_n of H^dag, with eigenvalue n; the
partner product ab acts on phi_n with eigenvalue n + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .jets import Jet
from .model import ModelError, PBModel, apply_ladder, build_builtin
from .states import StateFamily

__all__ = [
    "HamiltonianCoeffs",
    "hamiltonian_coeffs",
    "apply_hamiltonian",
    "eigen_residual",
    "hsusy_shift_check",
    "builtin_hamiltonian_crosscheck",
    "PRINTED_HAMILTONIANS",
]

JetFn = Callable[[float, int], Jet]


@dataclass
class HamiltonianCoeffs:
    """Jet-backed coefficient evaluators for one side."""

    side: str  # 'H' | 'H_dag'
    c2: JetFn
    c1: JetFn
    c0: JetFn

    def values(self, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        xs = np.asarray(xs, dtype=float)
        out = []
        for fn in (self.c2, self.c1, self.c0):
            out.append(np.array([fn(float(x), 0).value for x in xs.ravel()],
                                dtype=np.complex128).reshape(xs.shape))
        return tuple(out)


def hamiltonian_coeffs(m: PBModel, side: str) -> HamiltonianCoeffs:
    if side == "H":
        def c2(x, order):
            return (m.alpha_a.eval_jet(x, order)
                    * m.alpha_b.eval_jet(x, order))

        def c1(x, order):
            aa = m.alpha_a.eval_jet(x, order)
            ab1 = m.alpha_b.eval_jet(x, order + 1)
            return (aa * m.beta_b.eval_jet(x, order)
                    - ab1.truncate(order) * m.beta_a.eval_jet(x, order)
                    - 2.0 * aa * ab1.deriv())

        def c0(x, order):
            prod = (m.beta_a.eval_jet(x, order + 1)
                    * m.alpha_b.eval_jet(x, order + 1))
            return (m.beta_a.eval_jet(x, order) * m.beta_b.eval_jet(x, order)
                    - prod.deriv())

        return HamiltonianCoeffs("H", c2, c1, c0)

    if side == "H_dag":
        def q2(x, order):
            return (m.alpha_a.eval_jet(x, order)
                    * m.alpha_b.eval_jet(x, order)).conjugate()

        def q1(x, order):
            ab = m.alpha_b.eval_jet(x, order)
            aa1 = m.alpha_a.eval_jet(x, order + 1)
            inner = (ab * m.beta_a.eval_jet(x, order)
                     - aa1.truncate(order) * m.beta_b.eval_jet(x, order)
                     - 2.0 * ab * aa1.deriv())
            return inner.conjugate()

        def q0(x, order):
            prod = (m.beta_b.eval_jet(x, order + 1)
                    * m.alpha_a.eval_jet(x, order + 1))
            inner = (m.beta_a.eval_jet(x, order) * m.beta_b.eval_jet(x, order)
                     - prod.deriv())
            return inner.conjugate()

        return HamiltonianCoeffs("H_dag", q2, q1, q0)

    raise ModelError(f"side must be 'H' or 'H_dag', not {side!r}")


def apply_hamiltonian(m: PBModel, side: str, f: JetFn, x: float) -> complex:
    """-c2 f'' + c1 f' + c0 f at x; agrees with composing the two ladder
    factors (b after a, or a^dag after b^dag)."""
    coeffs = hamiltonian_coeffs(m, side)
    fj = f(x, 2)
    return (-coeffs.c2(x, 0).value * fj.derivative(2)
            + coeffs.c1(x, 0).value * fj.derivative(1)
            + coeffs.c0(x, 0).value * fj.value)


_TAIL_FLOOR = 1e-250  # below this |state| the residual is 0/0 noise


def eigen_residual(m: PBModel, side: str, n: int, grid) -> float:
    """Relative sup-norm residual of the eigenvalue equation at level n:
    sup |(H - n) phi_n| / sup |phi_n| (psi_n and H^dag on the dagger
    side), over the effective support of the state."""
    grid = np.asarray(grid, dtype=float)
    fam = StateFamily(m, "phi" if side == "H" else "psi", max_n=n)
    coeffs = hamiltonian_coeffs(m, side)
    res = np.zeros(grid.size)
    mag = np.zeros(grid.size)
    for i, x in enumerate(grid):
        fj = fam.jet(n, float(x), 2)
        mag[i] = abs(fj.value)
        if mag[i] < _TAIL_FLOOR:
            continue
        h_val = (-coeffs.c2(float(x), 0).value * fj.derivative(2)
                 + coeffs.c1(float(x), 0).value * fj.derivative(1)
                 + coeffs.c0(float(x), 0).value * fj.value)
        res[i] = abs(h_val - n * fj.value)
    sup = float(np.max(mag))
    if sup == 0.0:
        raise ModelError(f"state level {n} vanished on the whole grid")
    return float(np.max(res)) / sup


def hsusy_shift_check(m: PBModel, n: int, grid) -> float:
    """Relative sup residual of (a b) phi_n = (n + 1) phi_n, the partner
    product whose spectrum is shifted up by one unit."""
    grid = np.asarray(grid, dtype=float)
    fam = StateFamily(m, "phi", max_n=n)
    src = fam.jet_fn(n)

    def b_src(xx, oo):
        return apply_ladder(m, "b", src, xx, oo)

    res = np.zeros(grid.size)
    mag = np.zeros(grid.size)
    for i, x in enumerate(grid):
        mag[i] = abs(fam.jet(n, float(x), 0).value)
        if mag[i] < _TAIL_FLOOR:
            continue
        val = apply_ladder(m, "a", b_src, float(x), 0).value
        res[i] = abs(val - (n + 1) * fam.jet(n, float(x), 0).value)
    sup = float(np.max(mag))
    if sup == 0.0:
        raise ModelError(f"state level {n} vanished on the whole grid")
    return float(np.max(res)) / sup


# ----------------------------------------------------------------------
# Cross-checks against the explicitly printed operator coefficients
# ----------------------------------------------------------------------

def _printed_constant_k(k: float):
    def h(xs):
        one = np.ones_like(xs)
        return one, k - xs, k * xs - 1.0

    def h_dag(xs):
        one = np.ones_like(xs)
        return one, xs - k, k * xs

    return h, h_dag


def _printed_example1():
    def h(xs):
        d = 1.0 + xs * xs
        k2 = 1.0 / d ** 2
        k1 = -xs * (-3.0 + 7.0 * xs**2 + 5.0 * xs**4 + xs**6) / (3.0 * d**3)
        k0 = np.full_like(xs, -1.0)
        return k2, k1, k0

    def h_dag(xs):
        d = 1.0 + xs * xs
        q2 = 1.0 / d ** 2
        q1 = xs * (21.0 + 7.0 * xs**2 + 5.0 * xs**4 + xs**6) / (3.0 * d**3)
        q0 = -2.0 * (-3.0 + 18.0 * xs**2 + 7.0 * xs**4 + 5.0 * xs**6
                     + xs**8) / (3.0 * d**4)
        return q2, q1, q0

    return h, h_dag


def _printed_example2():
    def h(xs):
        ch = np.cosh(xs)
        sech2 = 1.0 / ch**2
        k2 = 0.5 * sech2
        k1 = 0.5 * (sech2 - 2.0) * np.tanh(xs)
        k0 = np.full_like(xs, -1.0)
        return k2, k1, k0

    def h_dag(xs):
        ch = np.cosh(xs)
        sech2 = 1.0 / ch**2
        q2 = 0.5 * sech2
        q1 = (1.5 * sech2 + 1.0) * np.tanh(xs)
        q0 = -(1.0 / (8.0 * ch**4)) * (-9.0 + 4.0 * np.cosh(2.0 * xs)
                                       + np.cosh(4.0 * xs))
        return q2, q1, q0

    return h, h_dag


PRINTED_HAMILTONIANS = ("example1", "example2", "constant_k")


def builtin_hamiltonian_crosscheck(name: str, *, k: float = 1.0,
                                   grid=None) -> float:
    """Maximum pointwise deviation, over all six coefficients of H and
    H^dag, between the explicitly printed operators and the ones derived
    from the coefficient formulas."""
    if grid is None:
        grid = np.linspace(-3.0, 3.0, 241)
    grid = np.asarray(grid, dtype=float)
    if name == "constant_k":
        m = build_builtin("constant_alpha", alpha_a=1.0, alpha_b=1.0, k=k)
        printed_h, printed_hdag = _printed_constant_k(k)
    elif name == "example1":
        m = build_builtin("example1")
        printed_h, printed_hdag = _printed_example1()
    elif name == "example2":
        m = build_builtin("example2")
        printed_h, printed_hdag = _printed_example2()
    else:
        raise ModelError(
            f"no printed Hamiltonian for {name!r}; known: {PRINTED_HAMILTONIANS}"
        )
    worst = 0.0
    for side, printed in (("H", printed_h), ("H_dag", printed_hdag)):
        derived = hamiltonian_coeffs(m, side).values(grid)
        for got, want in zip(derived, printed(grid)):
            worst = max(worst, float(np.max(np.abs(got - want))))
    return worst

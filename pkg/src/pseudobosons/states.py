"""Biorthogonal eigenfunction families.

The lowering vacuum phi_0 (killed by a) and the raising-side vacuum psi_0
(killed by b^dag) generate two families

    phi_n = pi_n phi_0 / sqrt(n!),     psi_n = sigma_n psi_0 / sqrt(n!),

where the polynomial-like factors satisfy first-order recursions driven
by theta = alpha_a beta_b + alpha_b beta_a:

    pi_n    = (theta/alpha_a - alpha_b') pi_{n-1}    - alpha_b pi_{n-1}'
    sigma_n = conj(theta/alpha_b - alpha_a') sigma_{n-1}
              - conj(alpha_a) sigma_{n-1}'

with pi_0 = sigma_0 = 1.  For constant-alpha and proportional-alpha
models both sequences collapse to Hermite polynomials of a rescaled
argument; the recursive and closed-form evaluators are kept as
independent code paths and their agreement is part of the test suite.

Note the sigma_n sequence multiplies psi_0 (not phi_0): the recursion is
exactly what repeated application of a^dag to psi_0 produces, which the
n = 1 case shows directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import quad
from .jets import Jet, jet_hermite, sqrt_factorial
from .model import (
    ConstantAlphaFlavor,
    ModelError,
    PBModel,
    ProportionalFlavor,
    apply_ladder,
)
from .quad import compatibility_form, hermite_value

__all__ = [
    "StateFamily",
    "LadderResiduals",
    "vacuum",
    "pi_sigma_recursive",
    "pi_sigma_closed",
    "eval_state",
    "fix_normalization",
    "verify_ladder",
    "pair_envelope",
]


def vacuum(m: PBModel, side: str, x: float, order: int) -> Jet:
    """Jet of the unnormalized vacuum: phi side solves a phi_0 = 0, psi
    side solves b^dag psi_0 = 0."""
    if side == "phi":
        return m.phi_vacuum_jet(x, order)
    if side == "psi":
        return m.psi_vacuum_jet(x, order)
    raise ModelError(f"side must be 'phi' or 'psi', not {side!r}")


# ----------------------------------------------------------------------
# pi_n / sigma_n
# ----------------------------------------------------------------------

def _recursion_coefficients(m: PBModel, side: str, x: float,
                            order: int) -> tuple[Jet, Jet]:
    """Jets of the two recursion coefficients at the given order:

        pi side:    lead = theta/alpha_a - alpha_b',  damp = alpha_b
        sigma side: lead = conj(theta/alpha_b - alpha_a'),
                    damp = conj(alpha_a)

    For constant-alpha and proportional flavors these expressions are
    simplified through the flavor's defining constraints (theta = x + k,
    respectively beta_a = rho and beta_b = alpha_b') before evaluation.
    The simplification matters numerically: the raw quotient leaves
    eps-size residue in Taylor coefficients that are exactly zero, and
    the per-level derivative in the recursion amplifies such residue
    factorially by the time it reaches the value slot.
    """
    flavor = m.flavor
    if isinstance(flavor, ConstantAlphaFlavor):
        if side == "pi":
            lead = (Jet.variable(x, order) + flavor.k) / flavor.alpha_a
            damp = Jet.constant(flavor.alpha_b, x, order)
        else:
            lead = ((Jet.variable(x, order) + flavor.k.conjugate())
                    / flavor.alpha_b.conjugate())
            damp = Jet.constant(flavor.alpha_a.conjugate(), x, order)
        return lead, damp
    if isinstance(flavor, ProportionalFlavor) and m.rho is not None:
        rho = m.rho.eval_jet(x, order)
        ab = m.alpha_b.eval_jet(x, order)
        if side == "pi":
            return rho * (1.0 / flavor.ratio), ab
        return rho, ab * flavor.ratio  # real alpha: conjugation is a no-op
    if side == "pi":
        ab = m.alpha_b.eval_jet(x, order + 1)
        lead = (m.theta_jet(x, order) / m.alpha_a.eval_jet(x, order)
                - ab.deriv())
        return lead, ab.truncate(order)
    aa = m.alpha_a.eval_jet(x, order + 1)
    lead = (m.theta_jet(x, order) / m.alpha_b.eval_jet(x, order)
            - aa.deriv()).conjugate()
    return lead, aa.truncate(order).conjugate()


def pi_sigma_recursive(m: PBModel, side: str, n: int, x: float,
                       order: int) -> Jet:
    """Recursive evaluation; level k is computed at order (order + n - k),
    so one derivative order is spent per level."""
    if side not in ("pi", "sigma"):
        raise ModelError(f"side must be 'pi' or 'sigma', not {side!r}")
    if n < 0:
        raise ModelError("n must be nonnegative")
    top = order + n
    out = Jet.constant(1.0, x, top)
    if n == 0:
        return out
    lead, damp = _recursion_coefficients(m, side, x, top - 1)
    for k in range(1, n + 1):
        p = top - k
        out = (lead.truncate(p) * out.truncate(p)
               - damp.truncate(p) * out.deriv().truncate(p))
    return out


def _principal_power_sqrt(base: complex, n: int) -> complex:
    """sqrt(base**n) with the principal square root."""
    return cmath.sqrt(base ** n)


def pi_sigma_closed(m: PBModel, side: str, n: int, x: float,
                    order: int) -> Jet:
    """Hermite closed forms.

    constant_alpha:   pi_n    = sqrt((alpha_b/(2 alpha_a))^n)
                                 * H_n((x+k)/sqrt(2 alpha_a alpha_b))
                      sigma_n = sqrt((conj(alpha_a)/(2 conj(alpha_b)))^n)
                                 * H_n((x+conj(k))/sqrt(2 conj(alpha_a alpha_b)))
    proportional c:   pi_n    = (2c)^(-n/2) H_n(rho(x)/sqrt(2c))
                      sigma_n = (c/2)^(+n/2) H_n(rho(x)/sqrt(2c))

    Complex square roots are principal.  Only these flavors carry
    closed forms; anything else must use the recursive evaluator.
    """
    flavor = m.flavor
    if isinstance(flavor, ConstantAlphaFlavor):
        if side == "pi":
            aa, ab, k = flavor.alpha_a, flavor.alpha_b, flavor.k
        elif side == "sigma":
            aa = flavor.alpha_b.conjugate()
            ab = flavor.alpha_a.conjugate()
            k = flavor.k.conjugate()
        else:
            raise ModelError(f"side must be 'pi' or 'sigma', not {side!r}")
        pref = _principal_power_sqrt(ab / (2.0 * aa), n)
        scale = 1.0 / cmath.sqrt(2.0 * aa * ab)
        arg = (Jet.variable(x, order) + k) * scale
        return jet_hermite(arg, n) * pref
    if isinstance(flavor, ProportionalFlavor):
        if side not in ("pi", "sigma"):
            raise ModelError(f"side must be 'pi' or 'sigma', not {side!r}")
        if m.rho is None:
            raise ModelError("proportional model lacks a rho expression")
        c = flavor.ratio
        w = m.rho.eval_jet(x, order) * (1.0 / math.sqrt(2.0 * c))
        pref = (2.0 * c) ** (-0.5 * n) if side == "pi" else (0.5 * c) ** (0.5 * n)
        return jet_hermite(w, n) * pref
    raise ModelError(
        f"no closed form for flavor {flavor.kind!r}; use pi_sigma_recursive"
    )


def _has_closed_form(m: PBModel) -> bool:
    return isinstance(m.flavor, (ConstantAlphaFlavor, ProportionalFlavor))


# ----------------------------------------------------------------------
# Families
# ----------------------------------------------------------------------

@dataclass
class StateFamily:
    """Lazily evaluated phi- or psi-side family.

    The phi side carries normalization N_phi = 1; the psi side carries
    N_psi = conj(norm_product) once the model's normalization has been
    fixed, so that conj(N_psi) N_phi equals the stored product.
    """

    model: PBModel
    side: str  # 'phi' | 'psi'
    max_n: int = 20

    def __post_init__(self):
        if self.side not in ("phi", "psi"):
            raise ModelError(f"side must be 'phi' or 'psi', not {self.side!r}")

    @property
    def normalization(self) -> complex:
        if self.side == "phi":
            return 1.0 + 0.0j
        prod = self.model.norm_product
        return 1.0 + 0.0j if prod is None else complex(prod).conjugate()

    @property
    def _poly_side(self) -> str:
        return "pi" if self.side == "phi" else "sigma"

    def _check_n(self, n: int):
        if not 0 <= n <= self.max_n:
            raise ModelError(f"n = {n} outside 0..max_n = {self.max_n}")

    def jet(self, n: int, x: float, order: int) -> Jet:
        self._check_n(n)
        if _has_closed_form(self.model):
            poly = pi_sigma_closed(self.model, self._poly_side, n, x, order)
        else:
            poly = pi_sigma_recursive(self.model, self._poly_side, n, x, order)
        vac = vacuum(self.model, self.side, x, order)
        return poly * vac * (self.normalization / sqrt_factorial(n))

    def jet_fn(self, n: int) -> Callable[[float, int], Jet]:
        self._check_n(n)
        return lambda x, order: self.jet(n, x, order)

    def values_fn(self, n: int) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized pointwise evaluator (closed form when available)."""
        self._check_n(n)
        m = self.model
        norm = self.normalization / sqrt_factorial(n)
        flavor = m.flavor
        if isinstance(flavor, ConstantAlphaFlavor):
            if self.side == "phi":
                aa, ab, k = flavor.alpha_a, flavor.alpha_b, flavor.k
            else:
                aa = flavor.alpha_b.conjugate()
                ab = flavor.alpha_a.conjugate()
                k = flavor.k.conjugate()
            pref = norm * _principal_power_sqrt(ab / (2.0 * aa), n)
            scale = 1.0 / cmath.sqrt(2.0 * aa * ab)
            vac = (m.phi_vacuum_values if self.side == "phi"
                   else m.psi_vacuum_values)

            def values(xs, _pref=pref, _scale=scale, _k=k, _vac=vac):
                xs = np.asarray(xs, dtype=float)
                return (_pref * hermite_value(n, (xs + _k) * _scale)
                        * _vac(xs))

            return values
        if isinstance(flavor, ProportionalFlavor) and m.rho is not None:
            c = flavor.ratio
            pref = norm * ((2.0 * c) ** (-0.5 * n) if self.side == "phi"
                           else (0.5 * c) ** (0.5 * n))
            scale = 1.0 / math.sqrt(2.0 * c)
            vac = (m.phi_vacuum_values if self.side == "phi"
                   else m.psi_vacuum_values)

            def values(xs, _pref=pref, _scale=scale, _vac=vac):
                xs = np.asarray(xs, dtype=float)
                w = quad.rho_values(self.model, xs) * _scale
                return _pref * hermite_value(n, w) * _vac(xs)

            return values

        def values(xs):
            xs = np.asarray(xs, dtype=float)
            return np.array([self.jet(n, float(x), 0).value for x in xs.ravel()],
                            dtype=np.complex128).reshape(xs.shape)

        return values

    def values(self, n: int, xs) -> np.ndarray:
        return self.values_fn(n)(np.asarray(xs, dtype=float))


def eval_state(fam: StateFamily, n: int, x: float, order: int) -> Jet:
    """phi_n or psi_n as a jet, including the 1/sqrt(n!) factor and the
    family normalization."""
    return fam.jet(n, x, order)


# ----------------------------------------------------------------------
# Normalization and envelopes
# ----------------------------------------------------------------------

def pair_envelope(m: PBModel, degree: int) -> Optional[Callable[[float], float]]:
    """Decay envelope for |psi_m(x) phi_n(x)|-type integrands with
    m + n <= degree; None when the model has no closed-form structure to
    exploit (the integrator then samples the integrand itself)."""
    if not _has_closed_form(m):
        return None
    flavor = m.flavor

    def envelope(x: float) -> float:
        xs = np.array([float(x)])
        base = abs(complex(m.phi_vacuum_values(xs)[0])
                   * complex(m.psi_vacuum_values(xs)[0]))
        if isinstance(flavor, ConstantAlphaFlavor):
            y = (x + flavor.k) / cmath.sqrt(2.0 * flavor.alpha_a * flavor.alpha_b)
        else:
            y = quad.rho_values(m, xs)[0] / math.sqrt(2.0 * flavor.ratio)
        return base * max(1.0, 2.0 * abs(y)) ** degree

    return envelope


def fix_normalization(m: PBModel) -> complex:
    """Fix conj(N_psi) * N_phi = 1 / <psi_0, phi_0> (computed with unit
    constants) and store it on the model."""
    try:
        res = compatibility_form(
            m, m.psi_vacuum_values, m.phi_vacuum_values,
            envelope=pair_envelope(m, 0),
        )
    except quad.QuadratureError as exc:
        raise ModelError(f"vacuum pairing diverges: {exc}") from exc
    overlap = res.value
    if overlap == 0 or not np.isfinite(abs(overlap)):
        raise ModelError(f"vacuum pairing is degenerate: {overlap}")
    m.norm_product = 1.0 / overlap
    return m.norm_product


# ----------------------------------------------------------------------
# Ladder relations
# ----------------------------------------------------------------------

@dataclass
class LadderResiduals:
    """Relative sup-norm residuals of the four ladder relations at level n:
    b phi_n = sqrt(n+1) phi_{n+1}, a phi_n = sqrt(n) phi_{n-1},
    a^dag psi_n = sqrt(n+1) psi_{n+1}, b^dag psi_n = sqrt(n) psi_{n-1}."""

    raise_phi: float
    lower_phi: float
    raise_psi: float
    lower_psi: float

    @property
    def max(self) -> float:
        return max(self.raise_phi, self.lower_phi,
                   self.raise_psi, self.lower_psi)


def verify_ladder(phi_fam: StateFamily, psi_fam: StateFamily, n: int,
                  grid) -> LadderResiduals:
    grid = np.asarray(grid, dtype=float)
    m = phi_fam.model

    def sup_residual(fam, op, target_scale):
        src = fam.jet_fn(n)
        tgt_n = n + 1 if target_scale == "up" else n - 1
        scale = math.sqrt(n + 1) if target_scale == "up" else math.sqrt(max(n, 0))
        res = np.empty(grid.size)
        ref = np.empty(grid.size)
        for i, x in enumerate(grid):
            applied = apply_ladder(m, op, src, x, 0).value
            if tgt_n < 0:
                target = 0.0
            else:
                target = scale * fam.jet(tgt_n, x, 0).value
            res[i] = abs(applied - target)
            ref[i] = abs(fam.jet(n, x, 0).value)
        return float(np.max(res) / max(np.max(ref), 1e-300))

    return LadderResiduals(
        raise_phi=sup_residual(phi_fam, "b", "up"),
        lower_phi=sup_residual(phi_fam, "a", "down"),
        raise_psi=sup_residual(psi_fam, "a_dag", "up"),
        lower_psi=sup_residual(psi_fam, "b_dag", "down"),
    )

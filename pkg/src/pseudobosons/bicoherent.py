"""Weak bi-coherent states and the general growth-profile utilities.

A weak bi-coherent state is a linear functional acting on compactly
supported smooth test functions through a coherent series over one of the
two families:

    <Phi(z), g> = exp(-|z|^2/2) sum_n conj(z)^n / sqrt(n!) <phi_n, g>
    <Psi(z), g> = exp(-|z|^2/2) sum_n conj(z)^n / sqrt(n!) <psi_n, g>

All model-bound operations here use the pseudo-bosonic ladder sequence
alpha_n = sqrt(n); the :class:`GrowthProfile` utilities keep the general
increasing-sequence theory available on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import quad
from .jets import sqrt_factorial
from .model import ModelError, PBModel, ProportionalFlavor
from .quad import TestFunction, integrate_line

__all__ = [
    "GrowthProfile",
    "coherent_norm",
    "convergence_radius",
    "moment_check",
    "WeakStateQuery",
    "TransformedTestFunction",
    "PairingSeries",
    "weak_pairing",
    "EigenRelationResult",
    "eigen_relation_residual",
    "ResolutionResult",
    "resolution_of_identity",
]


# ----------------------------------------------------------------------
# Growth profiles (general increasing ladder sequences)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthProfile:
    """Data controlling convergence of generalized coherent series.

    ``alpha`` maps n to the ladder coefficient alpha_n with
    0 = alpha_0 < alpha_1 < ...; ``alpha_bar`` is its limit (may be
    inf).  The norm-growth constants bound the two families as
    ||state_n|| <= A r^n M_n with lim M_n / M_{n+1} given by ``m_phi`` /
    ``m_psi``.
    """

    alpha: Callable[[int], float]
    alpha_bar: float = math.inf
    a_phi: float = 1.0
    a_psi: float = 1.0
    r_phi: float = 1.0
    r_psi: float = 1.0
    m_phi: float = 1.0
    m_psi: float = 1.0
    m_seq_phi: Optional[Callable[[int], float]] = None
    m_seq_psi: Optional[Callable[[int], float]] = None

    def __post_init__(self):
        if self.alpha(0) != 0.0:
            raise ValueError("alpha_0 must be 0")
        probe = [self.alpha(k) for k in range(min(40, 1000))]
        if any(b <= a for a, b in zip(probe, probe[1:])):
            raise ValueError("alpha_n must be strictly increasing")
        for name in ("a_phi", "a_psi", "r_phi", "r_psi"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    def alpha_factorial_sq(self, k: int) -> float:
        """(alpha_k!)^2 = (alpha_1 ... alpha_k)^2, computed in log space."""
        if k == 0:
            return 1.0
        return math.exp(2.0 * sum(math.log(self.alpha(j))
                                  for j in range(1, k + 1)))

    @classmethod
    def pseudo_bosonic(cls, **overrides) -> "GrowthProfile":
        """alpha_n = sqrt(n); (alpha_k!)^2 = k! and the radius is
        infinite whenever both norm-ratio limits are nonzero."""
        return cls(alpha=math.sqrt, alpha_bar=math.inf, **overrides)

    @classmethod
    def linear(cls, **overrides) -> "GrowthProfile":
        """alpha_n = n, so (alpha_k!)^2 = (k!)^2."""
        return cls(alpha=float, alpha_bar=math.inf, **overrides)


def convergence_radius(profile: GrowthProfile) -> float:
    """alpha_bar * min(1, m_phi / r_phi, m_psi / r_psi); infinite exactly
    when alpha_bar is infinite and both ratios are positive."""
    ratio = min(1.0, profile.m_phi / profile.r_phi,
                profile.m_psi / profile.r_psi)
    if math.isinf(profile.alpha_bar):
        return math.inf if ratio > 0 else 0.0
    return profile.alpha_bar * ratio


def coherent_norm(z_abs: float, profile: GrowthProfile,
                  *, tol: float = 1e-16, max_terms: int = 100_000) -> float:
    """N(|z|) = (sum_k |z|^{2k} / (alpha_k!)^2)^(-1/2).

    For alpha_k = sqrt(k) the sum is exp(|z|^2) and N = exp(-|z|^2/2).
    """
    z_abs = abs(float(z_abs))
    radius = convergence_radius(profile)
    if z_abs >= radius:
        raise ValueError(
            f"|z| = {z_abs} outside the convergence disc (radius {radius})"
        )
    total = 1.0
    term = 1.0
    for k in range(1, max_terms):
        ak = profile.alpha(k)
        term *= (z_abs / ak) ** 2
        total += term
        if term < tol * total:
            break
    else:
        raise ValueError("coherent-norm series did not converge in budget")
    return total ** -0.5


def moment_check(radial_density: Callable[[np.ndarray], np.ndarray],
                 profile: GrowthProfile, k_max: int,
                 *, radius: Optional[float] = None,
                 tol: float = 1e-13) -> np.ndarray:
    """Deviations integral(r^{2k} dlambda(r)) - (alpha_k!)^2 / (2 pi) for
    k = 0..k_max, where dlambda(r) = radial_density(r) dr on [0, radius)."""
    if radius is None:
        radius = convergence_radius(profile)
    upper = None if math.isinf(radius) else radius
    out = np.empty(k_max + 1)
    for k in range(k_max + 1):
        val = integrate_line(
            lambda r, _k=k: radial_density(r) * r ** (2 * _k),
            0.0, upper, tol=tol, rtol=tol,
        ).value
        out[k] = val.real - profile.alpha_factorial_sq(k) / (2.0 * math.pi)
    return out


# ----------------------------------------------------------------------
# Weak pairings
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class WeakStateQuery:
    """A single weak-state evaluation request: which side at which z,
    under which truncation budget."""

    z: complex
    side: str  # 'Phi' | 'Psi'
    model: PBModel
    max_terms: int = 60
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.side not in ("Phi", "Psi"):
            raise ModelError(f"side must be 'Phi' or 'Psi', not {self.side!r}")


class TransformedTestFunction:
    """a^dag g or b g for a bump g: still smooth and compactly supported,
    so it remains an admissible test function."""

    def __init__(self, m: PBModel, which: str, g: TestFunction):
        if which not in ("a_dag", "b"):
            raise ModelError("which must be 'a_dag' or 'b'")
        self.model = m
        self.which = which
        self.g = g
        self.support = g.support

    def values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        gv = self.g.values(xs)
        gd = self.g.deriv_values(xs)
        m = self.model
        if self.which == "a_dag":
            av, ad = m.alpha_a.eval_dual(xs)
            bv = m.beta_a.eval_values(xs)
            return (-np.conj(ad) * gv - np.conj(av) * gd + np.conj(bv) * gv)
        av, ad = m.alpha_b.eval_dual(xs)
        bv = m.beta_b.eval_values(xs)
        return -ad * gv - av * gd + bv * gv

    __call__ = values


def _flavor_overlap_bound(m: PBModel, side: str,
                          g_norms: dict) -> Optional[Callable[[int], float]]:
    """|<state_n, g>| bound as a function of n, from the transform
    identities, when the flavor supports them."""
    if isinstance(m.flavor, ProportionalFlavor) and m.rho is not None:
        k_phi, k_psi, c = quad.transform_identity_factors(m)
        if side == "phi":
            return lambda n: abs(k_phi) * c ** (-0.5 * n) * g_norms["plus"]
        return lambda n: abs(k_psi) * c ** (0.5 * n) * g_norms["minus"]
    return None


def _transform_norms(m: PBModel, g) -> dict:
    norms = {}
    if isinstance(m.flavor, ProportionalFlavor) and m.rho is not None \
            and hasattr(g, "support"):
        lo, hi = quad.transform_support(m, g)
        for sign in ("plus", "minus"):
            val = integrate_line(
                lambda s, _s=sign: np.abs(quad.transform_pm(m, g, _s, s)) ** 2,
                lo, hi,
            ).value
            norms[sign] = math.sqrt(val.real)
    return norms


class PairingSeries:
    """Cached coefficient vector <state_n, h> (or <h, state_n>) for one
    test function, evaluated lazily as a coherent series at any z.

    The truncation budget must absorb the tail: for proportional models
    the transform-identity bounds certify it, otherwise the computed
    coefficients are extrapolated geometrically.
    """

    def __init__(self, m: PBModel, h, side: str, *, state_in_bra: bool,
                 max_terms: int = 60, tol: float = 1e-12):
        self.model = m
        self.side = side
        self.max_terms = max_terms
        self.coeffs = quad.state_overlaps(m, h, side, max_terms,
                                          state_in_bra=state_in_bra, tol=tol)
        self._scaled = self.coeffs / np.array(
            [sqrt_factorial(n) for n in range(max_terms + 1)])
        self._bound = _flavor_overlap_bound(m, side, _transform_norms(m, h))

    def _tail_bound(self, z_abs: float) -> float:
        n0 = self.max_terms + 1
        if self._bound is not None:
            total = 0.0
            term_scale = z_abs ** n0 / sqrt_factorial(n0)
            for n in range(n0, n0 + 400):
                total += term_scale * self._bound(n)
                term_scale *= z_abs / math.sqrt(n + 1)
                if term_scale * self._bound(n + 1) < 1e-18 * (1.0 + total):
                    break
            return total * math.exp(-0.5 * z_abs * z_abs)
        # geometric extrapolation of the computed coefficients
        mags = np.abs(self.coeffs[-9:])
        nz = mags[mags > 0]
        growth = 4.0
        if nz.size >= 2:
            growth = min(4.0, float(np.max(nz[1:] / nz[:-1])) + 0.5)
        last = float(np.max(mags)) if mags.size else 0.0
        total = 0.0
        term = z_abs ** n0 / sqrt_factorial(n0) * last * growth
        for n in range(n0, n0 + 400):
            total += term
            term *= growth * z_abs / math.sqrt(n + 1)
            if term < 1e-18 * (1.0 + total):
                break
        return total * math.exp(-0.5 * z_abs * z_abs)

    def eval(self, z: complex, *, conjugate_z: bool,
             tail_tol: float = 1e-12) -> complex:
        z = complex(z)
        tail = self._tail_bound(abs(z))
        if not tail < tail_tol * (1.0 + float(np.max(np.abs(self.coeffs)))):
            raise ModelError(
                f"non-convergent pairing tail within {self.max_terms} terms "
                f"at |z| = {abs(z):.3g} (bound {tail:.3g})"
            )
        t = np.conj(z) if conjugate_z else z
        powers = t ** np.arange(self.max_terms + 1)
        return complex(math.exp(-0.5 * abs(z) ** 2)
                       * np.dot(powers, self._scaled))


def weak_pairing(q: WeakStateQuery, g) -> complex:
    """<Phi(z), g> or <Psi(z), g> for a test function g in D(R)."""
    m = q.model
    m.ensure_normalized()
    side = "phi" if q.side == "Phi" else "psi"
    series = PairingSeries(m, g, side, state_in_bra=True,
                           max_terms=q.max_terms)
    return series.eval(q.z, conjugate_z=True, tail_tol=q.tail_tol)


# ----------------------------------------------------------------------
# Eigen-relations in the weak sense
# ----------------------------------------------------------------------

@dataclass
class EigenRelationResult:
    """Residuals of <a^dag g, Phi(z)> = z <g, Phi(z)> and
    <b g, Psi(z)> = z <g, Psi(z)>."""

    z: complex
    residual_phi: complex
    residual_psi: complex
    relative_phi: float
    relative_psi: float


def eigen_relation_residual(m: PBModel, z: complex, g: TestFunction,
                            *, max_terms: int = 60) -> EigenRelationResult:
    m.ensure_normalized()
    z = complex(z)
    results = {}
    for side, op in (("phi", "a_dag"), ("psi", "b")):
        plain = PairingSeries(m, g, side, state_in_bra=False,
                              max_terms=max_terms)
        moved = PairingSeries(m, TransformedTestFunction(m, op, g), side,
                              state_in_bra=False, max_terms=max_terms)
        # <h, Phi(z)> = exp(-|z|^2/2) sum z^n / sqrt(n!) <h, phi_n>
        lhs = moved.eval(z, conjugate_z=False)
        rhs = z * plain.eval(z, conjugate_z=False)
        results[side] = (lhs - rhs, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return EigenRelationResult(
        z=z,
        residual_phi=results["phi"][0],
        residual_psi=results["psi"][0],
        relative_phi=results["phi"][1],
        relative_psi=results["psi"][1],
    )


# ----------------------------------------------------------------------
# Resolution of the identity
# ----------------------------------------------------------------------

@dataclass
class ResolutionResult:
    value_phi_psi: complex
    value_psi_phi: complex
    reference: complex
    deviation_phi_psi: float
    deviation_psi_phi: float
    radius: float
    n_radial: int
    n_angular: int
    trace: list  # rows (R, value_phi_psi, value_psi_phi)
    tail_estimate: float = 0.0  # bound on the mass outside |z| <= R


def resolution_of_identity(m: PBModel, f: TestFunction, g: TestFunction,
                           R: float = 6.0, n_r: int = 96,
                           n_theta: Optional[int] = None,
                           *, max_terms: int = 60,
                           trace_radii: Optional[Sequence[float]] = None,
                           ) -> ResolutionResult:
    """(1/pi) * integral over |z| <= R of <f, Phi(z)><Psi(z), g> (and the
    swapped ordering) against the Lebesgue area measure, compared with
    <f, g>.

    Measure bookkeeping: for alpha_n = sqrt(n) the norm factor is
    N(r)^2 = exp(-r^2), and the radial measure dlambda(r) =
    (1/pi) r exp(-r^2) dr reproduces the required moments
    (alpha_k!)^2 / (2 pi) = k! / (2 pi).  The weighted measure
    N(r)^{-2} dlambda(r) dtheta therefore collapses to the flat
    (1/pi) r dr dtheta used here: each pairing already carries one factor
    exp(-r^2/2), and the two of them together supply exactly the
    N(r)^2 that the weighted measure divides out.
    """
    m.ensure_normalized()
    if n_theta is None:
        n_theta = 2 * max_terms + 3
    f_phi = PairingSeries(m, f, "phi", state_in_bra=False, max_terms=max_terms)
    f_psi = PairingSeries(m, f, "psi", state_in_bra=False, max_terms=max_terms)
    g_phi = PairingSeries(m, g, "phi", state_in_bra=True, max_terms=max_terms)
    g_psi = PairingSeries(m, g, "psi", state_in_bra=True, max_terms=max_terms)

    def integral(radius: float, ordering: str) -> complex:
        nodes, weights = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * radius * (nodes + 1.0)
        wr = 0.5 * radius * weights
        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        w_theta = 2.0 * math.pi / n_theta
        z = r[:, None] * np.exp(1j * theta[None, :])
        if ordering == "phi_psi":
            bra, ket = f_phi, g_psi
        else:
            bra, ket = f_psi, g_phi
        # <f, X(z)> is analytic in z, <Y(z), g> in conj(z)
        p1 = np.polynomial.polynomial.polyval(z, bra._scaled)
        p2 = np.polynomial.polynomial.polyval(np.conj(z), ket._scaled)
        integrand = p1 * p2 * np.exp(-(r * r))[:, None]
        return complex((wr * r) @ integrand.sum(axis=1) * w_theta / math.pi)

    reference = quad.compatibility_form(m, f, g).value
    radii = list(trace_radii) if trace_radii is not None else \
        [R * (i + 1) / 6.0 for i in range(6)]
    trace = [(rr, integral(rr, "phi_psi"), integral(rr, "psi_phi"))
             for rr in radii]
    v_pp = integral(R, "phi_psi")
    v_pf = integral(R, "psi_phi")

    # diagonal-term mass outside |z| <= R: the angular integral kills all
    # cross terms, so the truncated disc misses sum_n a_n b_n Q(n+1, R^2)
    # with Q the regularized upper incomplete gamma
    from scipy import special

    ns = np.arange(max_terms + 1)
    diag = np.abs(f_phi.coeffs) * np.abs(g_psi.coeffs) / np.array(
        [sqrt_factorial(n) ** 2 for n in ns])
    tail = float(np.dot(diag, special.gammaincc(ns + 1.0, R * R)))
    if tail > 0.01 * (1.0 + abs(reference)):
        import warnings

        warnings.warn(
            f"resolution radius R = {R} may be too small: estimated "
            f"missing mass {tail:.2e}", stacklevel=2)
    return ResolutionResult(
        value_phi_psi=v_pp,
        value_psi_phi=v_pf,
        reference=complex(reference),
        deviation_phi_psi=float(abs(v_pp - reference)),
        deviation_psi_phi=float(abs(v_pf - reference)),
        radius=R,
        n_radial=n_r,
        n_angular=n_theta,
        trace=trace,
        tail_estimate=tail,
    )

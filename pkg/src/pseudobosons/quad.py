"""Integral machinery.

Everything that integrates lives here: an adaptive Gauss-Kronrod line
integrator over finite or truncated-infinite intervals, compactly
supported bump test functions, harmonic-oscillator eigenfunctions, the
cumulative antiderivative rho and its monotone inverse, the compatibility
form <f, g> = integral of conj(f) g, biorthonormality matrices, the
plus/minus transforms that map test functions to the oscillator picture,
and quasi-basis partial sums.

The integrator uses a 15-point Kronrod rule nested over 7-point Gauss
panels.  Infinite domains are truncated where the supplied decay envelope
(or, failing that, the sampled integrand) falls below tol/10 and the
estimated tail mass is negligible; dyadic seed panels keep wide windows
cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .jets import Jet, jet_exp, jet_powi

__all__ = [
    "IntegralResult",
    "QuadratureError",
    "RhoError",
    "TestFunction",
    "integrate_line",
    "oscillator_en",
    "hermite_value",
    "rho_eval",
    "rho_invert",
    "compatibility_form",
    "biorthonormality_matrix",
    "transform_pm",
    "transform_identity_factors",
    "quasi_basis_sum",
    "QuasiBasisResult",
    "state_overlaps",
]


class QuadratureError(Exception):
    """Non-convergent or divergent integral; carries the best estimate."""

    def __init__(self, message, best_value=None, error_estimate=None):
        super().__init__(message)
        self.best_value = best_value
        self.error_estimate = error_estimate


class RhoError(Exception):
    """rho is unavailable, non-monotonic, or failed to invert."""


@dataclass
class IntegralResult:
    value: complex
    abs_error_estimate: float
    panels_used: int
    truncation_bounds: tuple[float, float]


# ----------------------------------------------------------------------
# Gauss-Kronrod 7/15 panel rule (QUADPACK abscissae and weights)
# ----------------------------------------------------------------------

_XGK = np.array([
    -0.991455371120812639207, -0.949107912342758524526,
    -0.864864423359769072789, -0.741531185599394439864,
    -0.586087235467691130294, -0.405845151377397166907,
    -0.207784955007898467601, 0.0,
    0.207784955007898467601, 0.405845151377397166907,
    0.586087235467691130294, 0.741531185599394439864,
    0.864864423359769072789, 0.949107912342758524526,
    0.991455371120812639207,
])
_WGK = np.array([
    0.022935322010529224964, 0.063092092629978553291,
    0.104790010322250183840, 0.140653259715525918745,
    0.169004726639267902827, 0.190350578064785409913,
    0.204432940075298892414, 0.209482141084727828013,
    0.204432940075298892414, 0.190350578064785409913,
    0.169004726639267902827, 0.140653259715525918745,
    0.104790010322250183840, 0.063092092629978553291,
    0.022935322010529224964,
])
_WG = np.array([
    0.129484966168869693271, 0.279705391489276667901,
    0.381830050505118944950, 0.417959183673469387755,
    0.381830050505118944950, 0.279705391489276667901,
    0.129484966168869693271,
])
_GAUSS_IDX = np.arange(1, 15, 2)  # Gauss nodes sit at the odd Kronrod slots


def _panel_sums(f, lo: np.ndarray, hi: np.ndarray):
    """Kronrod and Gauss sums, error estimates, and the Kronrod sum of |f|
    (the roundoff witness) for a batch of panels."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = mid[:, None] + half[:, None] * _XGK[None, :]
    vals = np.asarray(f(xs.ravel()), dtype=np.complex128).reshape(xs.shape)
    kron = (vals @ _WGK) * half
    gauss = (vals[:, _GAUSS_IDX] @ _WG) * half
    kabs = (np.abs(vals) @ _WGK) * half
    diff = np.abs(kron - gauss)
    # QUADPACK-style sharpened estimate once the rule starts converging
    err = np.where(diff < 5e-3, (200.0 * diff) ** 1.5, diff)
    err = np.minimum(err, diff + 1e-300)
    return kron, err, kabs


def _seed_breakpoints(a: float, b: float) -> np.ndarray:
    pts = {a, b}
    if a < 0.0 < b:
        pts.add(0.0)
    mag = max(abs(a), abs(b))
    v = 1.0
    while v < mag:
        for s in (v, -v):
            if a < s < b:
                pts.add(s)
        v *= 2.0
    pts = sorted(pts)
    # split any short central span so the first pass sees some structure
    out = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        chunks = 4 if hi - lo <= 16.0 else 1
        edges = np.linspace(lo, hi, chunks + 1)
        out.extend(edges[:-1])
    out.append(pts[-1])
    return np.asarray(out)


def _truncate_side(probe, tol: float, sign: int) -> float:
    """Smallest dyadic L with probe(sign*L) < tol/10 and negligible
    estimated tail mass probe(sign*L) * L."""
    L = 1.0
    for _ in range(60):
        m = max(probe(sign * L), probe(sign * 1.31 * L))
        if m < tol / 10.0 and m * L < tol / 3.0:
            return sign * L
        L *= 2.0
    raise QuadratureError(
        "envelope non-integrable: no admissible truncation point found"
    )


def integrate_line(
    f: Callable[[np.ndarray], np.ndarray],
    a: Optional[float] = None,
    b: Optional[float] = None,
    *,
    tol: float = 1e-12,
    rtol: float = 0.0,
    envelope: Optional[Callable[[float], float]] = None,
    max_panels: int = 10_000,
) -> IntegralResult:
    """Adaptive line integral of a vectorized integrand.

    ``a``/``b`` may be None or infinite; such ends are truncated using
    ``envelope`` (a nonnegative decay bound on |f|) or, if no envelope is
    given, the sampled magnitude of ``f`` itself.  Panels are accepted
    once their error estimate is below max(tol, rtol * |integral|),
    apportioned by width.
    """
    def probe(x: float) -> float:
        if envelope is not None:
            return float(abs(envelope(x)))
        return float(np.max(np.abs(f(np.array([x])))))

    lo_inf = a is None or math.isinf(a)
    hi_inf = b is None or math.isinf(b)
    a_eff = _truncate_side(probe, tol, -1) if lo_inf else float(a)
    b_eff = _truncate_side(probe, tol, +1) if hi_inf else float(b)
    if a_eff == b_eff:
        return IntegralResult(0.0 + 0.0j, 0.0, 0, (a_eff, b_eff))
    if a_eff > b_eff:
        res = integrate_line(f, b_eff, a_eff, tol=tol, rtol=rtol,
                             envelope=envelope, max_panels=max_panels)
        return IntegralResult(-res.value, res.abs_error_estimate,
                              res.panels_used, (a_eff, b_eff))

    edges = _seed_breakpoints(a_eff, b_eff)
    lo = edges[:-1]
    hi = edges[1:]
    width_total = b_eff - a_eff

    total_panels = 0
    done_val = 0.0 + 0.0j
    done_err = 0.0
    done_abs = 0.0
    eps = np.finfo(float).eps
    for _ in range(64):
        total_panels += lo.size
        if total_panels > max_panels:
            raise QuadratureError(
                f"panel budget {max_panels} exhausted",
                best_value=done_val, error_estimate=done_err,
            )
        kron, err, kabs = _panel_sums(f, lo, hi)
        # acceptance level: requested tolerances, but never below the
        # roundoff floor of the absolute-value mass in play
        scale = max(tol, rtol * abs(done_val + kron.sum()),
                    50.0 * eps * (done_abs + kabs.sum()))
        if done_err + err.sum() <= scale:  # global budget already met
            return IntegralResult(complex(done_val + kron.sum()),
                                  float(done_err + err.sum()),
                                  total_panels, (a_eff, b_eff))
        ok = err <= scale * (hi - lo) / width_total
        done_val += kron[ok].sum()
        done_err += err[ok].sum()
        done_abs += kabs[ok].sum()
        if np.all(ok):
            return IntegralResult(complex(done_val), float(done_err),
                                  total_panels, (a_eff, b_eff))
        lo_bad, hi_bad = lo[~ok], hi[~ok]
        mid = 0.5 * (lo_bad + hi_bad)
        lo = np.concatenate([lo_bad, mid])
        hi = np.concatenate([mid, hi_bad])
    best = complex(done_val + kron[~ok].sum())
    raise QuadratureError(
        "adaptive refinement failed to converge",
        best_value=best, error_estimate=float(done_err + err[~ok].sum()),
    )


# ----------------------------------------------------------------------
# Test functions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported bump, a member of D(R).

    h(x) = amplitude * exp(-1 / (1 - t^2)) for t = (x - center)/width
    inside |t| < 1 and exactly 0 outside.
    """

    __test__ = False  # not a pytest item despite the name

    center: float = 0.0
    width: float = 1.0
    amplitude: complex = 1.0
    kind: str = "bump"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.kind != "bump":
            raise ValueError(f"unknown test-function kind {self.kind!r}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.width, self.center + self.width)

    def values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        t = (xs - self.center) / self.width
        inside = np.abs(t) < 1.0
        out = np.zeros(xs.shape, dtype=np.complex128)
        ti = t[inside]
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - ti * ti))
        return out

    __call__ = values

    def deriv_values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        t = (xs - self.center) / self.width
        inside = np.abs(t) < 1.0
        out = np.zeros(xs.shape, dtype=np.complex128)
        ti = t[inside]
        u = 1.0 - ti * ti
        out[inside] = (self.amplitude * np.exp(-1.0 / u)
                       * (-2.0 * ti / (u * u)) / self.width)
        return out

    def jet(self, x: float, order: int) -> Jet:
        t0 = (x - self.center) / self.width
        if abs(t0) >= 1.0 - 1e-14:
            return Jet.constant(0.0, x, order)
        t = (Jet.variable(x, order) - self.center) * (1.0 / self.width)
        u = 1.0 - jet_powi(t, 2)
        g = jet_exp(-(Jet.constant(1.0, x, order) / u))
        return g * self.amplitude

    def l2_norm(self) -> float:
        lo, hi = self.support
        val = integrate_line(lambda s: np.abs(self.values(s)) ** 2,
                             lo, hi).value
        return math.sqrt(val.real)

    def normalized(self) -> "TestFunction":
        return TestFunction(self.center, self.width,
                            self.amplitude / self.l2_norm(), self.kind)


# ----------------------------------------------------------------------
# Hermite helpers and oscillator eigenfunctions
# ----------------------------------------------------------------------

def hermite_value(n: int, y):
    """H_n(y) for scalar or array y (complex-safe three-term recurrence)."""
    y = np.asarray(y, dtype=np.complex128)
    h_prev = np.ones_like(y)
    if n == 0:
        return h_prev
    h = 2.0 * y
    for k in range(1, n):
        h, h_prev = 2.0 * y * h - 2.0 * k * h_prev, h
    return h


def oscillator_en(n: int, s):
    """n-th harmonic-oscillator eigenstate
    e_n(s) = (2^n n! sqrt(pi))^(-1/2) H_n(s) exp(-s^2/2).

    Evaluated through the normalized recurrence
    e_n = s sqrt(2/n) e_{n-1} - sqrt((n-1)/n) e_{n-2}, stable far beyond
    n = 200.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    s = np.asarray(s, dtype=float)
    e_prev = np.pi ** -0.25 * np.exp(-0.5 * s * s)
    if n == 0:
        return e_prev
    e = np.sqrt(2.0) * s * e_prev
    for k in range(2, n + 1):
        e, e_prev = s * np.sqrt(2.0 / k) * e - np.sqrt((k - 1.0) / k) * e_prev, e
    return e


# ----------------------------------------------------------------------
# rho and its inverse
# ----------------------------------------------------------------------

def _require_rho(m):
    if m.rho is None:
        raise RhoError(
            f"model {m.name!r} has no rho: only equal-alpha / proportional "
            "models define rho = antideriv(1/alpha_b)"
        )
    return m.rho


def rho_eval(m, x: float) -> float:
    """rho(x) via the registered closed form or cumulative quadrature."""
    expr = _require_rho(m)
    v = complex(expr.eval_values(np.array([float(x)]))[0])
    if abs(v.imag) > 1e-10 * (1.0 + abs(v.real)):
        raise RhoError("rho evaluated to a non-real value; alpha must be real")
    return v.real


def rho_values(m, xs) -> np.ndarray:
    expr = _require_rho(m)
    return np.real(expr.eval_values(np.asarray(xs, dtype=float)))


def _rho_slope(m, x: float) -> float:
    # rho'(x) = 1/alpha_b(x); also the monotonicity witness
    ab = complex(m.alpha_b.eval_values(np.array([float(x)]))[0])
    if abs(ab.imag) > 1e-12 * (1 + abs(ab)) or ab.real <= 0.0:
        raise RhoError(
            f"non-monotonic rho: alpha_b({x}) = {ab} is not real positive"
        )
    return 1.0 / ab.real


def rho_invert(m, s: float, *, tol_scale: float = 1e-12) -> float:
    """Solve rho(x) = s to |rho(x) - s| <= tol_scale * (1 + |s|)."""
    s = float(s)
    tol = tol_scale * (1.0 + abs(s))
    if m.rho_inverse is not None:
        x = float(m.rho_inverse(s))
    else:
        _require_rho(m)
        lo, hi = -1.0, 1.0
        for _ in range(80):
            if rho_eval(m, lo) <= s:
                break
            lo *= 2.0
        else:
            raise RhoError(f"could not bracket rho(x) = {s} from below")
        for _ in range(80):
            if rho_eval(m, hi) >= s:
                break
            hi *= 2.0
        else:
            raise RhoError(f"could not bracket rho(x) = {s} from above")
        _rho_slope(m, lo)  # monotonicity witnesses at both bracket ends
        _rho_slope(m, hi)
        x = optimize.brentq(lambda t: rho_eval(m, t) - s, lo, hi,
                            xtol=1e-13, rtol=8.9e-16)
    for _ in range(4):
        r = rho_eval(m, x) - s
        if abs(r) <= tol:
            return x
        x -= r / _rho_slope(m, x)
    raise RhoError(f"rho inversion did not reach tolerance at s = {s}")


def rho_invert_values(m, ss) -> np.ndarray:
    ss = np.asarray(ss, dtype=float)
    if m.rho_inverse is not None:
        return np.asarray(m.rho_inverse(ss), dtype=float)
    return np.array([rho_invert(m, s) for s in ss.ravel()]).reshape(ss.shape)


# ----------------------------------------------------------------------
# Compatibility form and biorthonormality
# ----------------------------------------------------------------------

def _as_values_fn(f):
    if hasattr(f, "values"):
        return f.values
    return f


def _support_of(f):
    return getattr(f, "support", None)


def compatibility_form(m, f, g, *, envelope=None, tol: float = 1e-12,
                       bounds=None) -> IntegralResult:
    """<f, g> = integral of conj(f(x)) g(x) dx, conjugation on the first
    slot.

    Bounds are taken from explicit ``bounds``, else from compact supports
    carried by ``f``/``g``, else from the decay envelope (or the sampled
    integrand when no envelope is available).
    """
    fv = _as_values_fn(f)
    gv = _as_values_fn(g)

    def integrand(xs):
        return np.conj(fv(xs)) * gv(xs)

    a = b = None
    if bounds is not None:
        a, b = bounds
    else:
        supports = [s for s in (_support_of(f), _support_of(g)) if s is not None]
        if supports:
            a = max(s[0] for s in supports)
            b = min(s[1] for s in supports)
            if a >= b:
                return IntegralResult(0.0 + 0.0j, 0.0, 0, (a, a))
    return integrate_line(integrand, a, b, tol=tol, envelope=envelope)


def state_overlaps(m, h, side: str, n_max: int, *, state_in_bra: bool,
                   tol: float = 1e-12) -> np.ndarray:
    """Vector of compatibility forms between a compactly supported test
    function and the first n_max+1 family members.

    state_in_bra=True gives <state_n, h>; False gives <h, state_n>.
    """
    from .states import StateFamily  # deferred to avoid an import cycle

    fam = StateFamily(m, side, max_n=n_max)
    lo, hi = h.support
    out = np.empty(n_max + 1, dtype=np.complex128)
    hv = h.values
    for n in range(n_max + 1):
        sv = fam.values_fn(n)
        if state_in_bra:
            integrand = lambda xs: np.conj(sv(xs)) * hv(xs)
        else:
            integrand = lambda xs: np.conj(hv(xs)) * sv(xs)
        out[n] = integrate_line(integrand, lo, hi, tol=tol).value
    return out


def biorthonormality_matrix(m, N: int, *, tol: float = 1e-12):
    """(N+1) x (N+1) Gram matrix G[m, n] = <psi_m, phi_n> and its maximum
    deviation from the identity.  Requires the normalization product to
    have been fixed."""
    from .states import StateFamily, pair_envelope

    if m.norm_product is None:
        raise QuadratureError(
            "normalization not fixed: call fix_normalization(model) first"
        )
    phi = StateFamily(m, "phi", max_n=N)
    psi = StateFamily(m, "psi", max_n=N)
    G = np.empty((N + 1, N + 1), dtype=np.complex128)
    env = pair_envelope(m, 2 * N)
    for mi in range(N + 1):
        pv = psi.values_fn(mi)
        for ni in range(N + 1):
            fv = phi.values_fn(ni)
            G[mi, ni] = integrate_line(
                lambda xs: np.conj(pv(xs)) * fv(xs),
                None, None, tol=tol, envelope=env,
            ).value
    dev = float(np.max(np.abs(G - np.eye(N + 1))))
    return G, dev


# ----------------------------------------------------------------------
# Transforms to the oscillator picture
# ----------------------------------------------------------------------

def _proportional_ratio(m) -> float:
    flavor = m.flavor
    ratio = getattr(flavor, "ratio", None)
    if ratio is None:
        raise RhoError(
            f"transforms are defined only for equal-alpha / proportional "
            f"models, not flavor {flavor!r}"
        )
    return float(ratio)


def transform_pm(m, h, sign: str, s) -> np.ndarray:
    """The minus/plus transforms of a test function.

    With c the ratio alpha_a / alpha_b and x(s) = rho^{-1}(sqrt(2c) s):

        h_minus(s) = h(x(s)) exp(+s^2/2)
        h_plus(s)  = h(x(s)) alpha_a(x(s)) exp(-s^2/2)

    For the equal-alpha case (c = 1) these are the standard transforms;
    for the proportional sinh-model (c = 2) the plus factor
    alpha_a(x(s)) = 1/sqrt(1+s^2) reproduces the bracketed variants.
    """
    c = _proportional_ratio(m)
    s = np.asarray(s, dtype=float)
    x = rho_invert_values(m, math.sqrt(2.0 * c) * s)
    hv = _as_values_fn(h)(x)
    if sign == "minus":
        return hv * np.exp(0.5 * s * s)
    if sign == "plus":
        aa = m.alpha_a.eval_values(x)
        return hv * aa * np.exp(-0.5 * s * s)
    raise ValueError("sign must be 'plus' or 'minus'")


def transform_support(m, h) -> tuple[float, float]:
    """Support of the transformed test function on the s axis."""
    c = _proportional_ratio(m)
    lo, hi = h.support
    scale = 1.0 / math.sqrt(2.0 * c)
    return (rho_eval(m, lo) * scale, rho_eval(m, hi) * scale)


def transform_identity_factors(m) -> tuple[complex, complex, float]:
    """Constants linking direct compatibility forms with oscillator
    inner products:

        <f, phi_n> = K_phi * c^(-n/2) * <f_plus, e_n>
        <psi_n, g> = K_psi * c^(+n/2) * <e_n, g_minus>
        <f_plus, g_minus> = sqrt(c/2) * <f, g>

    Returns (K_phi, K_psi, c).  K_phi absorbs the normalization constant
    and the vacuum's multiplicative convention (phi_0(x) may differ from
    exp(-rho^2/(2c)) by a constant, e.g. 1/e for the sinh model).
    """
    c = _proportional_ratio(m)
    from .states import StateFamily

    n_phi, n_psi = StateFamily(m, "phi").normalization, \
        StateFamily(m, "psi").normalization
    # vacuum constant relative to exp(-rho(x)^2 / (2c)); rho(0) need not
    # vanish for user-registered rho, so evaluate the ratio explicitly
    x0 = np.array([0.0])
    vac0 = complex(m.phi_vacuum_values(x0)[0])
    r0 = rho_values(m, x0)[0]
    vac_const = vac0 / math.exp(-r0 * r0 / (2.0 * c))
    k_phi = n_phi * vac_const * math.pi ** 0.25 * math.sqrt(2.0 / c)
    k_psi = np.conj(n_psi) * math.pi ** 0.25 * math.sqrt(2.0 * c)
    return complex(k_phi), complex(k_psi), c


@dataclass
class QuasiBasisResult:
    ordering: str
    partial_sums: np.ndarray
    total: complex
    reference: complex
    deviation: float
    transform_pair_value: Optional[complex] = None
    transform_pair_expected: Optional[complex] = None


def quasi_basis_sum(m, f, g, N: int, ordering: str = "phi_psi",
                    *, tol: float = 1e-12) -> QuasiBasisResult:
    """Partial sums S_N of the quasi-basis expansion of <f, g> along with
    the final deviation |S_N - <f, g>|.

    ordering 'phi_psi' sums <f, phi_n><psi_n, g>; 'psi_phi' swaps the
    roles.  For equal-alpha / proportional models the transform-identity
    cross-check <f_plus, g_minus> = sqrt(c/2) <f, g> is evaluated too.
    """
    if m.norm_product is None:
        raise QuadratureError(
            "normalization not fixed: call fix_normalization(model) first"
        )
    if ordering == "phi_psi":
        an = state_overlaps(m, f, "phi", N, state_in_bra=False, tol=tol)
        bn = state_overlaps(m, g, "psi", N, state_in_bra=True, tol=tol)
    elif ordering == "psi_phi":
        an = state_overlaps(m, f, "psi", N, state_in_bra=False, tol=tol)
        bn = state_overlaps(m, g, "phi", N, state_in_bra=True, tol=tol)
    else:
        raise ValueError("ordering must be 'phi_psi' or 'psi_phi'")
    terms = an * bn
    partial = np.cumsum(terms)
    reference = compatibility_form(m, f, g, tol=tol).value
    result = QuasiBasisResult(
        ordering=ordering,
        partial_sums=partial,
        total=complex(partial[-1]),
        reference=complex(reference),
        deviation=float(abs(partial[-1] - reference)),
    )
    ratio = getattr(m.flavor, "ratio", None)
    if ratio is not None:
        c = float(ratio)
        lo_f, hi_f = transform_support(m, f)
        lo_g, hi_g = transform_support(m, g)
        lo, hi = max(lo_f, lo_g), min(hi_f, hi_g)
        if lo < hi:
            pair = integrate_line(
                lambda s: np.conj(transform_pm(m, f, "plus", s))
                * transform_pm(m, g, "minus", s),
                lo, hi, tol=tol,
            ).value
        else:
            pair = 0.0 + 0.0j
        result.transform_pair_value = complex(pair)
        result.transform_pair_expected = complex(
            math.sqrt(c / 2.0) * reference
        )
    return result

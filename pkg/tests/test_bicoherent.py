import math

import numpy as np
import pytest
from scipy import special as sp

from pseudobosons import (
    GrowthProfile,
    WeakStateQuery,
    coherent_norm,
    convergence_radius,
    eigen_relation_residual,
    moment_check,
    resolution_of_identity,
    weak_pairing,
)
from pseudobosons.bicoherent import PairingSeries, TransformedTestFunction
from pseudobosons.jets import sqrt_factorial
from pseudobosons.quad import (
    TestFunction,
    integrate_line,
    oscillator_en,
    state_overlaps,
    transform_pm,
    transform_support,
)


class TestGrowthProfile:
    def test_pseudo_bosonic_norm(self):
        prof = GrowthProfile.pseudo_bosonic()
        assert abs(coherent_norm(1.0, prof) - math.exp(-0.5)) < 1e-14

    def test_zero_argument(self):
        prof = GrowthProfile.pseudo_bosonic()
        assert coherent_norm(0.0, prof) == 1.0

    def test_linear_profile_bessel(self):
        # sum 1/(k!)^2 = I_0(2): modified-Bessel series oracle
        prof = GrowthProfile.linear()
        assert abs(coherent_norm(1.0, prof) - sp.iv(0, 2.0) ** -0.5) < 1e-14

    def test_radius_infinite(self):
        prof = GrowthProfile.pseudo_bosonic()
        assert convergence_radius(prof) == math.inf

    def test_radius_min_arithmetic(self):
        prof = GrowthProfile(alpha=math.sqrt, alpha_bar=2.0,
                             m_phi=3.0, m_psi=0.5, r_phi=1.0, r_psi=1.0)
        assert convergence_radius(prof) == 1.0

    def test_radius_degenerate(self):
        prof = GrowthProfile(alpha=math.sqrt, alpha_bar=math.inf, m_phi=0.0)
        assert convergence_radius(prof) == 0.0

    def test_outside_disc_rejected(self):
        prof = GrowthProfile(alpha=math.sqrt, alpha_bar=1.5)
        with pytest.raises(ValueError, match="convergence disc"):
            coherent_norm(2.0, prof)

    def test_alpha_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            GrowthProfile(alpha=lambda k: 0.0)


class TestMoments:
    def test_gaussian_density_factorial_moments(self):
        # Gamma-function oracle: the 2k-th radial moment of
        # (1/pi) r e^{-r^2} dr is k!/(2 pi)
        prof = GrowthProfile.pseudo_bosonic()
        devs = moment_check(lambda r: r * np.exp(-r * r) / math.pi, prof, 12)
        for k, dev in enumerate(devs):
            ref = math.factorial(k) / (2 * math.pi)
            assert abs(dev) <= 1e-10 * max(1.0, ref), k

    def test_zero_density(self):
        prof = GrowthProfile.pseudo_bosonic()
        devs = moment_check(lambda r: 0.0 * r, prof, 4, radius=10.0)
        want = [-math.factorial(k) / (2 * math.pi) for k in range(5)]
        assert np.allclose(devs, want, rtol=1e-14)

    def test_zeroth_moment_direct(self):
        prof = GrowthProfile.pseudo_bosonic()
        val = integrate_line(lambda r: r * np.exp(-r * r) / math.pi,
                             0.0, None).value
        assert abs(val - 1 / (2 * math.pi)) < 1e-14
        assert abs(moment_check(lambda r: r * np.exp(-r * r) / math.pi,
                                prof, 0)[0]) < 1e-14


class TestWeakPairing:
    def test_z_zero_reduces_to_vacuum_overlap(self, example2):
        from pseudobosons import StateFamily, compatibility_form

        g = TestFunction(0.0, 1.0)
        v = weak_pairing(WeakStateQuery(z=0.0, side="Phi", model=example2), g)
        fam = StateFamily(example2, "phi", max_n=0)
        ref = compatibility_form(example2, fam.values_fn(0), g).value
        assert abs(v - ref) < 1e-14

    def test_linearity(self, example1):
        g1 = TestFunction(0.0, 1.0)
        g2 = TestFunction(0.4, 0.8)
        z = 0.7 - 0.2j
        q = WeakStateQuery(z=z, side="Psi", model=example1)
        v1 = weak_pairing(q, g1)
        v2 = weak_pairing(q, g2)

        class Sum:
            support = (min(g1.support[0], g2.support[0]),
                       max(g1.support[1], g2.support[1]))

            @staticmethod
            def values(xs):
                return g1.values(xs) + g2.values(xs)

        v12 = weak_pairing(q, Sum)
        assert abs(v12 - (v1 + v2)) < 1e-12

    def test_brute_force_series_oracle(self, example2):
        g = TestFunction(0.0, 1.0)
        coeffs = state_overlaps(example2, g, "phi", 200, state_in_bra=True)
        z = 1.0
        brute = math.exp(-0.5) * sum(
            coeffs[n] / sqrt_factorial(n) for n in range(201))
        got = weak_pairing(WeakStateQuery(z=z, side="Phi", model=example2), g)
        assert abs(got - brute) <= 1e-10

    def test_requires_normalization(self):
        from pseudobosons import ModelError, build_builtin

        m = build_builtin("example1")
        with pytest.raises(ModelError, match="normalization"):
            weak_pairing(WeakStateQuery(z=0.0, side="Phi", model=m),
                         TestFunction())

    def test_bosonic_matches_classical_overlap(self, bosonic):
        # phi_n = pi^(1/4) e_n, so the weak pairing is pi^(1/4) times the
        # classical coherent overlap computed with direct e_n quadratures
        g = TestFunction(0.3, 0.9)
        z = 1.2 - 0.7j
        lo, hi = g.support
        classical = sum(
            np.conj(z) ** n / sqrt_factorial(n)
            * integrate_line(lambda x, _n=n: oscillator_en(_n, x)
                             * g.values(x), lo, hi).value
            for n in range(61)) * math.exp(-0.5 * abs(z) ** 2)
        got = weak_pairing(WeakStateQuery(z=z, side="Phi", model=bosonic), g)
        assert abs(got - math.pi ** 0.25 * classical) < 1e-12


class TestTailBounds:
    def test_example2_bound_soundness(self, example2):
        # the growth/decay bounds certified by the transform identities
        # must dominate the actual overlaps through n = 20
        from pseudobosons.quad import transform_identity_factors

        g = TestFunction(0.2, 1.0)
        k_phi, k_psi, c = transform_identity_factors(example2)
        lo, hi = transform_support(example2, g)
        norm_plus = math.sqrt(integrate_line(
            lambda s: np.abs(transform_pm(example2, g, "plus", s)) ** 2,
            lo, hi).value.real)
        norm_minus = math.sqrt(integrate_line(
            lambda s: np.abs(transform_pm(example2, g, "minus", s)) ** 2,
            lo, hi).value.real)
        phi_overlaps = state_overlaps(example2, g, "phi", 20,
                                      state_in_bra=True)
        psi_overlaps = state_overlaps(example2, g, "psi", 20,
                                      state_in_bra=True)
        for n in range(21):
            assert abs(phi_overlaps[n]) <= abs(k_phi) * c ** (-0.5 * n) \
                * norm_plus * (1 + 1e-12)
            assert abs(psi_overlaps[n]) <= abs(k_psi) * c ** (0.5 * n) \
                * norm_minus * (1 + 1e-12)

    def test_budget_exceeded_raises(self, example2):
        g = TestFunction(0.0, 1.0)
        series = PairingSeries(example2, g, "psi", state_in_bra=True,
                               max_terms=12)
        from pseudobosons import ModelError

        with pytest.raises(ModelError, match="tail"):
            series.eval(6.0, conjugate_z=True)


class TestEigenRelations:
    def test_z_zero_vacuum_annihilation(self, example2):
        g = TestFunction(0.0, 1.0)
        res = eigen_relation_residual(example2, 0.0, g)
        # at z = 0 the relation reduces to <a^dag g, phi_0> = <g, a phi_0> = 0
        assert abs(res.residual_phi) < 1e-13
        assert abs(res.residual_psi) < 1e-13

    def test_example2_complex_point(self, example2):
        g = TestFunction(0.0, 1.0)
        res = eigen_relation_residual(example2, 1 + 1j, g)
        assert res.relative_phi <= 1e-8
        assert res.relative_psi <= 1e-8

    def test_bosonic_coherent_point(self, bosonic):
        g = TestFunction(0.2, 1.1)
        res = eigen_relation_residual(bosonic, 2.0, g)
        assert res.relative_phi <= 1e-10
        assert res.relative_psi <= 1e-10

    def test_transformed_function_stays_supported(self, example2):
        g = TestFunction(0.1, 0.7)
        moved = TransformedTestFunction(example2, "a_dag", g)
        xs = np.array([g.support[0] - 0.3, g.support[1] + 0.3])
        assert np.all(moved.values(xs) == 0)
        inside = np.linspace(g.support[0] + 0.05, g.support[1] - 0.05, 7)
        assert np.any(moved.values(inside) != 0)


class TestResolution:
    def test_same_bump_example1(self, example1):
        f = TestFunction(0.0, 1.0)
        r = resolution_of_identity(example1, f, f, R=6.0)
        assert r.deviation_phi_psi <= 1e-3
        assert r.deviation_psi_phi <= 1e-3

    def test_disjoint_supports(self, example2):
        f = TestFunction(-1.2, 0.5)
        g = TestFunction(1.2, 0.5)
        r = resolution_of_identity(example2, f, g, R=6.0)
        assert abs(r.reference) == 0.0
        assert abs(r.value_phi_psi) <= 1e-3
        assert abs(r.value_psi_phi) <= 1e-3

    def test_bosonic_classical(self, bosonic):
        f = TestFunction(0.0, 1.2)
        r = resolution_of_identity(bosonic, f, f, R=6.0)
        assert r.deviation_phi_psi <= 1e-3

    def test_angular_exactness(self, example2):
        # the theta integrand is a trigonometric polynomial of degree
        # <= 2 * max_terms; doubling the angular nodes must not move the
        # result beyond roundoff
        f = TestFunction(0.0, 1.0)
        base = resolution_of_identity(example2, f, f, R=3.0, max_terms=30,
                                      n_theta=63, trace_radii=[3.0])
        fine = resolution_of_identity(example2, f, f, R=3.0, max_terms=30,
                                      n_theta=126, trace_radii=[3.0])
        assert abs(base.value_phi_psi - fine.value_phi_psi) <= 1e-12

    def test_trace_radii_recorded(self, example1):
        f = TestFunction(0.0, 1.0)
        r = resolution_of_identity(example1, f, f, R=4.0,
                                   trace_radii=[1.0, 2.0, 4.0])
        assert [row[0] for row in r.trace] == [1.0, 2.0, 4.0]

    def test_small_radius_warns(self, example2):
        import warnings

        f = TestFunction(0.0, 1.0)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            r = resolution_of_identity(example2, f, f, R=1.5,
                                       trace_radii=[1.5])
        assert any("too small" in str(w.message) for w in caught)
        assert r.tail_estimate > 1e-3

    def test_adequate_radius_quiet(self, example2):
        import warnings

        f = TestFunction(0.0, 1.0)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            r = resolution_of_identity(example2, f, f, R=6.0,
                                       trace_radii=[6.0])
        assert not caught
        assert r.tail_estimate < 1e-10

"""Curve-layer tests: sheets, theta parameterization, Abel map, beta1.

Oracles: direct residuals in the curve equation, a sign-tracked composite
Simpson quadrature of dzeta/(4 eta) along straight segments (independent of
the incomplete-integral route used by abel_map), finite differences for
d beta1 / d alpha, and the closed elliptic-integral form of beta1.
"""

import numpy as np
import pytest

from mono2.curve import (
    OffCurveError,
    abel_map,
    beta1,
    curve_residual,
    eta_on_sheet,
    sheet_of,
    theta_param,
)
from mono2.specfun import ellint_E2, ellint_F, make_modulus

KS = (0.2, 0.5, 0.8)


def random_alphas(m, n, rng, zeta_cap=10.0):
    """Sample alphas in the fundamental cell, away from theta_param poles."""
    out = []
    while len(out) < n:
        a = (rng.uniform(-0.45, 0.45, size=4 * n)
             + m.tau * rng.uniform(-0.45, 0.45, size=4 * n))
        try:
            z, e = theta_param(a, m)
        except Exception:
            continue
        keep = (np.abs(z) < zeta_cap) & (np.abs(z) > 1e-3) & np.isfinite(e)
        out.extend(a[keep][: n - len(out)])
    return np.asarray(out)


class TestEtaOnSheet:
    @pytest.mark.parametrize("k", KS)
    def test_origin_values(self, k):
        m = make_modulus(k)
        assert eta_on_sheet(0.0, 1, m) == pytest.approx(-0.5j * m.K, abs=1e-13)
        assert eta_on_sheet(0.0, 2, m) == pytest.approx(+0.5j * m.K, abs=1e-13)

    @pytest.mark.parametrize("k", KS)
    def test_on_curve(self, k):
        m = make_modulus(k)
        rng = np.random.default_rng(7)
        z = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-3, 3, 200)
        for sheet in (1, 2):
            with np.errstate(all="ignore"):
                e = eta_on_sheet(z, sheet, m)
            ok = np.isfinite(e)
            assert ok.mean() > 0.95
            assert np.all(curve_residual(z[ok], e[ok], m) < 1e-9)

    def test_sheets_are_opposite(self):
        m = make_modulus(0.6)
        z = np.array([0.3 + 0.2j, -1.5j, 2.0, 0.1 + 0.9j])
        assert np.allclose(
            eta_on_sheet(z, 1, m), -eta_on_sheet(z, 2, m), rtol=0, atol=1e-12
        )

    def test_large_zeta_asymptote(self):
        # continued from zeta = 0 along the real axis: eta_1 ~ -(iK/2) zeta^2
        m = make_modulus(0.7)
        z = 1e4
        assert eta_on_sheet(z, 1, m) / z**2 == pytest.approx(
            -0.5j * m.K, rel=1e-6
        )

    def test_branch_point_warning(self):
        m = make_modulus(0.5)
        with pytest.warns(RuntimeWarning):
            eta_on_sheet(m.a + 1e-10, 1, m)

    def test_sheet_of(self):
        m = make_modulus(0.4)
        z = np.array([0.2 + 0.1j, 1.7 - 0.4j])
        assert np.all(sheet_of(z, eta_on_sheet(z, 1, m), m) == 1)
        assert np.all(sheet_of(z, eta_on_sheet(z, 2, m), m) == 2)

    def test_bad_sheet_index(self):
        with pytest.raises(ValueError):
            eta_on_sheet(0.0, 3, make_modulus(0.5))


class TestThetaParam:
    @pytest.mark.parametrize("k", KS)
    def test_points_lie_on_curve(self, k):
        m = make_modulus(k)
        a = random_alphas(m, 200, np.random.default_rng(11), zeta_cap=1e6)
        z, e = theta_param(a, m)
        assert np.all(curve_residual(z, e, m) < 1e-10)

    def test_parity(self):
        m = make_modulus(0.55)
        a = random_alphas(m, 60, np.random.default_rng(13))
        zp, ep = theta_param(a, m)
        zm, em = theta_param(-a, m)
        np.testing.assert_allclose(zm, -zp, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(em, ep, rtol=1e-10, atol=1e-12)

    def test_lattice_periodicity(self):
        m = make_modulus(0.35)
        a = random_alphas(m, 40, np.random.default_rng(17))
        z0, e0 = theta_param(a, m)
        for shift in (1.0, m.tau, 1.0 + m.tau):
            z1, e1 = theta_param(a + shift, m)
            np.testing.assert_allclose(z1, z0, rtol=1e-9, atol=1e-11)
            np.testing.assert_allclose(e1, e0, rtol=1e-9, atol=1e-11)

    @pytest.mark.parametrize("k", KS)
    def test_zeta_zero_images(self, k):
        # alpha = -tau/2 maps to (0, -iK/2), alpha = 1/2 to (0, +iK/2)
        m = make_modulus(k)
        z, e = theta_param(-m.tau / 2.0, m)
        assert abs(z) < 1e-12
        assert e == pytest.approx(-0.5j * m.K, abs=1e-12)
        z, e = theta_param(0.5, m)
        assert abs(z) < 1e-12
        assert e == pytest.approx(+0.5j * m.K, abs=1e-12)

    @pytest.mark.parametrize("k", KS)
    def test_squared_quotients(self, k):
        # theta_i(alpha)^2 / theta_4(alpha)^2 as rational functions of (zeta, eta)
        from mono2.specfun import theta

        m = make_modulus(k)
        a = random_alphas(m, 80, np.random.default_rng(19))
        z, e = theta_param(a, m)
        t = [theta(n, a, m.tau) for n in (1, 2, 3, 4)]
        K, kk, kp = m.K, m.k, m.kprime
        q1 = (K * (z**2 - 1.0) - 2j * e) / (2.0 * K * kk * z**2)
        q2 = (K * (z**2 * (kk**2 - kp**2) + 1.0) + 2j * e) / (
            2.0 * K * kk * kp * z**2
        )
        q3 = (K * (z**2 + 1.0) + 2j * e) / (2.0 * K * kp * z**2)
        np.testing.assert_allclose(t[0] ** 2 / t[3] ** 2, q1, rtol=0, atol=1e-9)
        np.testing.assert_allclose(t[1] ** 2 / t[3] ** 2, q2, rtol=0, atol=1e-9)
        np.testing.assert_allclose(t[2] ** 2 / t[3] ** 2, q3, rtol=0, atol=1e-9)


class TestAbelMap:
    @pytest.mark.parametrize("k", KS)
    def test_base_branch_point(self, k):
        # alpha(P0) = -(1 + tau)/4 at P0 = (k' + ik, eta = 0)
        m = make_modulus(k)
        a = abel_map(m.a, 0.0, m)
        want = -(1.0 + m.tau) / 4.0
        d = a - want
        d -= np.round(np.imag(d) / np.imag(m.tau)) * m.tau
        d -= np.round(np.real(d))
        assert abs(d) < 1e-10

    @pytest.mark.parametrize("k", KS)
    def test_zeta_zero_sheets(self, k):
        m = make_modulus(k)
        a1 = abel_map(0.0, -0.5j * m.K, m)
        a2 = abel_map(0.0, +0.5j * m.K, m)
        for a, want in ((a1, -m.tau / 2.0), (a2, 0.5)):
            d = a - want
            d -= np.round(np.imag(d) / np.imag(m.tau)) * m.tau
            d -= np.round(np.real(d))
            assert abs(d) < 1e-10

    @pytest.mark.parametrize("k", KS)
    def test_round_trip(self, k):
        m = make_modulus(k)
        a = random_alphas(m, 100, np.random.default_rng(23), zeta_cap=50.0)
        z, e = theta_param(a, m)
        back = abel_map(z, e, m)
        zb, eb = theta_param(back, m)
        np.testing.assert_allclose(zb, z, rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(eb, e, rtol=1e-8, atol=1e-8)
        # and the images agree up to lattice translations
        d = back - a
        d -= np.round(np.imag(d) / np.imag(m.tau)) * m.tau
        d -= np.round(np.real(d))
        assert np.max(np.abs(d)) < 1e-8

    def test_off_curve_rejected(self):
        m = make_modulus(0.5)
        with pytest.raises(OffCurveError):
            abel_map(0.3, 0.1, m)

    @pytest.mark.parametrize("k", (0.3, 0.7))
    def test_against_path_quadrature(self, k):
        # alpha(B) - alpha(A) = int dzeta/(4 eta) along a cut-avoiding
        # segment with eta tracked continuously, mod the {1, tau} lattice
        m = make_modulus(k)
        rng = np.random.default_rng(29)
        bp = np.array([m.a, -m.a, m.b, -m.b])
        done = 0
        while done < 12:
            a_pair = random_alphas(m, 2, rng, zeta_cap=3.0)
            (zA, zB), (eA, eB) = theta_param(a_pair, m)
            seg = zA + np.linspace(0.0, 1.0, 8193)[:, None] * (zB - zA)
            if np.min(np.abs(seg - bp[None, :])) < 0.3:
                continue
            # continuity-tracked eta along the segment
            t = np.linspace(0.0, 1.0, 8193)
            zs = zA + t * (zB - zA)
            raw = np.sqrt(_quartic(zs, m) + 0j)
            ref = 0.5j * m.K * raw
            sign = np.ones(len(zs))
            prev = eA
            for i in range(len(zs)):
                if abs(ref[i] - prev) > abs(ref[i] + prev):
                    sign[i] = -1.0
                prev = sign[i] * ref[i]
            eta_path = sign * ref
            if abs(eta_path[-1] - eB) > 1e-6 * max(1.0, abs(eB)):
                continue  # landed on the flipped sheet; draw another pair
            integrand = (zB - zA) / (4.0 * eta_path)
            # composite Simpson
            h = t[1] - t[0]
            val = (h / 3.0) * (
                integrand[0]
                + integrand[-1]
                + 4.0 * integrand[1:-1:2].sum()
                + 2.0 * integrand[2:-1:2].sum()
            )
            aA = abel_map(zA, eA, m)
            aB = abel_map(zB, eB, m)
            d = (aB - aA) - val
            d -= np.round(np.imag(d) / np.imag(m.tau)) * m.tau
            d -= np.round(np.real(d))
            assert abs(d) < 1e-8
            done += 1


def _quartic(z, m):
    return z**4 + 2.0 * (m.k**2 - m.kprime**2) * z**2 + 1.0


class TestBeta1:
    @pytest.mark.parametrize("k", KS)
    def test_base_point_value(self, k):
        m = make_modulus(k)
        assert beta1(-(1.0 + m.tau) / 4.0, m) == pytest.approx(
            0.25j * np.pi, abs=1e-11
        )

    @pytest.mark.parametrize("k", KS)
    def test_derivative(self, k):
        # d beta1/d alpha = K^2 (zeta^2 - c), c = (2E - K)/K
        m = make_modulus(k)
        a = random_alphas(m, 40, np.random.default_rng(31))
        z, _ = theta_param(a, m)
        c = (2.0 * m.E - m.K) / m.K
        h = 1e-5
        fd = (beta1(a + h, m) - beta1(a - h, m)) / (2.0 * h)
        want = m.K**2 * (z**2 - c)
        np.testing.assert_allclose(fd, want, rtol=1e-7, atol=1e-7)

    @pytest.mark.parametrize("k", KS)
    def test_log_derivative_identities(self, k):
        from mono2.specfun import theta_with_d1

        m = make_modulus(k)
        a = random_alphas(m, 60, np.random.default_rng(37))
        z, _ = theta_param(a, m)
        t1, d1 = theta_with_d1(1, a, m.tau)
        t3, d3 = theta_with_d1(3, a, m.tau)
        # difference of log derivatives is 2iK zeta
        np.testing.assert_allclose(
            d1 / t1 - d3 / t3, 2j * m.K * z, rtol=0, atol=1e-9 * m.K
        )
        # and theta1'/theta1 = 2 beta1 + iK zeta
        np.testing.assert_allclose(
            d1 / t1, 2.0 * beta1(a, m) + 1j * m.K * z, rtol=0, atol=1e-9 * m.K
        )

    @pytest.mark.parametrize("k", KS)
    def test_reflection(self, k):
        # beta1 at (zeta, -eta) is -beta1 at (zeta, eta), mod i pi/2
        m = make_modulus(k)
        a = random_alphas(m, 30, np.random.default_rng(41), zeta_cap=20.0)
        z, e = theta_param(a, m)
        b_plus = beta1(abel_map(z, e, m), m)
        b_minus = beta1(abel_map(z, -e, m), m)
        d = (b_minus + b_plus) / (0.5j * np.pi)
        assert np.max(np.abs(d - np.round(d.real))) < 1e-9

    @pytest.mark.parametrize("k", KS)
    def test_elliptic_integral_form(self, k):
        # beta1 = i pi/4 +- (iK/2) [ b E(a/b) - ((b^2-c)/b) K(a/b)
        #          - b E2(zeta/a, a/b) + ((b^2-c)/b) F(zeta/a, a/b) ],
        # mod i pi/2.  The sign is carried by the branch family the
        # principal-valued F lands on: + where (i/(2Kb)) F - tau/2 matches
        # alpha up to a half-period, - where its negative does.
        m = make_modulus(k)
        rng = np.random.default_rng(43)
        a = random_alphas(m, 50, rng, zeta_cap=8.0)
        z, e = theta_param(a, m)
        c = (2.0 * m.E - m.K) / m.K
        r = m.a / m.b
        cE = ellint_E2(1.0, r)
        cK = ellint_F(1.0, r)
        expr = (
            m.b * cE
            - ((m.b**2 - c) / m.b) * cK
            - m.b * ellint_E2(z / m.a, r)
            + ((m.b**2 - c) / m.b) * ellint_F(z / m.a, r)
        )
        alpha0 = (0.5j / (m.K * m.b)) * ellint_F(z / m.a, r) - m.tau / 2.0

        def in_half_lattice(d):
            d2 = 2.0 * d
            d2 -= np.round(d2.imag / m.tau.imag) * m.tau
            d2 -= np.round(d2.real)
            return np.abs(d2) < 1e-6

        plus = in_half_lattice(alpha0 - a)
        minus = in_half_lattice(alpha0 + a)
        assert np.all(plus | minus)
        sgn = np.where(plus, 1.0, -1.0)
        ell = 0.25j * np.pi + sgn * 0.5j * m.K * expr
        d = (beta1(a, m) - ell) / (0.5j * np.pi)
        assert np.max(np.abs(d - np.round(d.real))) < 1e-9

"""Complex-capable special functions underlying the monopole field engine.

Jacobi theta functions with first derivatives, complete and incomplete
elliptic integrals valid for complex argument and modulus, the Jacobi
elliptic functions sn/cn/dn, the Jacobi Zeta function, and branch-controlled
inverses of sn/cn/dn.

Conventions
-----------
Theta functions use the unit-periodic convention

    theta3(z | tau) = sum_{n in Z} exp(i*pi*(n^2*tau + 2*n*z)),

with nome q = exp(i*pi*tau), so that theta3(z + 1) = theta3(z) and
theta1'(0) = pi * theta2(0) * theta3(0) * theta4(0).

Incomplete integrals use the Legendre sine-of-amplitude argument convention

    F(z, m)  = int_0^z dt / sqrt((1 - t^2) (1 - m^2 t^2)),
    E2(z, m) = int_0^z sqrt(1 - m^2 t^2) / sqrt(1 - t^2) dt,

evaluated through Carlson symmetric forms R_F and R_D with principal square
roots (non-negative real part), following Carlson, Numer. Math. 33 (1979)
and DLMF 19.25.  The branch this fixes is a convention; callers that need a
particular sheet of the underlying curve correct it explicitly.

All functions accept numpy arrays and broadcast; scalars in give scalars out.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Modulus",
    "PoleError",
    "SingularPathError",
    "make_modulus",
    "theta",
    "theta_d1",
    "theta_with_d1",
    "ellint_F",
    "ellint_E2",
    "jacobi_sn",
    "jacobi_cn",
    "jacobi_dn",
    "jacobi_zeta",
    "inv_sn",
    "inv_cn",
    "inv_dn",
]

#: relative truncation target for the theta q-series
_SERIES_TOL = 1e-16
#: hard cap on the number of symmetric theta terms
_SERIES_CAP = 64
#: relative deviation at which the Carlson duplication loop exits
_CARLSON_TOL = 1e-14


class SingularPathError(ValueError):
    """The integration path of an incomplete integral is non-integrably singular."""


class PoleError(ValueError):
    """The evaluation point sits on (or numerically too close to) a pole."""


# ---------------------------------------------------------------------------
# modulus data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Modulus:
    """The elliptic modulus k together with every derived constant.

    Attributes
    ----------
    k, kprime : float
        Modulus and complementary modulus, k^2 + k'^2 = 1.
    K, E, Kprime : float
        Complete integrals K(k), E(k) and K(k').
    tau : complex
        Period ratio i*K'/K (purely imaginary).
    q : complex
        Nome exp(i*pi*tau).
    a, b : complex
        Branch-point parameters k' + i*k and k' - i*k; a*b = 1, |a| = 1.
    c : float
        The combination (2E - K)/K.
    """

    k: float
    kprime: float
    K: float
    E: float
    Kprime: float
    tau: complex
    q: complex
    a: complex
    b: complex
    c: float


def _agm(k):
    """AGM iteration for (K, E) at real modulus k in (0, 1).

    a_0 = 1, b_0 = k', c_0 = k; K = pi/(2 a_inf) and
    E = K * (1 - sum 2^(n-1) c_n^2).
    """
    a, b, cn = 1.0, float(np.sqrt(1.0 - k * k)), float(k)
    csum = 0.5 * cn * cn  # n = 0 term of 2^(n-1) c_n^2
    n = 0
    while abs(cn) > 1e-17 * a and n < 64:
        a, b, cn = 0.5 * (a + b), float(np.sqrt(a * b)), 0.5 * (a - b)
        n += 1
        csum += 2.0 ** (n - 1) * cn * cn
    K = np.pi / (2.0 * a)
    return K, K * (1.0 - csum)


def make_modulus(k):
    """Build the full constant set for a separation modulus k in (0, 1)."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise ValueError(f"modulus k must lie in (0, 1), got {k!r}")
    kprime = float(np.sqrt(1.0 - k * k))
    K, E = _agm(k)
    Kprime, _ = _agm(kprime)
    tau = 1j * Kprime / K
    return Modulus(
        k=k,
        kprime=kprime,
        K=float(K),
        E=float(E),
        Kprime=float(Kprime),
        tau=complex(tau),
        q=complex(np.exp(1j * np.pi * tau)),
        a=complex(kprime + 1j * k),
        b=complex(kprime - 1j * k),
        c=float((2.0 * E - K) / K),
    )


# ---------------------------------------------------------------------------
# theta functions
# ---------------------------------------------------------------------------


def _theta_kernel(n, z, tau):
    """Truncated q-series of theta_n and its z-derivative, one truncation.

    Symmetric terms are accumulated until both the value term and the
    derivative term fall below _SERIES_TOL relative to their partial sums
    (joint criterion so that the derivative is the exact term-by-term
    derivative of the same truncated polynomial), with a hard cap of
    _SERIES_CAP terms.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError(f"theta index must be 1..4, got {n!r}")
    tau = complex(tau)
    if not tau.imag > 0.0:
        raise ValueError("theta functions need Im(tau) > 0")
    z = np.asarray(z, dtype=np.complex128)
    q = np.exp(1j * np.pi * tau)
    q2 = q * q
    w = np.exp(1j * np.pi * z)  # e^{i pi z}
    w2 = w * w
    iw2 = 1.0 / w2

    if n in (1, 2):
        # half-integer index series; m-th term carries q^{(m+1/2)^2}
        val = np.zeros_like(z)
        der = np.zeros_like(z)
        qr = q ** 0.25  # q^{(m+1/2)^2} for m = 0
        qstep = q2  # multiply qr by q^{2m+2} each step
        wo = w  # w^{2m+1}
        iwo = 1.0 / w
        sign = 1.0
        for m in range(_SERIES_CAP):
            twom1 = 2 * m + 1
            sin_t = (wo - iwo) / 2j
            cos_t = (wo + iwo) / 2.0
            if n == 1:
                tv = 2.0 * sign * qr * sin_t
                td = 2.0 * sign * qr * twom1 * np.pi * cos_t
            else:
                tv = 2.0 * qr * cos_t
                td = -2.0 * qr * twom1 * np.pi * sin_t
            val = val + tv
            der = der + td
            done = (np.abs(tv) <= _SERIES_TOL * np.abs(val)) & (
                np.abs(td) <= _SERIES_TOL * np.abs(der)
            )
            if np.all(done):
                break
            qr = qr * qstep
            qstep = qstep * q2
            wo = wo * w2
            iwo = iwo * iw2
            sign = -sign
        return val, der

    # integer index series for theta3 / theta4; n = 0 term is 1
    val = np.ones_like(z)
    der = np.zeros_like(z)
    qn = q  # q^{m^2}
    qstep = q * q2  # q^{2m+1} for the next increment
    sm = w2  # w^{2m}
    ism = iw2
    sign = -1.0 if n == 4 else 1.0
    coef = sign
    for m in range(1, _SERIES_CAP + 1):
        tv = coef * qn * (sm + ism)
        td = coef * qn * (sm - ism) * (2j * np.pi * m)
        val = val + tv
        der = der + td
        done = (np.abs(tv) <= _SERIES_TOL * np.abs(val)) & (
            np.abs(td) <= _SERIES_TOL * np.abs(der)
        )
        if np.all(done):
            break
        qn = qn * qstep
        qstep = qstep * q2
        sm = sm * w2
        ism = ism * iw2
        coef = coef * sign
    return val, der


def _maybe_scalar(x, arr):
    return arr if np.ndim(x) else complex(arr)


def theta(n, z, tau):
    """Jacobi theta function theta_n(z | tau), n in 1..4."""
    val, _ = _theta_kernel(n, z, tau)
    return _maybe_scalar(z, val)


def theta_d1(n, z, tau):
    """d/dz of theta_n(z | tau): term-by-term derivative of the same truncation."""
    _, der = _theta_kernel(n, z, tau)
    return _maybe_scalar(z, der)


def theta_with_d1(n, z, tau):
    """(theta_n, theta_n') in one series pass; used by the hot evaluation paths."""
    return _theta_kernel(n, z, tau)


@lru_cache(maxsize=64)
def theta_nulls(tau):
    """(theta2(0), theta3(0), theta4(0)) for a given tau, cached."""
    return (
        complex(theta(2, 0.0, tau)),
        complex(theta(3, 0.0, tau)),
        complex(theta(4, 0.0, tau)),
    )


# ---------------------------------------------------------------------------
# Carlson symmetric forms and Legendre incomplete integrals
# ---------------------------------------------------------------------------


def _carlson_rf(x, y, z):
    """Carlson R_F(x, y, z) by duplication, complex capable.

    Principal square roots are taken factor-by-factor, so the algorithm is
    the branch definition.  Duplication runs until the relative deviation of
    the arguments from their mean is below _CARLSON_TOL; the tail is the
    fifth-order Taylor form of DLMF 19.36.1 (error far below 1e-16 at exit).
    """
    x = np.asarray(x, dtype=np.complex128).copy()
    y = np.asarray(y, dtype=np.complex128).copy()
    z = np.asarray(z, dtype=np.complex128).copy()
    x, y, z = np.broadcast_arrays(x, y, z)
    x, y, z = x.copy(), y.copy(), z.copy()
    for _ in range(200):
        mu = (x + y + z) / 3.0
        dev = np.maximum(
            np.abs(x - mu), np.maximum(np.abs(y - mu), np.abs(z - mu))
        )
        if np.all(dev <= _CARLSON_TOL * np.abs(mu)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
    mu = (x + y + z) / 3.0
    xd = (mu - x) / mu
    yd = (mu - y) / mu
    zd = -(xd + yd)
    e2 = xd * yd - zd * zd
    e3 = xd * yd * zd
    s = 1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0
    return s / np.sqrt(mu)


def _carlson_rd(x, y, z):
    """Carlson R_D(x, y, z) by duplication with tail per DLMF 19.36.2."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    x, y, z = np.broadcast_arrays(x, y, z)
    x, y, z = x.copy(), y.copy(), z.copy()
    sigma = np.zeros_like(x)
    power4 = np.ones_like(x.real)
    for _ in range(200):
        mu = 0.2 * (x + y + 3.0 * z)
        dev = np.maximum(
            np.abs(x - mu), np.maximum(np.abs(y - mu), np.abs(z - mu))
        )
        if np.all(dev <= _CARLSON_TOL * np.abs(mu)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        sigma = sigma + power4 / (sz * (z + lam))
        power4 = 0.25 * power4
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
    mu = 0.2 * (x + y + 3.0 * z)
    xd = (mu - x) / mu
    yd = (mu - y) / mu
    zd = (mu - z) / mu
    ea = xd * yd
    eb = zd * zd
    ec = ea - eb
    ed = ea - 6.0 * eb
    ef = ed + ec + ec
    s1 = ed * (-3.0 / 14.0 + (9.0 / 88.0) * ed - (4.5 / 26.0) * zd * ef)
    s2 = zd * ((1.0 / 6.0) * ef + zd * (-(9.0 / 22.0) * ec + zd * (3.0 / 26.0) * ea))
    return 3.0 * sigma + power4 * (1.0 + s1 + s2) / (mu * np.sqrt(mu))


def ellint_F(z, m):
    """Incomplete elliptic integral F(z, m), argument convention, principal branch.

    F(z, m) = z * R_F(1 - z^2, 1 - m^2 z^2, 1).
    Raises SingularPathError when both quadratic factors vanish (the
    logarithmically divergent case z = +-1 with m^2 z^2 = 1).
    """
    z = np.asarray(z, dtype=np.complex128)
    m = np.asarray(m, dtype=np.complex128)
    x = 1.0 - z * z
    y = 1.0 - (m * z) ** 2
    if np.any((np.abs(x) < 1e-12) & (np.abs(y) < 1e-12)):
        raise SingularPathError("F(z, m) diverges: z^2 = 1 and m^2 z^2 = 1")
    out = z * _carlson_rf(x, y, np.ones_like(x))
    return out if (np.ndim(z) or np.ndim(m)) else complex(out)


def ellint_E2(z, m):
    """Incomplete second-kind integral E2(z, m), argument convention.

    E2(z, m) = F(z, m) - (m^2 z^3 / 3) * R_D(1 - z^2, 1 - m^2 z^2, 1).
    """
    z = np.asarray(z, dtype=np.complex128)
    m = np.asarray(m, dtype=np.complex128)
    x = 1.0 - z * z
    y = 1.0 - (m * z) ** 2
    f = z * _carlson_rf(x, y, np.ones_like(x))
    out = f - (m * m) * z ** 3 / 3.0 * _carlson_rd(x, y, np.ones_like(x))
    return out if (np.ndim(z) or np.ndim(m)) else complex(out)


# ---------------------------------------------------------------------------
# Jacobi elliptic functions
# ---------------------------------------------------------------------------


def _theta_frame(k):
    """(K, tau, nulls) for real k; the quotient frame for sn/cn/dn/zeta."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise ValueError(f"modulus k must lie in (0, 1), got {k!r}")
    K, _ = _agm(k)
    Kp, _ = _agm(float(np.sqrt(1.0 - k * k)))
    tau = complex(1j * Kp / K)
    return float(K), tau, theta_nulls(tau)


def _theta4_guarded(v, tau, t30):
    t4v = theta(4, v, tau)
    if np.any(np.abs(np.asarray(t4v)) < 1e-13 * abs(t30) ** 2):
        raise PoleError("argument too close to a lattice translate of i*K'")
    return t4v


def jacobi_sn(u, k):
    """sn(u, k) for complex u via theta quotients at v = u/(2K)."""
    K, tau, (t20, t30, t40) = _theta_frame(k)
    v = np.asarray(u, dtype=np.complex128) / (2.0 * K)
    t4v = _theta4_guarded(v, tau, t30)
    out = (t30 / t20) * theta(1, v, tau) / t4v
    return _maybe_scalar(u, out)


def jacobi_cn(u, k):
    """cn(u, k) for complex u via theta quotients at v = u/(2K)."""
    K, tau, (t20, t30, t40) = _theta_frame(k)
    v = np.asarray(u, dtype=np.complex128) / (2.0 * K)
    t4v = _theta4_guarded(v, tau, t30)
    out = (t40 / t20) * theta(2, v, tau) / t4v
    return _maybe_scalar(u, out)


def jacobi_dn(u, k):
    """dn(u, k) for complex u via theta quotients at v = u/(2K)."""
    K, tau, (t20, t30, t40) = _theta_frame(k)
    v = np.asarray(u, dtype=np.complex128) / (2.0 * K)
    t4v = _theta4_guarded(v, tau, t30)
    out = (t40 / t30) * theta(3, v, tau) / t4v
    return _maybe_scalar(u, out)


def jacobi_zeta(u, k):
    """Jacobi Zeta function Z(u, k) = theta4'(v) / (2K theta4(v)), v = u/(2K)."""
    K, tau, (t20, t30, t40) = _theta_frame(k)
    v = np.asarray(u, dtype=np.complex128) / (2.0 * K)
    t4v, d4v = theta_with_d1(4, v, tau)
    if np.any(np.abs(t4v) < 1e-13 * abs(t30) ** 2):
        raise PoleError("argument too close to a lattice translate of i*K'")
    out = d4v / (2.0 * K * t4v)
    return _maybe_scalar(u, out)


# ---------------------------------------------------------------------------
# inverse Jacobi functions
# ---------------------------------------------------------------------------


def _sn_cn_dn(u, k, K, tau, nulls):
    t20, t30, t40 = nulls
    v = u / (2.0 * K)
    t1 = complex(theta(1, v, tau))
    t2 = complex(theta(2, v, tau))
    t3 = complex(theta(3, v, tau))
    t4 = complex(theta(4, v, tau))
    sn = (t30 / t20) * t1 / t4
    cn = (t40 / t20) * t2 / t4
    dn = (t40 / t30) * t3 / t4
    return sn, cn, dn


def _newton_to(kind, w, u0, k, K, tau, nulls, cap=24):
    """Newton-refine u0 so that kind(u) = w; returns (u, ok)."""
    u = complex(u0)
    for _ in range(cap):
        sn, cn, dn = _sn_cn_dn(u, k, K, tau, nulls)
        if kind == "sn":
            f, df = sn - w, cn * dn
        elif kind == "cn":
            f, df = cn - w, -sn * dn
        else:
            f, df = dn - w, -k * k * sn * cn
        if abs(f) <= 1e-14 * max(1.0, abs(w)):
            return u, True
        if df == 0.0:
            return u, False
        step = f / df
        if abs(step) > 0.75 * K:
            step *= 0.75 * K / abs(step)
        u = u - step
    sn, cn, dn = _sn_cn_dn(u, k, K, tau, nulls)
    f = {"sn": sn, "cn": cn, "dn": dn}[kind] - w
    return u, abs(f) <= 1e-11 * max(1.0, abs(w))


def _continue_leg(kind, w_from, w_to, u_start, k, K, tau, nulls):
    """Track the inverse along the straight segment w_from -> w_to."""
    u = complex(u_start)
    Kp = K * tau.imag
    move_cap = 0.5 * min(K, Kp)
    t, dt = 0.0, 0.25
    while t < 1.0:
        dt = min(dt, 1.0 - t)
        while True:
            w_try = w_from + (t + dt) * (w_to - w_from)
            u_try, ok = _newton_to(kind, w_try, u, k, K, tau, nulls, cap=12)
            if ok and abs(u_try - u) <= move_cap:
                break
            dt *= 0.5
            if dt < 1e-12:
                raise PoleError(
                    f"inverse {kind} continuation stalled near w = {w_try!r}"
                )
        u = u_try
        t += dt
        dt *= 2.0
    return u


def _invert(kind, w, k):
    """Shared continuation driver for inv_sn / inv_cn / inv_dn (scalar w)."""
    K, tau, nulls = _theta_frame(k)
    w = complex(w)
    if kind == "sn":
        if w == 0.0:
            return 0.0 + 0.0j
        return _continue_leg("sn", 0.0, w, 0.0, k, K, tau, nulls)
    # cn and dn start at the quadratic point u = 0, w = 1
    if w == 1.0:
        return 0.0 + 0.0j
    scale = 1.0 if kind == "cn" else 1.0 / k
    if kind == "dn":
        # canonical dog-leg 1 -> -i*c -> w keeps the track continuous through
        # w = 0 (a regular value), off the critical value k', and lands the
        # w = 0 preimage on K + i*K'
        c = max(0.75, abs(w))
        wmid = -1j * c
        d = wmid - 1.0
        # dn(u) ~ 1 - k^2 u^2 / 2, principal sqrt start keeps Re(u) >= 0
        u1 = scale * np.sqrt(-2.0 * d / 64.0)
        u1, ok = _newton_to("dn", 1.0 + d / 64.0, u1, k, K, tau, nulls)
        if not ok:
            raise PoleError("inverse dn failed to leave the base point")
        u = _continue_leg("dn", 1.0 + d / 64.0, wmid, u1, k, K, tau, nulls)
        if w != wmid:
            u = _continue_leg("dn", wmid, w, u, k, K, tau, nulls)
        return u
    d = w - 1.0
    # cn(u) ~ 1 - u^2/2, so u ~ sqrt(2(1-w)); principal sqrt keeps Re(u) >= 0
    u1 = scale * np.sqrt(-2.0 * d / 64.0)
    u1, ok = _newton_to("cn", 1.0 + d / 64.0, u1, k, K, tau, nulls)
    if not ok:
        raise PoleError("inverse cn failed to leave the base point")
    return _continue_leg("cn", 1.0 + d / 64.0, w, u1, k, K, tau, nulls)


def _vectorized_invert(kind, w, k):
    w_arr = np.asarray(w, dtype=np.complex128)
    flat = w_arr.ravel()
    out = np.array([_invert(kind, wi, k) for wi in flat], dtype=np.complex128)
    out = out.reshape(w_arr.shape)
    return out if np.ndim(w) else complex(out)


def inv_sn(w, k):
    """A u with sn(u, k) = w, tracked from sn(0) = 0 along the straight path."""
    return _vectorized_invert("sn", w, k)


def inv_cn(w, k):
    """A u with cn(u, k) = w, tracked from cn(0) = 1 along the straight path."""
    return _vectorized_invert("cn", w, k)


def inv_dn(w, k):
    """A u with dn(u, k) = w, tracked 1 -> -i*c -> w.

    The dog-leg through the lower imaginary axis makes the branch continuous
    along purely imaginary w paths through w = 0, and lands inv_dn(0) on
    K + i*K'.
    """
    return _vectorized_invert("dn", w, k)

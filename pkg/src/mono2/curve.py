"""The genus-1 spectral curve behind the two-monopole field.

The curve is 0 = eta^2 + (K^2/4)(zeta^4 + 2(k^2 - k'^2) zeta^2 + 1), with
branch points +-k' +- i*k on the unit circle and cuts along the horizontal
segments joining -k'+ik to k'+ik and -k'-ik to k'-ik.  This module fixes the
two-sheet structure, evaluates the Abel map with an explicit sheet-matching
step, parameterizes the curve by theta quotients, and provides the
second-kind transcendent beta1 whose derivative is K^2 (zeta^2 - c).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .specfun import (
    Modulus,
    PoleError,
    ellint_F,
    theta,
    theta_nulls,
    theta_with_d1,
)

__all__ = [
    "CurvePoint",
    "AbelMatchError",
    "OffCurveError",
    "curve_residual",
    "eta_on_sheet",
    "sheet_of",
    "theta_param",
    "abel_map",
    "beta1",
]

#: relative tolerance for accepting a point as lying on the curve
ON_CURVE_TOL = 1e-9
#: tolerance for the candidate-shift match of the Abel map; candidates sit
#: ~0.3 apart, and the incomplete integral loses ~1e-8 of absolute accuracy
#: when zeta lands exactly on a branch point (cancellation in 1 - (mz)^2)
MATCH_TOL = 1e-7


class AbelMatchError(ValueError):
    """No candidate half-period shift reproduces the requested curve point."""


class OffCurveError(ValueError):
    """The supplied (zeta, eta) pair does not satisfy the curve equation."""


@dataclass(frozen=True)
class CurvePoint:
    """A point (zeta, eta) on the curve with its Abel image and sheet tag."""

    zeta: complex
    eta: complex
    alpha: complex
    sheet: int


def _quartic(zeta, m):
    z2 = zeta * zeta
    return z2 * z2 + 2.0 * (m.k**2 - m.kprime**2) * z2 + 1.0


def curve_residual(zeta, eta, m):
    """|eta^2 + (K^2/4) q(zeta)| scaled by max(1, |eta|^2)."""
    zeta = np.asarray(zeta, dtype=np.complex128)
    eta = np.asarray(eta, dtype=np.complex128)
    res = np.abs(eta * eta + (m.K**2 / 4.0) * _quartic(zeta, m))
    return res / np.maximum(1.0, np.abs(eta) ** 2)


def eta_on_sheet(zeta, sheet, m):
    """eta_j(zeta) = (-1)^j (iK/2) sqrt(zeta^4 + 2(k^2-k'^2) zeta^2 + 1).

    The square root is continued from zeta = 0 with its discontinuities
    exactly on the two horizontal cuts: it is assembled from two factor
    roots, each principal-branched so its cut falls on one segment,

        g1 = (zeta - ik) sqrt(1 - (k'/(zeta - ik))^2)   (cut -k'+ik .. k'+ik),
        g2 = (zeta + ik) sqrt(1 - (k'/(zeta + ik))^2)   (cut -k'-ik .. k'-ik),

    with g1*g2 = 1 at zeta = 0.
    """
    if sheet not in (1, 2):
        raise ValueError(f"sheet must be 1 or 2, got {sheet!r}")
    z = np.asarray(zeta, dtype=np.complex128)
    bp = np.array([m.a, -m.a, m.b, -m.b])
    if np.any(np.min(np.abs(z[..., None] - bp), axis=-1) < 1e-8):
        warnings.warn(
            "zeta within 1e-8 of a branch point; eta is about to vanish",
            RuntimeWarning,
            stacklevel=2,
        )
    g1 = (z - 1j * m.k) * np.sqrt(1.0 - (m.kprime / (z - 1j * m.k)) ** 2)
    g2 = (z + 1j * m.k) * np.sqrt(1.0 - (m.kprime / (z + 1j * m.k)) ** 2)
    out = (-1.0) ** sheet * 0.5j * m.K * g1 * g2
    return out if np.ndim(zeta) else complex(out)


def sheet_of(zeta, eta, m):
    """1 or 2 according to which sheet's eta is closer to the given eta."""
    e1 = eta_on_sheet(zeta, 1, m)
    d1 = np.abs(np.asarray(eta) - e1)
    d2 = np.abs(np.asarray(eta) + e1)
    out = np.where(d1 <= d2, 1, 2)
    return out if np.ndim(zeta) else int(out)


def _theta_param_raw(a, m):
    """theta_param without the pole guard; division by ~0 yields inf/nan."""
    tau = m.tau
    t20, t30, t40 = theta_nulls(tau)
    t1 = theta(1, a, tau)
    t2 = theta(2, a, tau)
    t3 = theta(3, a, tau)
    t4 = theta(4, a, tau)
    den = t1 * t3
    with np.errstate(divide="ignore", invalid="ignore"):
        zeta = -1j * t2 * t4 / den
        eta = (
            (1j * np.pi * t30 * t20**2 * t40**2 / 4.0)
            * theta(3, 2.0 * a, tau)
            / (den * den)
        )
    return zeta, eta, den, t30


def theta_param(alpha, m):
    """(zeta, eta) from the theta-function parameterization of the curve.

    zeta = -i t2(a) t4(a) / (t1(a) t3(a)),
    eta  = (i pi t3 t2^2 t4^2 / 4) t3(2a) / (t1(a)^2 t3(a)^2),
    theta constants evaluated at 0.  Lattice-periodic in alpha.
    """
    a = np.asarray(alpha, dtype=np.complex128)
    zeta, eta, den, t30 = _theta_param_raw(a, m)
    if np.any(np.abs(den) < 1e-12 * abs(t30) ** 2):
        raise PoleError("alpha too close to a preimage of zeta = infinity")
    if np.ndim(alpha):
        return zeta, eta
    return complex(zeta), complex(eta)


def _candidate_shifts(tau):
    return (0.0, 0.5, tau / 2.0, (1.0 + tau) / 2.0)


def abel_map(zeta, eta, m):
    """Abel image alpha with int_{infinity_1}^P dzeta/(4 eta) normalization.

    The incomplete-integral representation

        alpha0 = (i / (2 K b)) F(zeta/a, a/b) - tau/2

    lands on *a* preimage of zeta; the sheet and half-period are then fixed
    by trying the eight candidates {+-alpha0 + s} with
    s in {0, 1/2, tau/2, (1+tau)/2} and keeping the one whose theta
    parameterization reproduces both zeta and eta.
    """
    scalar = not (np.ndim(zeta) or np.ndim(eta))
    z = np.atleast_1d(np.asarray(zeta, dtype=np.complex128))
    e = np.atleast_1d(np.asarray(eta, dtype=np.complex128))
    z, e = np.broadcast_arrays(z, e)
    res = curve_residual(z, e, m)
    if np.any(res > ON_CURVE_TOL):
        worst = float(np.max(res))
        raise OffCurveError(f"point off the curve: residual {worst:.3e}")

    alpha0 = (0.5j / (m.K * m.b)) * ellint_F(z / m.a, m.a / m.b) - m.tau / 2.0
    cands = np.empty((8,) + z.shape, dtype=np.complex128)
    for i, s in enumerate(_candidate_shifts(m.tau)):
        cands[2 * i] = alpha0 + s
        cands[2 * i + 1] = -alpha0 + s
    zc, ec, _, _ = _theta_param_raw(cands, m)
    with np.errstate(invalid="ignore"):
        zerr = np.abs(zc - z) / np.maximum(1.0, np.abs(z))
        eerr = np.abs(ec - e) / np.maximum(1.0, np.abs(e))
        good = (zerr <= MATCH_TOL) & (eerr <= MATCH_TOL)
    pick = np.argmax(good, axis=0)
    if not np.all(np.take_along_axis(good, pick[None], axis=0)):
        bad = np.nonzero(~good.any(axis=0))[0]
        raise AbelMatchError(
            f"no candidate shift reproduces the point at flat index {bad[:4]}"
        )
    out = np.take_along_axis(cands, pick[None], axis=0)[0]
    # canonical real part in [-1/2, 1/2); integer shifts are invisible to
    # every theta quotient downstream
    out = out - np.round(out.real)
    return complex(out[0]) if scalar else out


def beta1(alpha, m):
    """Second-kind transcendent beta1 = (1/4)(t1'/t1 + t3'/t3)(alpha).

    d beta1 / d alpha = K^2 (zeta^2 - c); beta1(alpha(P0)) = i pi / 4 at the
    base branch point P0 = (k'+ik, 0 on sheet 1).
    """
    a = np.asarray(alpha, dtype=np.complex128)
    tau = m.tau
    _, t30, _ = theta_nulls(tau)
    t1, d1 = theta_with_d1(1, a, tau)
    t3, d3 = theta_with_d1(3, a, tau)
    if np.any(np.abs(t1 * t3) < 1e-12 * abs(t30) ** 2):
        raise PoleError("beta1 pole: alpha at a zero of theta1 or theta3")
    out = 0.25 * (d1 / t1 + d3 / t3)
    return out if np.ndim(alpha) else complex(out)

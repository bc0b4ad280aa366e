"""Abel images of the four roots and the transcendents mu_k.

mu_k = beta1(alpha_k) + i pi N - i xm zeta_k - x3, where alpha_k is the Abel
image of the k-th curve point and the integer N is read off from
sum(alpha) = N tau.  Each alpha_k individually carries a tau-shift freedom
that moves (mu_k, N) together; this module spends that freedom so the two
conjugation identities mu_1 + conj(mu_3) = -i pi/2 and
mu_2 + conj(mu_4) = -i pi/2 hold as exact equalities at generic points, not
just mod i pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aw import AWSolution, eta_of, zeta_derivatives
from .curve import abel_map, beta1
from .specfun import inv_cn, inv_dn, inv_sn, jacobi_zeta

__all__ = [
    "LatticeError",
    "Transcendents",
    "compute_transcendents",
    "mu_derivatives",
    "lambda_axis",
]

#: |sum(alpha) - N tau| above this aborts the point (sheet-selection failure)
LATTICE_TOL = 1e-6


class LatticeError(ArithmeticError):
    """sum of Abel images is not on the period lattice."""


@dataclass(frozen=True)
class Transcendents:
    alphas: np.ndarray
    N: int
    mus: np.ndarray
    dmu: np.ndarray | None = None
    dzeta: np.ndarray | None = None


def _xyz(x):
    from .aw import _xyz as base

    return base(x)


def _transcendents_batch(xs, zetas, etas, m, enforce=True):
    """Vectorized core: (alphas, N, mus, ok) for rows of points and roots.

    ok is False where the lattice residual exceeds LATTICE_TOL; such rows
    keep their raw values and must be discarded by the caller.
    """
    xs = np.atleast_2d(xs)
    zetas = np.atleast_2d(zetas)
    etas = np.atleast_2d(etas)
    xm = xs[:, 0] - 1j * xs[:, 1]
    x3 = xs[:, 2]
    tau = m.tau

    alphas = abel_map(zetas, etas, m)
    # spend the integer part of sum(alpha) on alpha_1: invisible downstream
    msum = np.round(alphas.sum(axis=1).real)
    alphas[:, 0] -= msum
    asum = alphas.sum(axis=1)
    n = np.round(asum.imag / tau.imag).astype(int)
    ok = np.abs(asum - n * tau) < LATTICE_TOL

    def mus_from(alphas, n):
        b = beta1(alphas, m)
        return b + 1j * np.pi * n[:, None] - 1j * xm[:, None] * zetas - x3[:, None]

    mus = mus_from(alphas, n)
    if enforce:
        # tau-shifting alpha_1 adds -i pi to mu_3, mu_4, conj side of pair
        # (1,3) only; alpha_2 likewise steers pair (2,4).  Both leave
        # sum(mu) = 3 i pi N intact.
        d13 = mus[:, 0] + np.conj(mus[:, 2]) + 0.5j * np.pi
        d24 = mus[:, 1] + np.conj(mus[:, 3]) + 0.5j * np.pi
        n1 = np.round(d13.imag / np.pi)
        n2 = np.round(d24.imag / np.pi)
        sharp = (
            (np.abs(d13 - 1j * np.pi * n1) < 1e-5)
            & (np.abs(d24 - 1j * np.pi * n2) < 1e-5)
            & ok
        )
        shift = sharp & ((n1 != 0) | (n2 != 0))
        if np.any(shift):
            alphas[shift, 0] += n1[shift] * tau
            alphas[shift, 1] += n2[shift] * tau
            n = n + np.where(shift, (n1 + n2).astype(int), 0)
            mus = mus_from(alphas, n)
    return alphas, n, mus, ok


def compute_transcendents(x, sol, m):
    """Transcendents at one spatial point from its ordered roots.

    Raises LatticeError when the Abel images do not sum to a lattice point,
    which indicates a sheet-matching failure upstream.
    """
    p = _xyz(x)
    zetas = sol.zetas if isinstance(sol, AWSolution) else np.asarray(sol[0])
    etas = sol.etas if isinstance(sol, AWSolution) else np.asarray(sol[1])
    alphas, n, mus, ok = _transcendents_batch(
        p[None, :], zetas[None, :], etas[None, :], m
    )
    if not ok[0]:
        asum = alphas[0].sum()
        raise LatticeError(f"sum of Abel images off-lattice: {asum!r}")
    return Transcendents(alphas[0], int(n[0]), mus[0])


def mu_derivatives(x, sol, m, tr=None):
    """d mu_k / d x_j, shape (..., 4, 3), by the chain rule.

    d mu = [K^2 (zeta^2 - c) / (4 eta) - i xm] d zeta - i (d xm) zeta
    - delta_{j,3}; the first bracket is d beta1 / d zeta on the curve.
    """
    p = _xyz(x)
    zetas = sol.zetas if isinstance(sol, AWSolution) else np.asarray(sol[0])
    etas = sol.etas if isinstance(sol, AWSolution) else np.asarray(sol[1])
    if np.any(np.abs(etas) < 1e-8):
        raise ArithmeticError("eta = 0: mu derivatives singular (branch point)")
    dz = zeta_derivatives(p, sol if isinstance(sol, AWSolution) else zetas, m)
    xm = p[..., 0] - 1j * p[..., 1]
    pref = m.K**2 * (zetas**2 - m.c) / (4.0 * etas) - 1j * xm[..., None]
    dxm = np.array([1.0, -1j, 0.0])
    out = pref[..., None] * dz - 1j * dxm * zetas[..., None]
    out[..., 2] -= 1.0
    return out


def lambda_axis(axis, coord, m):
    """Jacobi-Zeta representation of mu_1 restricted to a coordinate axis.

    axis 1: lambda_1 with mu_1(x1,0,0) = lambda_1 + i pi/4 (|x1| < K k/2);
    axis 2: the full value, mu_1(0,x2,0) = lambda_axis(2, x2);
    axis 3: lambda_3 with mu_1(0,0,x3) = lambda_3 + i pi/4 (x3 < K k'/2).
    """
    if axis == 1:
        u = inv_sn(2.0 * coord / (m.k * m.K), m.k)
        return 0.5 * m.K * jacobi_zeta(u, m.k)
    if axis == 2:
        # the inverse-dn branch lands on K + i K' at 0, whose half-K Zeta is
        # -i pi/4; the 2K-reflected preimage carries mu_1, hence the sign
        u = inv_dn(2j * coord / m.K, m.k)
        return -0.5 * m.K * jacobi_zeta(u, m.k)
    if axis == 3:
        u = inv_cn(2j * coord / (m.k * m.K), m.k)
        return 0.5 * m.K * jacobi_zeta(u, m.k)
    raise ValueError("axis must be 1, 2, or 3")

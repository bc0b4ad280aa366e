"""Quartic root layer: the four curve points attached to a spatial point.

Substituting eta = -i*xm*zeta^2 - 2*x3*zeta - i*xp into the curve equation
yields a quartic in zeta whose four roots come in involution pairs
zeta_3 = -1/conj(zeta_1), zeta_4 = -1/conj(zeta_2).  Roots are found by
companion-matrix eigenvalues, Newton-polished, and labeled by continuation
from the origin assignment (k'+ik, k'-ik, -k'-ik, -k'+ik) along the straight
segment to the target point.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import permutations

import numpy as np

__all__ = [
    "SpatialPoint",
    "AWSolution",
    "Degeneracy",
    "aw_coefficients",
    "eta_of",
    "solve_ordered",
    "solve_ordered_batch",
    "zeta_derivatives",
    "classify_degeneracy",
    "coefficient_gradients",
]

#: roots closer than this (or this close to a branch point) flag degeneracy
DEGENERACY_TOL = 1e-6


class Degeneracy(Enum):
    GENERIC = "generic"
    BITANGENT = "bitangent"
    BRANCH_POINT = "branch_point"


@dataclass(frozen=True)
class SpatialPoint:
    x1: float
    x2: float
    x3: float

    @property
    def xp(self):
        return complex(self.x1, self.x2)

    @property
    def xm(self):
        return complex(self.x1, -self.x2)

    @property
    def r(self):
        return float(np.sqrt(self.x1**2 + self.x2**2 + self.x3**2))


@dataclass(frozen=True)
class AWSolution:
    zetas: np.ndarray
    etas: np.ndarray
    degeneracy: Degeneracy
    min_root_gap: float


def _xyz(x):
    """(..., 3) float array from a SpatialPoint or array-like."""
    if isinstance(x, SpatialPoint):
        return np.array([x.x1, x.x2, x.x3], dtype=float)
    return np.asarray(x, dtype=float)


def aw_coefficients(x, m):
    """Quartic coefficients [c4, c3, c2, c1, c0] in descending powers.

    c4 = K^2/4 - xm^2, c3 = 4i xm x3,
    c2 = K^2(k^2 - k'^2)/2 + 4 x3^2 - 2 xp xm,
    c1 = 4i xp x3, c0 = K^2/4 - xp^2.
    """
    p = _xyz(x)
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    xp = x1 + 1j * x2
    xm = x1 - 1j * x2
    c = np.empty(p.shape[:-1] + (5,), dtype=np.complex128)
    c[..., 0] = m.K**2 / 4.0 - xm * xm
    c[..., 1] = 4j * xm * x3
    c[..., 2] = m.K**2 * (m.k**2 - m.kprime**2) / 2.0 + 4.0 * x3**2 - 2.0 * xp * xm
    c[..., 3] = 4j * xp * x3
    c[..., 4] = m.K**2 / 4.0 - xp * xp
    return c


def coefficient_gradients(x, m):
    """d c_j / d x_i for the aw_coefficients quartic, shape (..., 5, 3)."""
    p = _xyz(x)
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    xp = x1 + 1j * x2
    xm = x1 - 1j * x2
    g = np.zeros(p.shape[:-1] + (5, 3), dtype=np.complex128)
    g[..., 0, 0] = -2.0 * xm
    g[..., 0, 1] = 2j * xm
    g[..., 1, 0] = 4j * x3
    g[..., 1, 1] = 4.0 * x3
    g[..., 1, 2] = 4j * xm
    g[..., 2, 0] = -4.0 * x1
    g[..., 2, 1] = -4.0 * x2
    g[..., 2, 2] = 8.0 * x3
    g[..., 3, 0] = 4j * x3
    g[..., 3, 1] = -4.0 * x3
    g[..., 3, 2] = 4j * xp
    g[..., 4, 0] = -2.0 * xp
    g[..., 4, 1] = -2j * xp
    return g


def eta_of(zeta, x, m):
    """Mini-twistor line: eta = -i xm zeta^2 - 2 x3 zeta - i xp."""
    p = _xyz(x)
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    xm = x1 - 1j * x2
    xp = x1 + 1j * x2
    return -1j * xm * zeta**2 - 2.0 * x3 * zeta - 1j * xp


def _poly_eval(c, z):
    """Horner evaluation of descending-coefficient quartics, batched."""
    out = c[..., 0]
    for j in range(1, 5):
        out = out * z + c[..., j]
    return out


def _poly_deriv_eval(c, z):
    out = 4.0 * c[..., 0]
    for j, w in zip(range(1, 4), (3.0, 2.0, 1.0)):
        out = out * z + w * c[..., j]
    return out


def _quartic_roots(c):
    """Roots of batched monic-normalizable quartics, Newton-polished.

    c has shape (N, 5); rows with |c4| ~ 0 get their escaped root replaced by
    the asymptote -c3/c4 (inf when c4 is exactly zero).
    """
    c = np.atleast_2d(c)
    n = len(c)
    lead = c[:, 0]
    tiny = np.abs(lead) < 1e-300
    safe_lead = np.where(tiny, 1.0, lead)
    mon = c / safe_lead[:, None]
    comp = np.zeros((n, 4, 4), dtype=np.complex128)
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
    comp[:, 0, 3] = -mon[:, 4]
    comp[:, 1, 3] = -mon[:, 3]
    comp[:, 2, 3] = -mon[:, 2]
    comp[:, 3, 3] = -mon[:, 1]
    roots = np.linalg.eigvals(comp)
    if np.any(tiny):
        # degree collapse: lower-degree roots plus points at infinity
        for i in np.nonzero(tiny)[0]:
            cub = np.roots(c[i, 1:])
            roots[i, :] = np.inf
            roots[i, : len(cub)] = cub
    # two Newton sweeps; skip non-finite entries
    with np.errstate(all="ignore"):
        for _ in range(2):
            ok = np.isfinite(roots)
            z = np.where(ok, roots, 0.0)
            num = _poly_eval(c[:, None, :], z)
            den = _poly_deriv_eval(c[:, None, :], z)
            step = np.where(ok & (np.abs(den) > 1e-300), num / den, 0.0)
            step = np.where(np.isfinite(step), step, 0.0)
            roots = np.where(ok, roots - step, roots)
    return roots


_PERMS = np.array(list(permutations(range(4))))


def _chordal(a, b):
    """Riemann-sphere distance |a-b|/sqrt((1+|a|^2)(1+|b|^2)), inf-aware.

    Roots pass through zeta = infinity on the lines x2 = 0, x1^2 = K^2/4;
    the sphere metric keeps tracking and gap tests meaningful there.  The
    involution zeta -> -1/conj(zeta) is an isometry of this metric.
    """
    fa = np.isfinite(a)
    fb = np.isfinite(b)
    sa = np.sqrt(1.0 + np.abs(np.where(fa, a, 0.0)) ** 2)
    sb = np.sqrt(1.0 + np.abs(np.where(fb, b, 0.0)) ** 2)
    d = np.abs(np.where(fa, a, 0.0) - np.where(fb, b, 0.0)) / (sa * sb)
    d = np.where(fa & ~fb, 1.0 / sa, d)
    d = np.where(~fa & fb, 1.0 / sb, d)
    d = np.where(~fa & ~fb, 0.0, d)
    return d


def _match(prev, new):
    """Relabel each row of `new` to minimize total sphere distance to `prev`."""
    n = len(new)
    cost = _chordal(prev[:, :, None], new[:, None, :])
    rows = np.arange(n)[:, None, None]
    slots = np.arange(4)[None, None, :]
    tot = cost[rows, slots, _PERMS[None, :, :]].sum(axis=2)
    best = np.argmin(tot, axis=1)
    picked = new[np.arange(n)[:, None], _PERMS[best]]
    return picked, _chordal(picked, prev).max(axis=1)


def _min_gap(roots, chordal=False):
    iu, ju = np.triu_indices(4, 1)
    if chordal:
        g = _chordal(roots[..., iu], roots[..., ju])
    else:
        with np.errstate(invalid="ignore"):
            g = np.abs(roots[..., iu] - roots[..., ju])
        g = np.where(np.isfinite(g), g, 1e30)
    return g.min(axis=-1)


def _labels_by_continuation(xs, m):
    """Ordered roots at each row of xs, continued from the origin labels.

    Vectorized adaptive tracker: every point advances its own parameter
    t in [0, 1] along the straight segment t*x with its own step, halving
    the step when the matched move is too large a fraction of the current
    root separation.  Points whose step collapses are flagged.
    """
    xs = np.atleast_2d(xs)
    n = len(xs)
    labels = np.tile(
        np.array([m.a, m.b, -m.a, -m.b], dtype=np.complex128), (n, 1)
    )
    t = np.zeros(n)
    dt = np.full(n, 0.125)
    stuck = np.zeros(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    for _ in range(400):
        active = (t < 1.0) & ~stuck
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        t_try = np.minimum(t[idx] + dt[idx], 1.0)
        roots = _quartic_roots(aw_coefficients(xs[idx] * t_try[:, None], m))
        picked, move = _match(labels[idx], roots)
        gap = _min_gap(labels[idx], chordal=True)
        ok = move <= np.maximum(0.45 * gap, 1e-9)
        acc = idx[ok]
        labels[acc] = picked[ok]
        t[acc] = t_try[ok]
        dt[acc] = np.minimum(dt[acc] * 1.5, 0.25)
        rej = idx[~ok]
        dt[rej] *= 0.5
        newly_stuck = rej[dt[rej] < 1.0 / 4096.0]
        if len(newly_stuck):
            # force through the near-collision and flag it
            labels[newly_stuck] = picked[~ok][dt[rej] < 1.0 / 4096.0]
            t[newly_stuck] = t_try[~ok][dt[rej] < 1.0 / 4096.0]
            stuck[newly_stuck] = True
            dt[newly_stuck] = 0.125
    # stuck points resume plain stepping to t=1 without the gap guard
    while np.any((t < 1.0) & stuck):
        idx = np.nonzero((t < 1.0) & stuck)[0]
        t_try = np.minimum(t[idx] + dt[idx], 1.0)
        roots = _quartic_roots(aw_coefficients(xs[idx] * t_try[:, None], m))
        picked, _ = _match(labels[idx], roots)
        labels[idx] = picked
        t[idx] = t_try
    return labels, stuck


def solve_ordered_batch(xs, m):
    """(zetas, etas, degeneracy codes, min gaps) for rows of xs.

    Codes: 0 generic, 1 bitangent (root collision / stuck continuation),
    2 branch point (a root within DEGENERACY_TOL of +-k'+-ik).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    zetas, stuck = _labels_by_continuation(xs, m)
    with np.errstate(invalid="ignore", over="ignore"):
        etas = eta_of(zetas, xs[:, None, :], m)
    gaps = _min_gap(zetas)
    bp = np.array([m.a, m.b, -m.a, -m.b])
    with np.errstate(invalid="ignore"):
        bp_dist = np.abs(zetas[:, :, None] - bp[None, None, :])
    bp_dist = np.where(np.isfinite(bp_dist), bp_dist, 1e30)
    near_bp = bp_dist.min(axis=(1, 2)) < DEGENERACY_TOL
    codes = np.zeros(len(xs), dtype=int)
    codes[near_bp] = 2
    codes[(gaps < DEGENERACY_TOL) | stuck] = 1
    return zetas, etas, codes, gaps


def solve_ordered(x, m):
    """AWSolution at a single spatial point."""
    zetas, etas, codes, gaps = solve_ordered_batch(_xyz(x)[None, :], m)
    deg = (Degeneracy.GENERIC, Degeneracy.BITANGENT, Degeneracy.BRANCH_POINT)[
        codes[0]
    ]
    return AWSolution(zetas[0], etas[0], deg, float(gaps[0]))


def zeta_derivatives(x, sol, m):
    """d zeta_i / d x_j, shape (4, 3), by implicit differentiation."""
    if isinstance(sol, AWSolution) and sol.degeneracy is Degeneracy.BITANGENT:
        raise ArithmeticError("double root: zeta derivatives blow up")
    zetas = sol.zetas if isinstance(sol, AWSolution) else np.asarray(sol)
    c = aw_coefficients(x, m)
    g = coefficient_gradients(x, m)
    dPdz = _poly_deriv_eval(c[..., None, :], zetas)
    if np.any(np.abs(dPdz) < 1e-8):
        raise ArithmeticError("double root: zeta derivatives blow up")
    pows = zetas[..., None] ** np.array([4.0, 3.0, 2.0, 1.0, 0.0])
    dPdx = np.einsum("...kc,...cj->...kj", pows, g)
    return -dPdx / dPdz[..., None]


def classify_degeneracy(x, m):
    """(Degeneracy, distance) where distance is the smallest of the root
    gap, branch-point distance, and the two bitangency-curve residuals.

    The printed locus polynomials cut out curves, not surfaces: the first
    lives in the x2=0 plane, the second in the x3=0 plane, so each residual
    is combined with the distance from its plane.
    """
    p = _xyz(x)
    zetas, _, codes, gaps = solve_ordered_batch(p[None, :], m)
    x1, x2, x3 = p
    l1 = (m.K**2 * m.kprime**2 - 4 * m.kprime**2 * x1**2 - 4 * x3**2) / (
        m.K**2 * m.kprime**2
    )
    l2 = (x1**2 - (m.K**2 * m.kprime**2 + 4 * x2**2) * m.k**2 / (4 * m.kprime**2)) / m.K**2
    d1 = float(np.hypot(l1, x2))
    d2 = float(np.hypot(l2, x3))
    dist = min(float(gaps[0]), d1, d2)
    if codes[0] == 2:
        return Degeneracy.BRANCH_POINT, dist
    if codes[0] == 1 or d1 < DEGENERACY_TOL or d2 < DEGENERACY_TOL:
        return Degeneracy.BITANGENT, dist
    return Degeneracy.GENERIC, dist

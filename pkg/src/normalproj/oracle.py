"""Brute-force critical points of the squared distance function.

Damped Newton on the gradient of ``D_p(u, v) = |phi(u, v) - p|^2`` seeded
from a regular grid. Shares nothing with the cokernel/eigenvalue path; the
surface is read through its affine coefficient arrays only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .polynomial import dehomogenize
from .surface import PoleError, SurfaceParam


@dataclass
class OracleOptions:
    grid_n: int = 60
    newton_iters: int = 50
    newton_tol: float = 1e-12
    domain: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    merge_tol: float = 1e-6
    # fraction of the box added on each side when placing seeds
    seed_margin: float = 0.1
    domain_slack: float = 1e-8
    max_halvings: int = 30

    def __post_init__(self):
        if self.grid_n < 2:
            raise ValueError("grid_n must be >= 2")
        if not (self.newton_tol > 0 and self.merge_tol > 0):
            raise ValueError("tolerances must be positive")


class _Jet:
    """Affine coefficient arrays of f_0..f_3 and their derivatives up to order 2."""

    def __init__(self, s: SurfaceParam):
        deg = s.degree_d
        shape = (deg[0] + 1, deg[0] + 1) if len(deg) == 1 else (deg[0] + 1, deg[1] + 1)
        base = []
        for f in s.F:
            c = np.zeros(shape)
            for (i, j, _), val in dehomogenize(f).items():
                c[i, j] += val
            base.append(c)
        self.c = np.stack(base)  # (4, nu, nv)
        self.shape = shape
        cu = P.polyder(self.c, axis=1)
        cv = P.polyder(self.c, axis=2)
        derivs = [self.c, cu, cv, P.polyder(self.c, 2, axis=1), P.polyder(cu, axis=2), P.polyder(self.c, 2, axis=2)]
        # one coefficient matrix: (nu * nv, 6 derivatives * 4 polys)
        padded = np.zeros((6, 4) + shape)
        for k, dk in enumerate(derivs):
            padded[k, :, : dk.shape[1], : dk.shape[2]] = dk
        self.table = padded.reshape(24, -1).T

    def _all(self, u, v, nderiv):
        vander = P.polyvander2d(u, v, (self.shape[0] - 1, self.shape[1] - 1))
        out = vander @ self.table[:, : 4 * nderiv]
        return out.reshape(out.shape[:-1] + (nderiv, 4))

    def curve_terms(self, u, v, order: int = 2):
        """phi and its partial derivatives (arrays with a trailing axis of 3)."""
        vals = self._all(u, v, 3 if order == 1 else 6)
        f, fu, fv = vals[..., 0, :], vals[..., 1, :], vals[..., 2, :]
        f0 = f[..., :1]
        g = f[..., 1:] / f0
        gu = (fu[..., 1:] - g * fu[..., :1]) / f0
        gv = (fv[..., 1:] - g * fv[..., :1]) / f0
        if order == 1:
            return f0[..., 0], g, gu, gv
        fuu, fuv, fvv = vals[..., 3, :], vals[..., 4, :], vals[..., 5, :]
        guu = (fuu[..., 1:] - 2 * gu * fu[..., :1] - g * fuu[..., :1]) / f0
        gvv = (fvv[..., 1:] - 2 * gv * fv[..., :1] - g * fvv[..., :1]) / f0
        guv = (fuv[..., 1:] - gu * fv[..., :1] - gv * fu[..., :1] - g * fuv[..., :1]) / f0
        return f0[..., 0], g, gu, gv, guu, guv, gvv


def gradient_D(s: SurfaceParam, p, u: float, v: float) -> Tuple[float, float]:
    """Analytic gradient of ``|phi(u, v) - p|^2``."""
    jet = _Jet(s)
    with np.errstate(all="ignore"):
        f0, g, gu, gv = (a[0] for a in jet.curve_terms(np.array([u], float), np.array([v], float), order=1))
    scale = np.sum(np.abs(jet.c[0])) * max(1.0, abs(u), abs(v)) ** sum(s.degree_d)
    if abs(f0) <= 1e-13 * scale:
        raise PoleError(f"denominator vanishes at ({u}, {v})")
    r = g - np.asarray(p, dtype=float)
    return float(2 * r @ gu), float(2 * r @ gv)


def _grad_hess(jet: _Jet, p, u, v):
    f0, g, gu, gv, guu, guv, gvv = jet.curve_terms(u, v)
    r = g - p
    G = np.stack([np.sum(r * gu, -1), np.sum(r * gv, -1)], -1)
    huu = np.sum(gu * gu, -1) + np.sum(r * guu, -1)
    huv = np.sum(gu * gv, -1) + np.sum(r * guv, -1)
    hvv = np.sum(gv * gv, -1) + np.sum(r * gvv, -1)
    return f0, G, huu, huv, hvv


def oracle_project(s: SurfaceParam, p, opts: Optional[OracleOptions] = None) -> List[Tuple[float, float, float]]:
    """Critical points ``(u, v, distance)`` of D_p inside ``opts.domain``, sorted by distance."""
    opts = opts or OracleOptions()
    jet = _Jet(s)
    p = np.asarray(p, dtype=float)
    a, b, c, d = opts.domain
    mu, mv = opts.seed_margin * (b - a), opts.seed_margin * (d - c)
    gu_, gv_ = np.meshgrid(
        np.linspace(a - mu, b + mu, opts.grid_n), np.linspace(c - mv, d + mv, opts.grid_n), indexing="ij"
    )
    U = gu_.ravel().copy()
    V = gv_.ravel().copy()

    with np.errstate(all="ignore"):
        _, G, huu, huv, hvv = _grad_hess(jet, p, U, V)
        gnorm = np.hypot(G[:, 0], G[:, 1])
        active = np.isfinite(gnorm)
        for _ in range(opts.newton_iters):
            det = huu * hvv - huv * huv
            du = -(hvv * G[:, 0] - huv * G[:, 1]) / det
            dv = -(-huv * G[:, 0] + huu * G[:, 1]) / det
            ok = active & np.isfinite(du) & np.isfinite(dv)
            active &= ok
            if not active.any():
                break
            t = np.ones_like(U)
            pending = active.copy()
            newU, newV = U.copy(), V.copy()
            newG, nh = G.copy(), (huu.copy(), huv.copy(), hvv.copy())
            for _h in range(opts.max_halvings + 1):
                idx = np.flatnonzero(pending)
                if idx.size == 0:
                    break
                tu = U[idx] + t[idx] * du[idx]
                tv = V[idx] + t[idx] * dv[idx]
                _, Gt, a_, b_, c_ = _grad_hess(jet, p, tu, tv)
                gt = np.hypot(Gt[:, 0], Gt[:, 1])
                accept = np.isfinite(gt) & (gt <= gnorm[idx])
                acc = idx[accept]
                newU[acc], newV[acc] = tu[accept], tv[accept]
                newG[acc] = Gt[accept]
                nh[0][acc], nh[1][acc], nh[2][acc] = a_[accept], b_[accept], c_[accept]
                pending[acc] = False
                t[idx[~accept]] *= 0.5
            # seeds whose step could not be damped into descent are stuck
            active &= ~pending
            step = np.hypot(newU - U, newV - V)
            U, V, G = newU, newV, newG
            huu, huv, hvv = nh
            gnorm = np.hypot(G[:, 0], G[:, 1])
            active &= step > opts.newton_tol * (1.0 + np.hypot(U, V))
            if not active.any():
                break

        f0, g, gu, gv = jet.curve_terms(U, V, order=1)
        r = g - p
        nr = np.linalg.norm(r, axis=-1)
        scale = (1 + nr) * (1 + np.maximum(np.linalg.norm(gu, axis=-1), np.linalg.norm(gv, axis=-1)))
        rel = np.maximum(np.abs(np.sum(r * gu, -1)), np.abs(np.sum(r * gv, -1))) / scale
    e = opts.domain_slack
    good = (
        np.isfinite(rel)
        & (rel < 1e-10)
        & (np.abs(f0) > 1e-12 * np.sum(np.abs(jet.c[0])))
        & (U >= a - e) & (U <= b + e) & (V >= c - e) & (V <= d + e)
    )
    pts = sorted(zip(U[good], V[good], nr[good]))
    merged: List[Tuple[float, float, float]] = []
    for pt in pts:
        if not any(np.hypot(pt[0] - q[0], pt[1] - q[1]) < opts.merge_tol for q in merged):
            merged.append(tuple(float(x) for x in pt))
    merged.sort(key=lambda q: (q[2], q[0], q[1]))
    return merged


def match_solutions(found, expected, tol: float = 1e-5):
    """Greedy nearest matching of two (u, v) lists.

    Returns ``(matched, missed, extra)`` where ``missed`` are entries of
    ``expected`` without a partner in ``found`` and ``extra`` the converse.
    """
    found = [tuple(x[:2]) for x in found]
    left = [tuple(x[:2]) for x in expected]
    matched, extra = [], []
    for f in found:
        if left:
            dists = [np.hypot(f[0] - e[0], f[1] - e[1]) for e in left]
            k = int(np.argmin(dists))
            if dists[k] <= tol:
                matched.append((f, left.pop(k)))
                continue
        extra.append(f)
    return matched, left, extra

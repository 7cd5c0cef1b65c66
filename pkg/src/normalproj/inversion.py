"""Orthogonal projections from the cokernel of the evaluated syzygy matrix."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .congruence import build_congruence
from .grading import Monomial, SpaceKind, dehomogenized
from .surface import PoleError, SurfaceParam, eval_affine, orthogonality_residual
from .syzygy import MatrixRep, admissible_degree, build_matrix_rep

log = logging.getLogger(__name__)


class InversionError(RuntimeError):
    pass


class NeedsDegreeBump(InversionError):
    """No admissible row subset is closed under multiplication by v."""


class NonFiniteFiberError(InversionError):
    """The corank exceeds the Euclidean distance degree of the surface class."""


class HashMismatchError(InversionError):
    """The matrix representation was built for a different surface."""


def ed_degree_formula(s: SurfaceParam) -> int:
    """Euclidean distance degree of a general surface of the class of ``s``."""
    if s.kind is SpaceKind.TRIANGULAR:
        (d,) = s.degree_d
        return (2 * d - 1) ** 2 if s.is_non_rational else 7 * d * d - 9 * d + 3
    d1, d2 = s.degree_d
    if s.is_non_rational:
        return 8 * d1 * d2 - 2 * (d1 + d2) + 1
    return 14 * d1 * d2 - 6 * (d1 + d2) + 4


@dataclass
class InversionOptions:
    rank_tol: float = 1e-8
    imag_tol: float = 1e-6
    verify_tol: float = 1e-6
    # (umin, umax, vmin, vmax); None means the whole real plane
    domain: Optional[Tuple[float, float, float, float]] = (0.0, 1.0, 0.0, 1.0)
    domain_slack: float = 1e-8
    max_degree_bumps: int = 2
    # corank above the class ED degree by more than this is treated as an infinite fiber
    fiber_slack: int = 0
    dedup_tol: float = 1e-6
    cond_limit: float = 1e8

    def __post_init__(self):
        for name in ("rank_tol", "imag_tol", "verify_tol", "dedup_tol", "cond_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.domain is not None:
            a, b, c, d = self.domain
            if a > b or c > d:
                raise ValueError(f"empty parameter box {self.domain}")

    def in_domain(self, u: float, v: float) -> bool:
        if self.domain is None:
            return True
        a, b, c, d = self.domain
        e = self.domain_slack
        return a - e <= u <= b + e and c - e <= v <= d + e


@dataclass
class ProjectionResult:
    u: float
    v: float
    point: np.ndarray
    distance: float
    residual: float
    eigenvalue: complex
    multiplicity: int = 1
    low_confidence: bool = False

    @property
    def imag_part(self) -> float:
        return float(self.eigenvalue.imag)


# --- Step 1 and 2 -----------------------------------------------------------


def lift_point(p) -> np.ndarray:
    """Affine ``(x, y, z)`` -> ``(1, x, y, z)``; 4-vectors pass through."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 3:
        p = np.concatenate(([1.0], p))
    if p.size != 4:
        raise ValueError(f"expected 3 or 4 coordinates, got {p.size}")
    if not np.any(p):
        raise ValueError("the zero vector is not a projective point")
    return p


def evaluate_at(m: MatrixRep, p) -> np.ndarray:
    """``sum_i p_i M_i``."""
    return np.tensordot(lift_point(p), m.M, axes=1)


def _left_svd(A: np.ndarray, rank_tol: float):
    U, sv, _ = np.linalg.svd(A, full_matrices=True)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > rank_tol * smax)) if smax > 0 else 0
    return U, sv, rank


def corank_at(m: MatrixRep, p, rank_tol: float = 1e-8) -> int:
    _, _, rank = _left_svd(evaluate_at(m, p), rank_tol)
    return m.rows - rank


def cokernel_basis(m: MatrixRep, p, rank_tol: float = 1e-8) -> np.ndarray:
    """Rows span the left null space of ``M(p)``; columns follow ``m.row_basis``."""
    U, _, rank = _left_svd(evaluate_at(m, p), rank_tol)
    return U[:, rank:].T


# --- Step 3 -----------------------------------------------------------------


def _affine_positions(basis: Sequence[Monomial], kind: SpaceKind) -> dict:
    # (e_u, e_v) -> row; only meaningful for nu = 0 slices
    return {dehomogenized(kind, mono)[:2]: i for i, mono in enumerate(basis)}


@dataclass
class Pencil:
    M1: np.ndarray
    M2: np.ndarray
    rows: List[int]
    shifted_rows: List[int]
    # k x r map from pencil coordinates to cokernel coordinates
    frame: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.M1.shape[0]


def select_multiplication_pencil(K: np.ndarray, row_basis: Sequence[Monomial], kind: SpaceKind) -> Pencil:
    """Pick ``k`` rows ``B'`` of ``K^T`` with ``v * B'`` inside the basis.

    The subset is chosen by QR with column pivoting on the admissible
    columns of ``K``, which keeps ``M1`` as well conditioned as a greedy
    choice allows. When the admissible rows do not span the cokernel
    because some fiber points lie at infinity in the parameter domain,
    the pencil is built on the finite part only.
    """
    k = K.shape[0]
    if k == 0:
        return Pencil(np.zeros((0, 0)), np.zeros((0, 0)), [], [], np.zeros((0, 0)))
    pos = _affine_positions(row_basis, kind)
    candidates = []
    shifted = {}
    for (eu, ev), i in pos.items():
        j = pos.get((eu, ev + 1))
        if j is not None:
            candidates.append(i)
            shifted[i] = j
    candidates.sort()
    if len(candidates) < k:
        raise NeedsDegreeBump(f"only {len(candidates)} rows have a v-shift, need {k}")
    rows = _pivot_rows(K[:, candidates], k)
    if rows is None:
        return _finite_pencil(K, pos, shifted)
    rows = sorted(candidates[i] for i in rows)
    shifted_rows = [shifted[i] for i in rows]
    KT = K.T
    return Pencil(KT[rows], KT[shifted_rows], rows, shifted_rows, np.eye(k))


def _pivot_rows(sub: np.ndarray, r: int):
    # r well-separated columns of ``sub`` or None if it has rank < r
    if r == 0:
        return []
    _, R, piv = scipy.linalg.qr(sub, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size < r or diag[r - 1] <= 1e-10 * max(diag[0], 1e-300):
        return None
    return list(piv[:r])


def _finite_pencil(K: np.ndarray, pos: dict, shifted: dict, tol: float = 1e-8) -> Pencil:
    # Evaluation vectors of points at infinity (w = 0, resp. ubar = 0 or
    # vbar = 0) vanish on every row whose monomial can still be multiplied
    # by u and by v inside the basis. Restricting to those interior rows
    # keeps exactly the finite fiber points.
    k = K.shape[0]
    interior = sorted(
        i for (eu, ev), i in pos.items() if (eu, ev + 2) in pos and (eu + 1, ev + 1) in pos
    )
    boundary = sorted(i for (eu, ev), i in pos.items() if (eu + 1, ev) not in pos or (eu, ev + 1) not in pos)
    if not interior:
        raise NeedsDegreeBump("no interior rows to build a pencil on")
    U, sv, _ = np.linalg.svd(K[:, interior], full_matrices=True)
    r = int(np.sum(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0
    frame = U[:, :r]
    rest = U[:, r:]
    # the discarded directions must live on the rows at infinity
    off = np.setdiff1d(np.arange(K.shape[1]), boundary)
    leak = np.linalg.norm(rest.T @ K[:, off]) if rest.size and off.size else 0.0
    if leak > 1e-6:
        raise NeedsDegreeBump("the v-shiftable rows do not span the cokernel")
    if r == 0:
        # a whole fiber at infinity is far less likely than a too-small degree
        raise NeedsDegreeBump("no v-shiftable row sees the cokernel")
    log.debug("dropping %d fiber point(s) at infinity", k - r)
    reduced = frame.T @ K  # r x rows
    piv = _pivot_rows(reduced[:, interior], r)
    if piv is None:
        raise NeedsDegreeBump("interior rows are rank deficient")
    rows = sorted(interior[i] for i in piv)
    shifted_rows = [shifted[i] for i in rows]
    RT = reduced.T
    return Pencil(RT[rows], RT[shifted_rows], rows, shifted_rows, frame)


# --- Step 4 -----------------------------------------------------------------


def pencil_eigenvalues(M1: np.ndarray, M2: np.ndarray, cond_limit: float = 1e8):
    """Eigenpairs of ``M2 x = v M1 x``.

    Uses the standard problem on ``M1^{-1} M2`` when ``M1`` is well
    conditioned and the QZ algorithm otherwise. Returns ``(values, vectors)``
    with eigenvectors in columns.
    """
    if M1.size == 0:
        return np.zeros(0, dtype=complex), np.zeros((0, 0), dtype=complex)
    if np.linalg.cond(M1) < cond_limit:
        vals, vecs = np.linalg.eig(np.linalg.solve(M1, M2))
    else:
        vals, vecs = scipy.linalg.eig(M2, M1)
    if not np.all(np.isfinite(vals)):
        log.debug("dropping %d infinite pencil eigenvalues", int(np.sum(~np.isfinite(vals))))
        keep = np.isfinite(vals)
        vals, vecs = vals[keep], vecs[:, keep]
    return vals, vecs


# --- Step 5 -----------------------------------------------------------------


def _u_from_evaluations(y: np.ndarray, pos: dict) -> Tuple[complex, bool]:
    """u as the ratio y[u*m] / y[m] over the pair with the largest |y[m]|."""
    pairs = [(i, pos[(eu + 1, ev)]) for (eu, ev), i in pos.items() if (eu + 1, ev) in pos]
    mags = np.array([abs(y[i]) for i, _ in pairs])
    best = int(np.argmax(mags))
    i, j = pairs[best]
    u = y[j] / y[i]
    # cross-check with the literal (1, u) pair
    low_conf = False
    i0, j0 = pos[(0, 0)], pos.get((1, 0))
    if j0 is not None and abs(y[i0]) > 1e-3 * mags[best]:
        u0 = y[j0] / y[i0]
        low_conf = abs(u0 - u) > 1e-4 * (1 + abs(u))
    return u, low_conf


@dataclass
class Candidate:
    u: complex
    v: complex
    low_confidence: bool


def fiber_candidates(m: MatrixRep, p, rank_tol: float = 1e-8, cond_limit: float = 1e8) -> List[Candidate]:
    """Complex parameter pairs of the linear fiber of ``p``, unfiltered."""
    if m.mu_nu[-1] != 0:
        raise InversionError("projection needs a matrix built with nu = 0")
    K = cokernel_basis(m, p, rank_tol)
    if K.shape[0] == 0:
        return []
    pencil = select_multiplication_pencil(K, m.row_basis, m.kind)
    vals, vecs = pencil_eigenvalues(pencil.M1, pencil.M2, cond_limit)
    pos = _affine_positions(m.row_basis, m.kind)
    full = K.T @ (pencil.frame @ vecs)  # monomial values at each fiber point, up to scale
    out = []
    for group in _clusters(vals):
        if len(group) > 1:
            split = _split_cluster(full[:, group], pos, cond_limit)
            if split is not None:
                v = complex(np.mean(vals[group]))
                out.extend(Candidate(complex(u), v, False) for u in split)
                continue
        for a in group:
            u, low = _u_from_evaluations(full[:, a], pos)
            out.append(Candidate(complex(u), complex(vals[a]), low))
    return out


def _clusters(vals: np.ndarray, tol: float = 1e-6) -> List[List[int]]:
    # eigenvalues closer than tol (relative) share a v-coordinate
    order = np.argsort(vals.real, kind="stable")
    groups: List[List[int]] = []
    for a in order:
        for g in groups:
            if abs(vals[a] - vals[g[0]]) <= tol * (1 + abs(vals[g[0]])):
                g.append(int(a))
                break
        else:
            groups.append([int(a)])
    return groups


def _split_cluster(Y: np.ndarray, pos: dict, cond_limit: float):
    """u-coordinates of fiber points sharing one v, via a pencil in u.

    ``Y`` holds evaluation vectors spanning the eigenspace of the repeated
    v. Returns None when the eigenspace is deficient (a multiple point).
    """
    g = Y.shape[1]
    sv = np.linalg.svd(Y, compute_uv=False)
    if sv[-1] <= 1e-8 * sv[0]:
        return None
    cand = [i for (eu, ev), i in sorted(pos.items()) if (eu + 1, ev) in pos]
    shift = {i: pos[(eu + 1, ev)] for (eu, ev), i in pos.items() if (eu + 1, ev) in pos}
    piv = _pivot_rows(Y[cand].T, g)
    if piv is None:
        return None
    rows = [cand[i] for i in piv]
    vals, _ = pencil_eigenvalues(Y[rows], Y[[shift[i] for i in rows]], cond_limit)
    if len(vals) != g:
        return None
    return list(vals)


def _real_enough(z: complex, tol: float) -> bool:
    return abs(z.imag) <= tol * (1.0 + abs(z.real))


def project(
    m: MatrixRep,
    s: SurfaceParam,
    p,
    opts: Optional[InversionOptions] = None,
) -> List[ProjectionResult]:
    """Certified orthogonal projections of ``p`` onto the surface ``s``.

    ``p`` is an affine point or a homogeneous 4-vector. Results are sorted by
    distance; coincident solutions are merged and counted in
    ``multiplicity``.
    """
    opts = opts or InversionOptions()
    if m.meta.get("surface_hash") not in (None, s.content_hash):
        raise HashMismatchError("matrix representation does not belong to this surface")
    ph = lift_point(p)
    if ph[0] == 0:
        raise ValueError("cannot project a point at infinity")
    p_aff = ph[1:] / ph[0]
    # the entries are linear forms, so any representative works; fixing x0 = 1
    # makes lifted and affine queries numerically the same
    ph = np.concatenate(([1.0], p_aff))

    rep = m
    for bump in range(opts.max_degree_bumps + 1):
        k = corank_at(rep, ph, opts.rank_tol)
        limit = ed_degree_formula(s) + opts.fiber_slack
        if k > limit:
            raise NonFiniteFiberError(
                f"corank {k} exceeds the Euclidean distance degree {limit - opts.fiber_slack}; "
                "the point may lie on a singular locus of the normal congruence"
            )
        try:
            cands = fiber_candidates(rep, ph, opts.rank_tol, opts.cond_limit)
            break
        except NeedsDegreeBump:
            if bump == opts.max_degree_bumps:
                raise
            deg = list(rep.mu_nu)
            deg[0] += 1
            log.info("rebuilding matrix at degree %s", tuple(deg))
            rep = build_matrix_rep(build_congruence(s), tuple(deg), opts.rank_tol)

    found: List[ProjectionResult] = []
    for c in cands:
        if not (_real_enough(c.v, opts.imag_tol) and _real_enough(c.u, opts.imag_tol)):
            continue
        u, v = c.u.real, c.v.real
        if not opts.in_domain(u, v):
            continue
        try:
            res = orthogonality_residual(s, p_aff, u, v)
            q = eval_affine(s, u, v)
        except PoleError:
            continue
        if not res <= opts.verify_tol:
            log.debug("discarding ghost point (%g, %g), residual %g", u, v, res)
            continue
        found.append(
            ProjectionResult(u, v, q, float(np.linalg.norm(p_aff - q)), res, c.v, 1, c.low_confidence)
        )
    return _dedup(found, opts.dedup_tol)


def _dedup(found: List[ProjectionResult], tol: float) -> List[ProjectionResult]:
    found.sort(key=lambda r: (r.u, r.v))
    kept: List[ProjectionResult] = []
    for r in found:
        for k in kept:
            if np.hypot(r.u - k.u, r.v - k.v) < tol:
                k.multiplicity += 1
                if r.residual < k.residual:
                    k.u, k.v, k.point, k.distance, k.residual = r.u, r.v, r.point, r.distance, r.residual
                break
        else:
            kept.append(r)
    kept.sort(key=lambda r: (r.distance, r.u, r.v))
    return kept


def eddegree(s: SurfaceParam, trials: int = 5, seed=None, m: Optional[MatrixRep] = None, rank_tol: float = 1e-8) -> int:
    """Minimum corank of the matrix at ``trials`` random points of [-1, 1]^3."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if m is None:
        m = build_matrix_rep(build_congruence(s), admissible_degree(s), rank_tol)
    rng = np.random.default_rng(seed)
    return min(corank_at(m, rng.uniform(-1.0, 1.0, 3), rank_tol) for _ in range(trials))

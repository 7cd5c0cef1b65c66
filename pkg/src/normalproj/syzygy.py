"""Syzygy matrices ``M = x0 M0 + x1 M1 + x2 M2 + x3 M3`` of a congruence."""

from __future__ import annotations

import base64
import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .congruence import CongruenceMap
from .grading import (
    GradingError,
    Monomial,
    MultiDegree,
    SpaceKind,
    add_degrees,
    basis_index,
    check_degree,
    enumerate_basis,
)
from .polynomial import MultiHomogPoly, exponent_matrix, multiply
from .surface import SurfaceParam

log = logging.getLogger(__name__)

FORMAT_NAME = "normalproj-matrixrep"
FORMAT_VERSION = 1
DEFAULT_RANK_TOL = 1e-8


class FormatError(ValueError):
    """Unreadable or incompatible MatrixRep file."""


class BelowAdmissibleDegreeWarning(UserWarning):
    pass


def admissible_degree(s: SurfaceParam, mirrored: bool = False) -> MultiDegree:
    """Lowest build degree ``(mu0, 0)`` for the class of ``s``.

    Tensor-product surfaces admit two mirrored choices; the default is the
    one with the larger u-degree, ``mirrored=True`` gives the other.
    """
    if s.kind is SpaceKind.TRIANGULAR:
        (d,) = s.degree_d
        mu = 6 * d - 8 if s.is_non_rational else 9 * d - 11
        return (mu, 0)
    d1, d2 = s.degree_d
    if s.is_non_rational:
        mu = (5 * d1 - 3, 6 * d2 - 4) if mirrored else (6 * d1 - 4, 5 * d2 - 3)
    else:
        mu = (7 * d1 - 5, 9 * d2 - 7) if mirrored else (9 * d1 - 7, 7 * d2 - 5)
    return mu + (0,)


@dataclass(frozen=True, eq=False)
class SyzygySystem:
    """Matrix of ``(g_0..g_3) -> sum g_i Psi_i`` on one degree slice.

    Rows follow ``enumerate_basis(deg + delta)``; columns are four stacked
    copies of ``enumerate_basis(deg)``.
    """

    kind: SpaceKind
    degree: MultiDegree
    target_degree: MultiDegree
    S: np.ndarray


def assemble_system(c: CongruenceMap, deg: Sequence[int]) -> SyzygySystem:
    kind = c.kind
    deg = check_degree(kind, deg)
    target = add_degrees(deg, c.degree_delta)
    index = basis_index(kind, target)
    src = exponent_matrix(kind, deg)
    n = len(src)
    S = np.zeros((len(index), 4 * n))
    for i, psi in enumerate(c.psi):
        pe = exponent_matrix(kind, psi.degree)
        for t in np.flatnonzero(psi.coeffs):
            rows = [index[tuple(e)] for e in src + pe[t]]
            S[rows, i * n + np.arange(n)] += psi.coeffs[t]
    return SyzygySystem(kind, deg, target, S)


@dataclass(frozen=True, eq=False)
class MatrixRep:
    """Elimination matrix stored as its four coefficient matrices.

    ``M[i]`` has one row per monomial of ``row_basis`` and one column per
    syzygy; ``sum_i p_i M[i]`` is the matrix evaluated at ``p``.
    """

    kind: SpaceKind
    mu_nu: MultiDegree
    M: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        M = np.ascontiguousarray(self.M, dtype=np.float64)
        if M.ndim != 3 or M.shape[0] != 4:
            raise FormatError(f"expected a (4, rows, cols) array, got {M.shape}")
        if M.shape[1] != len(enumerate_basis(self.kind, self.mu_nu)):
            raise FormatError("row count does not match the degree slice")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def row_basis(self) -> Tuple[Monomial, ...]:
        return enumerate_basis(self.kind, self.mu_nu)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.M.shape[1], self.M.shape[2]

    @property
    def rows(self) -> int:
        return self.M.shape[1]

    @property
    def cols(self) -> int:
        return self.M.shape[2]

    def syzygy(self, j: int) -> Tuple[MultiHomogPoly, ...]:
        """Column ``j`` read back as polynomials ``(g_0, .., g_3)``."""
        return tuple(MultiHomogPoly(self.kind, self.mu_nu, self.M[i, :, j]) for i in range(4))


def build_matrix_rep(
    c: CongruenceMap,
    deg: Sequence[int],
    rank_tol: float = DEFAULT_RANK_TOL,
    check_admissible: bool = True,
) -> MatrixRep:
    """Orthonormal basis of the degree-``deg`` syzygies of ``c.psi``."""
    deg = check_degree(c.kind, deg)
    if check_admissible:
        mu0 = admissible_degree(c.surface)
        choices = {mu0, admissible_degree(c.surface, mirrored=True)}
        if not any(all(x >= y for x, y in zip(deg, m)) for m in choices):
            warnings.warn(
                f"degree {deg} is below the admissible degree {mu0}; coranks may be wrong",
                BelowAdmissibleDegreeWarning,
            )
    system = assemble_system(c, deg)
    S = system.S
    n = S.shape[1] // 4
    _, sv, vh = np.linalg.svd(S, full_matrices=True)
    cutoff = rank_tol * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > cutoff))
    null = vh[rank:].T
    M = null.reshape(4, n, -1)
    log.debug("syzygies at %s: system %s, rank %d, %d syzygies", deg, S.shape, rank, null.shape[1])
    meta = {
        "surface_hash": c.surface_hash,
        "delta_degree": list(c.degree_delta),
        "rank_tolerance_used": rank_tol,
    }
    return MatrixRep(c.kind, deg, M, meta)


def syzygy_residuals(m: MatrixRep, c: CongruenceMap) -> np.ndarray:
    """Relative residual ``|sum g_i Psi_i| / (|g| |Psi|)`` of every column.

    Computed by polynomial multiplication, independently of the linear
    system used to find the syzygies.
    """
    psi_norm = np.sqrt(sum(np.sum(p.coeffs ** 2) for p in c.psi))
    out = np.empty(m.cols)
    for j in range(m.cols):
        g = m.syzygy(j)
        total = multiply(g[0], c.psi[0])
        for gi, pi in zip(g[1:], c.psi[1:]):
            total = total + multiply(gi, pi)
        gnorm = np.linalg.norm(m.M[:, :, j])
        out[j] = np.linalg.norm(total.coeffs) / (gnorm * psi_norm)
    return out


# --- persistence -----------------------------------------------------------


def save_matrix_rep(m: MatrixRep, path) -> None:
    """Write a JSON document holding the header and base64 float64 payload.

    The payload is ``M0, M1, M2, M3`` concatenated, each row-major,
    little-endian IEEE-754 doubles.
    """
    payload = m.M.astype("<f8", copy=False).tobytes(order="C")
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": m.kind.value,
        "mu_nu": list(m.mu_nu),
        "rows": m.rows,
        "cols": m.cols,
        "row_basis": [list(r) for r in m.row_basis],
        "meta": m.meta,
        "dtype": "<f8",
        "data": base64.b64encode(payload).decode("ascii"),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_matrix_rep(path) -> MatrixRep:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not JSON ({exc})") from exc
    if doc.get("format") != FORMAT_NAME or doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format {doc.get('format')!r} v{doc.get('version')!r}")
    try:
        kind = SpaceKind.parse(doc["kind"])
        mu_nu = check_degree(kind, doc["mu_nu"])
        rows, cols = int(doc["rows"]), int(doc["cols"])
        basis = [tuple(r) for r in doc["row_basis"]]
        raw = base64.b64decode(doc["data"])
    except (KeyError, TypeError, ValueError, GradingError) as exc:
        raise FormatError(f"{path}: bad header ({exc})") from exc
    if basis != list(enumerate_basis(kind, mu_nu)) or rows != len(basis):
        raise FormatError(f"{path}: row basis does not match degree {mu_nu}")
    if len(raw) != 4 * rows * cols * 8:
        raise FormatError(f"{path}: payload has {len(raw)} bytes, expected {4 * rows * cols * 8}")
    M = np.frombuffer(raw, dtype="<f8").reshape(4, rows, cols)
    return MatrixRep(kind, mu_nu, M, dict(doc.get("meta", {})))

"""Homogeneous congruence of normal lines ``Psi : X x P^1 --> P^3``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .grading import Monomial, MultiDegree, SpaceKind
from .polynomial import (
    MultiHomogPoly,
    exact_divide_by_monomial,
    monomial_content,
    monomial_values,
    multiply,
)
from .surface import NormalField, SurfaceParam, reduced_minors


class DegenerateSurfaceError(ValueError):
    """The normal field of the surface vanishes identically."""


class NonGenericWarning(UserWarning):
    """The congruence does not have the degree expected for its class."""


def expected_delta(s: SurfaceParam) -> MultiDegree:
    """Generic degree ``(delta, 1)`` of the congruence after content removal."""
    if s.kind is SpaceKind.TRIANGULAR:
        (d,) = s.degree_d
        return (2 * d - 2, 1) if s.is_non_rational else (3 * d - 3, 1)
    d1, d2 = s.degree_d
    if s.is_non_rational:
        return (2 * d1 - 1, 2 * d2 - 1, 1)
    return (3 * d1 - 2, 3 * d2 - 2, 1)


@dataclass(frozen=True, eq=False)
class CongruenceMap:
    kind: SpaceKind
    psi: Tuple[MultiHomogPoly, MultiHomogPoly, MultiHomogPoly, MultiHomogPoly]
    surface: SurfaceParam
    content: Monomial

    @property
    def degree_delta(self) -> MultiDegree:
        return self.psi[0].degree

    @property
    def surface_hash(self) -> str:
        return self.surface.content_hash

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "psi": [p.to_json() for p in self.psi],
            "meta": {
                "surface_hash": self.surface_hash,
                "delta_degree": list(self.degree_delta),
                "content_removed": list(self.content),
            },
        }


def _prefactor(s: SurfaceParam) -> MultiHomogPoly:
    # tbar * w^(2d-3)  or  tbar * ubar^(2d1-2) vbar^(2d2-2)
    if s.kind is SpaceKind.TRIANGULAR:
        (d,) = s.degree_d
        mono = (2 * d - 3, 0, 0, 1, 0)
    else:
        d1, d2 = s.degree_d
        mono = (2 * d1 - 2, 0, 2 * d2 - 2, 0, 1, 0)
    return MultiHomogPoly.monomial(s.kind, mono)


def _t(kind: SpaceKind) -> MultiHomogPoly:
    return MultiHomogPoly.monomial(kind, (0,) * (kind.nvars - 1) + (1,))


def raw_congruence(s: SurfaceParam, normal: Optional[NormalField] = None, prune: float = 1e-12):
    """Congruence polynomials before the common monomial factor is removed."""
    normal = normal or reduced_minors(s)
    deltas = list(normal.deltas)
    scale = max(np.max(np.abs(d.coeffs)) for d in deltas[1:])
    if scale == 0.0:
        raise DegenerateSurfaceError("normal field is identically zero")
    for i in range(1, 4):
        c = deltas[i].coeffs.copy()
        c[np.abs(c) < prune * scale] = 0.0
        deltas[i] = MultiHomogPoly(s.kind, deltas[i].degree, c)
    pre = _prefactor(s)
    t = _t(s.kind)
    psi = [multiply(pre, s.F[0])]
    for i in range(1, 4):
        psi.append(multiply(pre, s.F[i]) + multiply(t, deltas[i]))
    return tuple(psi)


def build_congruence(s: SurfaceParam) -> CongruenceMap:
    """Congruence of normal lines of ``s`` with its monomial content divided out."""
    psi = raw_congruence(s)
    content = monomial_content(psi)
    if any(content):
        psi = tuple(exact_divide_by_monomial(p, content) for p in psi)
    c = CongruenceMap(s.kind, psi, s, content)
    if c.degree_delta != expected_delta(s):
        warnings.warn(
            f"congruence degree {c.degree_delta} differs from the generic {expected_delta(s)}",
            NonGenericWarning,
        )
    return c


@dataclass(frozen=True)
class BaseCurve:
    """Complete intersection ``(g1, g2)`` cutting the expected base curve."""

    g1_degree: MultiDegree
    g2_degree: MultiDegree

    def as_curve(self):
        """``((m1, n1), (m2, n2))`` in the form taken by ``theorem_region``."""
        def split(deg):
            m = deg[:-1]
            return (m[0] if len(m) == 1 else tuple(m), deg[-1])

        return (split(self.g1_degree), split(self.g2_degree))


def expected_base_curve(s: SurfaceParam) -> Optional[BaseCurve]:
    """Degrees of ``(g1, g2)`` for a general surface of the class of ``s``.

    Returns ``None`` when the power of the homogenizing variable is zero,
    i.e. when no curve component is expected.
    """
    if s.kind is SpaceKind.TRIANGULAR:
        (d,) = s.degree_d
        m = d - 2 if s.is_non_rational else 2 * d - 3
        if m <= 0:
            return None
        return BaseCurve((m, 0), (0, 1))
    d1, d2 = s.degree_d
    if s.is_non_rational:
        m = (d1 - 1, d2 - 1)
    else:
        m = (2 * d1 - 2, 2 * d2 - 2)
    if not any(m):
        return None
    return BaseCurve(m + (0,), (0, 0, 1))


@dataclass(frozen=True)
class BaseLocusReport:
    samples: int
    common_zero_samples: int
    content_removed: Monomial


def base_locus_diagnostic(c: CongruenceMap, samples: int = 100, rng=None, tol: float = 1e-10) -> BaseLocusReport:
    """Count random torus points of X x P^1 where all four Psi_i vanish."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(rng)
    pts = rng.standard_normal((samples, c.kind.nvars))
    vals = []
    for p in c.psi:
        mv = monomial_values(c.kind, p.degree, pts)
        bound = np.abs(mv) @ np.abs(p.coeffs)
        vals.append(np.abs(mv @ p.coeffs) / np.where(bound > 0, bound, 1.0))
    hits = np.all(np.stack(vals) <= tol, axis=0)
    return BaseLocusReport(samples, int(hits.sum()), c.content)

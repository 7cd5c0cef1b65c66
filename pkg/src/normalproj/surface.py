"""Rational surface parameterizations and their tangent-plane normal fields."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .grading import GradingError, SpaceKind, enumerate_basis
from .polynomial import (
    DivisibilityError,
    MultiHomogPoly,
    PolynomialError,
    evaluate,
    exact_divide_by_monomial,
    monomial_values,
    partial_derivative,
)


class SurfaceError(ValueError):
    """Invalid surface description."""


class PoleError(ArithmeticError):
    """The parameterization has a pole (or base point) at the query."""


class ConsistencyError(RuntimeError):
    """An identity that holds by construction failed numerically."""


def _x_degree(kind: SpaceKind, degree) -> Tuple[int, ...]:
    deg = tuple(int(x) for x in (degree if isinstance(degree, (tuple, list)) else (degree,)))
    if len(deg) == kind.arity:
        if deg[-1] != 0:
            raise SurfaceError("surface polynomials must have t-degree 0")
        deg = deg[:-1]
    if len(deg) != kind.x_arity:
        raise SurfaceError(f"bad surface degree {degree!r} for {kind.value}")
    return deg


def pure_monomial(kind: SpaceKind, xdeg: Sequence[int]) -> Tuple[int, ...]:
    """``w^d`` or ``ubar^d1 vbar^d2`` as an exponent tuple."""
    if kind is SpaceKind.TRIANGULAR:
        return (xdeg[0], 0, 0, 0, 0)
    return (xdeg[0], 0, xdeg[1], 0, 0, 0)


@dataclass(frozen=True, eq=False)
class SurfaceParam:
    """Four forms ``F_0..F_3`` on X of common degree ``degree_d``.

    ``rational`` follows the CAGD convention: ``False`` means the
    denominator is the pure power ``w^d`` (resp. ``ubar^d1 vbar^d2``), i.e.
    a polynomial parameterization.
    """

    kind: SpaceKind
    degree_d: Tuple[int, ...]
    F: Tuple[MultiHomogPoly, MultiHomogPoly, MultiHomogPoly, MultiHomogPoly]
    rational: bool = True

    def __post_init__(self):
        kind = SpaceKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        xdeg = _x_degree(kind, self.degree_d)
        object.__setattr__(self, "degree_d", xdeg)
        if kind is SpaceKind.TRIANGULAR and xdeg[0] < 2:
            raise SurfaceError("triangular surfaces need degree d >= 2")
        if kind is SpaceKind.TENSOR_PRODUCT and min(xdeg) < 1:
            raise SurfaceError("tensor-product surfaces need bidegree >= (1, 1)")
        F = tuple(self.F)
        if len(F) != 4:
            raise SurfaceError("a surface needs exactly four polynomials")
        for f in F:
            if f.kind is not kind or f.degree != self.degree:
                raise SurfaceError(f"polynomial of degree {f.degree} does not match {self.degree}")
        object.__setattr__(self, "F", F)
        if F[0].is_zero():
            raise SurfaceError("denominator F_0 is identically zero")
        if not self.rational and not self._denominator_is_pure():
            raise SurfaceError("non-rational surfaces need F_0 equal to the pure power monomial")

    def _denominator_is_pure(self) -> bool:
        terms = self.F[0].terms()
        return list(terms) == [pure_monomial(self.kind, self.degree_d)]

    @property
    def is_non_rational(self) -> bool:
        return not self.rational

    @property
    def degree(self) -> Tuple[int, ...]:
        """Full multi-degree of the F_i, including the zero t-component."""
        return self.degree_d + (0,)

    # constructors ---------------------------------------------------------

    @classmethod
    def from_affine(
        cls,
        kind,
        degree_d,
        f: Sequence[Mapping[Tuple[int, int], float]],
        rational: Optional[bool] = None,
    ) -> "SurfaceParam":
        """Homogenize affine polynomials given as ``{(i, j): c}`` for ``c u^i v^j``.

        ``f`` holds ``(f_0, f_1, f_2, f_3)``; ``rational`` defaults to
        whether ``f_0`` differs from the constant 1.
        """
        kind = SpaceKind.parse(kind)
        xdeg = _x_degree(kind, degree_d)
        polys = []
        for fi in f:
            terms = {}
            for (i, j), c in fi.items():
                terms[_homogenize(kind, xdeg, i, j)] = float(c)
            if terms:
                polys.append(MultiHomogPoly.from_terms(kind, terms))
            else:
                polys.append(MultiHomogPoly.zero(kind, xdeg + (0,)))
        if rational is None:
            rational = dict(f[0]) != {(0, 0): 1} and dict(f[0]) != {(0, 0): 1.0}
        return cls(kind, xdeg, tuple(polys), rational=rational)

    @classmethod
    def random(cls, kind, degree_d, rational: bool, rng=None, scale: float = 1.0) -> "SurfaceParam":
        """Surface with standard-normal coefficients (denominator 1 if non-rational)."""
        rng = np.random.default_rng(rng)
        kind = SpaceKind.parse(kind)
        xdeg = _x_degree(kind, degree_d)
        n = len(enumerate_basis(kind, xdeg + (0,)))
        polys = [MultiHomogPoly(kind, xdeg + (0,), scale * rng.standard_normal(n)) for _ in range(4)]
        if rational:
            # keep the denominator away from zero on the usual parameter boxes
            c = polys[0].coeffs.copy()
            c[0] += 3.0 * np.sign(c[0] or 1.0) * np.sum(np.abs(c))
            polys[0] = MultiHomogPoly(kind, xdeg + (0,), c)
        else:
            polys[0] = MultiHomogPoly.monomial(kind, pure_monomial(kind, xdeg))
        return cls(kind, xdeg, tuple(polys), rational=rational)

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "degree": list(self.degree_d),
            "rational": bool(self.rational),
            "F": [f.to_json() for f in self.F],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SurfaceParam":
        try:
            kind = SpaceKind.parse(data["kind"])
            F = tuple(MultiHomogPoly.from_json(p) for p in data["F"])
            return cls(kind, tuple(data["degree"]), F, rational=bool(data["rational"]))
        except (KeyError, TypeError, GradingError, PolynomialError) as exc:
            raise SurfaceError(f"malformed surface record: {exc}") from exc

    @classmethod
    def load(cls, path) -> "SurfaceParam":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SurfaceError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_json(data)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @cached_property
    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # affine evaluation ----------------------------------------------------

    def _point(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        one = np.ones_like(u + v)
        if self.kind is SpaceKind.TRIANGULAR:
            cols = (one, u * one, v * one, one, one)
        else:
            cols = (one, u * one, one, v * one, one, one)
        return np.stack(cols, axis=-1)

    @cached_property
    def _affine_partials(self):
        du = "u"
        dv = "v"
        return (
            tuple(partial_derivative(f, du) for f in self.F),
            tuple(partial_derivative(f, dv) for f in self.F),
        )

    def homogeneous_values(self, u, v):
        """``(f_0, f_1, f_2, f_3)`` at affine parameters, stacked on the last axis."""
        pt = self._point(u, v)
        return np.stack([evaluate(f, pt) for f in self.F], axis=-1)

    def _check_pole(self, u, v, f0):
        bound = np.abs(monomial_values(self.kind, self.degree, self._point(u, v))) @ np.abs(self.F[0].coeffs)
        if np.any(np.abs(f0) <= 1e-13 * bound) or np.any(bound == 0):
            raise PoleError(f"denominator vanishes at (u, v) = ({u}, {v})")


def _homogenize(kind: SpaceKind, xdeg, i: int, j: int) -> Tuple[int, ...]:
    if kind is SpaceKind.TRIANGULAR:
        (d,) = xdeg
        if i < 0 or j < 0 or i + j > d:
            raise SurfaceError(f"monomial u^{i} v^{j} exceeds degree {d}")
        return (d - i - j, i, j, 0, 0)
    d1, d2 = xdeg
    if not (0 <= i <= d1 and 0 <= j <= d2):
        raise SurfaceError(f"monomial u^{i} v^{j} exceeds bidegree {(d1, d2)}")
    return (d1 - i, i, d2 - j, j, 0, 0)


def eval_affine(s: SurfaceParam, u, v) -> np.ndarray:
    """phi(u, v) = (f1/f0, f2/f0, f3/f0)."""
    vals = s.homogeneous_values(u, v)
    s._check_pole(u, v, vals[..., 0])
    return vals[..., 1:] / vals[..., :1]


def eval_affine_jet(s: SurfaceParam, u: float, v: float):
    """``phi``, ``d phi/du`` and ``d phi/dv`` at one parameter point."""
    pt = s._point(u, v)
    f = np.array([evaluate(g, pt) for g in s.F])
    s._check_pole(u, v, f[0])
    du, dv = s._affine_partials
    fu = np.array([evaluate(g, pt) for g in du])
    fv = np.array([evaluate(g, pt) for g in dv])
    phi = f[1:] / f[0]
    phi_u = (fu[1:] - phi * fu[0]) / f[0]
    phi_v = (fv[1:] - phi * fv[0]) / f[0]
    return phi, phi_u, phi_v


def orthogonality_residual(s: SurfaceParam, p, u: float, v: float) -> float:
    """Scale-free measure of how far (u, v) is from a critical point of |p - phi|^2."""
    phi, phi_u, phi_v = eval_affine_jet(s, u, v)
    r = np.asarray(p, dtype=float) - phi
    nr = np.linalg.norm(r)
    ru = abs(r @ phi_u) / ((1.0 + nr) * (1.0 + np.linalg.norm(phi_u)))
    rv = abs(r @ phi_v) / ((1.0 + nr) * (1.0 + np.linalg.norm(phi_v)))
    return float(max(ru, rv))


# --- normal field ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormalField:
    """Signed tangent-plane cofactors ``(Delta_0, ..., Delta_3)``."""

    deltas: Tuple[MultiHomogPoly, MultiHomogPoly, MultiHomogPoly, MultiHomogPoly]

    @property
    def degree(self):
        return self.deltas[0].degree


def _det3(m):
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def tangent_cofactors(rows) -> Tuple[MultiHomogPoly, ...]:
    """Cofactors along a fourth row ``(x_0, .., x_3)`` of a 3x4 polynomial matrix."""
    out = []
    for i in range(4):
        cols = [j for j in range(4) if j != i]
        minor = _det3([[r[j] for j in cols] for r in rows])
        out.append(minor if (3 + i) % 2 == 0 else -minor)
    return tuple(out)


def reduced_minors(s: SurfaceParam, rel_tol: float = 1e-10) -> NormalField:
    """Tangent-plane cofactors of the Jacobian of ``F``.

    Triangular rows are ``(d/du, d/dv, d/dw)``; tensor-product rows are
    ``(d/du, d/dubar, d/dv)`` and the resulting cofactors are divided by
    ``vbar`` exactly.
    """
    if s.kind is SpaceKind.TRIANGULAR:
        rows = [[partial_derivative(f, var) for f in s.F] for var in ("u", "v", "w")]
        return NormalField(tangent_cofactors(rows))

    rows = [[partial_derivative(f, var) for f in s.F] for var in ("u", "ubar", "v")]
    raw = tangent_cofactors(rows)
    vbar = (0, 0, 1, 0, 0, 0)
    scale = max(np.max(np.abs(d.coeffs)) for d in raw)
    reduced = []
    for d in raw:
        c = d.coeffs.copy()
        c[np.abs(c) <= rel_tol * scale] = 0.0
        try:
            reduced.append(exact_divide_by_monomial(MultiHomogPoly(d.kind, d.degree, c), vbar))
        except DivisibilityError as exc:
            raise ConsistencyError(f"tangent determinant not divisible by vbar: {exc}") from exc
    return NormalField(tuple(reduced))


# --- gallery ----------------------------------------------------------------


def gallery_names():
    return sorted(p.name[:-5] for p in resources.files("normalproj.gallery").iterdir() if p.name.endswith(".json"))


def gallery(name: str) -> SurfaceParam:
    """Bundled example surface (``segre`` or ``sphere``)."""
    res = resources.files("normalproj.gallery") / f"{name}.json"
    if not res.is_file():
        raise SurfaceError(f"no bundled surface named {name!r}; have {gallery_names()}")
    return SurfaceParam.from_json(json.loads(res.read_text()))


def segre() -> SurfaceParam:
    """phi(u, v) = (u, v, uv)."""
    return SurfaceParam.from_affine(
        "tensor", (1, 1), [{(0, 0): 1}, {(1, 0): 1}, {(0, 1): 1}, {(1, 1): 1}], rational=False
    )


def unit_sphere() -> SurfaceParam:
    """Stereographic parameterization of the unit sphere."""
    return SurfaceParam.from_affine(
        "triangular",
        2,
        [
            {(0, 0): 1, (2, 0): 1, (0, 2): 1},
            {(1, 0): 2},
            {(0, 1): 2},
            {(0, 0): -1, (2, 0): 1, (0, 2): 1},
        ],
        rational=True,
    )

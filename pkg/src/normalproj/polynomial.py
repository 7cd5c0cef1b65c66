"""Dense multi-homogeneous polynomials over a single degree slice."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from .grading import (
    GradingError,
    Monomial,
    MultiDegree,
    SpaceKind,
    basis_index,
    basis_size,
    check_degree,
    dehomogenized,
    enumerate_basis,
    monomial_degree,
)


class PolynomialError(ValueError):
    """Kind/degree mismatch or an impossible polynomial operation."""


class DivisibilityError(PolynomialError):
    """A monomial division that was required to be exact is not."""


class ClampedDerivativeWarning(UserWarning):
    """Derivative taken in a block of degree 0; the result is zero."""


@lru_cache(maxsize=None)
def exponent_matrix(kind: SpaceKind, deg: MultiDegree) -> np.ndarray:
    """Integer array (basis_size, nvars) of the slice's exponents."""
    arr = np.array(enumerate_basis(kind, deg), dtype=np.int64).reshape(-1, kind.nvars)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MultiHomogPoly:
    kind: SpaceKind
    degree: MultiDegree
    coeffs: np.ndarray

    def __post_init__(self):
        deg = check_degree(self.kind, self.degree)
        object.__setattr__(self, "degree", deg)
        c = np.asarray(self.coeffs, dtype=float).copy()
        if c.shape != (basis_size(self.kind, deg),):
            raise PolynomialError(
                f"expected {basis_size(self.kind, deg)} coefficients for degree {deg}, got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, kind: SpaceKind, degree: Sequence[int]) -> "MultiHomogPoly":
        return cls(kind, tuple(degree), np.zeros(basis_size(kind, degree)))

    @classmethod
    def from_terms(cls, kind: SpaceKind, terms: Mapping[Monomial, float]) -> "MultiHomogPoly":
        """Build from ``{exponent tuple: coefficient}``; all terms must share a degree."""
        if not terms:
            raise PolynomialError("cannot infer the degree of an empty term map")
        degrees = {monomial_degree(kind, tuple(m)) for m in terms}
        if len(degrees) != 1:
            raise PolynomialError(f"terms are not multi-homogeneous: degrees {sorted(degrees)}")
        (deg,) = degrees
        index = basis_index(kind, deg)
        c = np.zeros(len(index))
        for m, val in terms.items():
            c[index[tuple(m)]] += val
        return cls(kind, deg, c)

    @classmethod
    def monomial(cls, kind: SpaceKind, mono: Monomial, coeff: float = 1.0) -> "MultiHomogPoly":
        return cls.from_terms(kind, {tuple(mono): coeff})

    # inspection -----------------------------------------------------------

    @property
    def basis(self) -> Tuple[Monomial, ...]:
        return enumerate_basis(self.kind, self.degree)

    def terms(self) -> Dict[Monomial, float]:
        return {m: float(c) for m, c in zip(self.basis, self.coeffs) if c != 0.0}

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def coefficient(self, mono: Monomial) -> float:
        idx = basis_index(self.kind, self.degree).get(tuple(mono))
        return 0.0 if idx is None else float(self.coeffs[idx])

    def pruned(self, rel_tol: float = 1e-12) -> "MultiHomogPoly":
        """Zero out coefficients below ``rel_tol`` times the largest one."""
        c = self.coeffs.copy()
        scale = np.max(np.abs(c)) if c.size else 0.0
        c[np.abs(c) < rel_tol * scale] = 0.0
        return MultiHomogPoly(self.kind, self.degree, c)

    def __repr__(self):
        terms = ", ".join(f"{c:g}*{m}" for m, c in self.terms().items())
        return f"MultiHomogPoly({self.kind.value}, {self.degree}, {{{terms}}})"

    # arithmetic -----------------------------------------------------------

    def _check_same_slice(self, other: "MultiHomogPoly"):
        if self.kind is not other.kind:
            raise PolynomialError("kind mismatch")
        if self.degree != other.degree:
            raise PolynomialError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "MultiHomogPoly") -> "MultiHomogPoly":
        self._check_same_slice(other)
        return MultiHomogPoly(self.kind, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "MultiHomogPoly") -> "MultiHomogPoly":
        self._check_same_slice(other)
        return MultiHomogPoly(self.kind, self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> "MultiHomogPoly":
        return MultiHomogPoly(self.kind, self.degree, -self.coeffs)

    def scale(self, c: float) -> "MultiHomogPoly":
        return MultiHomogPoly(self.kind, self.degree, c * self.coeffs)

    def __mul__(self, other):
        if isinstance(other, MultiHomogPoly):
            return multiply(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def allclose(self, other: "MultiHomogPoly", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        if self.kind is not other.kind or self.degree != other.degree:
            return False
        scale = max(np.max(np.abs(self.coeffs), initial=0.0), np.max(np.abs(other.coeffs), initial=0.0))
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= atol + rtol * scale))

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "degree": list(self.degree), "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiHomogPoly":
        try:
            kind = SpaceKind.parse(data["kind"])
            return cls(kind, tuple(data["degree"]), np.asarray(data["coeffs"], dtype=float))
        except (KeyError, TypeError, GradingError) as exc:
            raise PolynomialError(f"malformed polynomial record: {exc}") from exc


def multiply(a: MultiHomogPoly, b: MultiHomogPoly) -> MultiHomogPoly:
    if a.kind is not b.kind:
        raise PolynomialError("kind mismatch")
    kind = a.kind
    deg = tuple(x + y for x, y in zip(a.degree, b.degree))
    index = basis_index(kind, deg)
    out = np.zeros(len(index))
    ea = exponent_matrix(kind, a.degree)
    eb = exponent_matrix(kind, b.degree)
    ia = np.flatnonzero(a.coeffs)
    ib = np.flatnonzero(b.coeffs)
    for i in ia:
        ca = a.coeffs[i]
        for j in ib:
            out[index[tuple(ea[i] + eb[j])]] += ca * b.coeffs[j]
    return MultiHomogPoly(kind, deg, out)


def partial_derivative(a: MultiHomogPoly, variable: Union[str, int]) -> MultiHomogPoly:
    """Derivative with respect to ``variable`` (name or index).

    Differentiating in a block of degree 0 returns the zero polynomial in the
    same (clamped) degree and emits :class:`ClampedDerivativeWarning`.
    """
    kind = a.kind
    var = kind.var_index(variable) if isinstance(variable, str) else int(variable)
    if not 0 <= var < kind.nvars:
        raise PolynomialError(f"variable index {var} out of range")
    block = kind.block_of(var)
    if a.degree[block] == 0:
        warnings.warn(
            f"derivative in {kind.variables[var]} of a block of degree 0", ClampedDerivativeWarning
        )
        return MultiHomogPoly.zero(kind, a.degree)
    deg = tuple(k - 1 if b == block else k for b, k in enumerate(a.degree))
    index = basis_index(kind, deg)
    out = np.zeros(len(index))
    exps = exponent_matrix(kind, a.degree)
    for i in np.flatnonzero(a.coeffs):
        e = exps[i]
        if e[var] == 0:
            continue
        m = list(e)
        m[var] -= 1
        out[index[tuple(m)]] += e[var] * a.coeffs[i]
    return MultiHomogPoly(kind, deg, out)


def monomial_values(kind: SpaceKind, deg: Sequence[int], point) -> np.ndarray:
    """Values of every basis monomial of ``deg`` at ``point``."""
    point = np.asarray(point)
    if point.shape[-1] != kind.nvars:
        raise PolynomialError(f"point needs {kind.nvars} coordinates")
    exps = exponent_matrix(kind, tuple(deg))
    return np.prod(point[..., None, :] ** exps, axis=-1)


def evaluate(a: MultiHomogPoly, point):
    """Value of ``a`` at ``point`` (one scalar per variable; may be batched)."""
    return monomial_values(a.kind, a.degree, point) @ a.coeffs


def monomial_content(polys: Iterable[MultiHomogPoly]) -> Monomial:
    """Largest monomial dividing every term of every polynomial."""
    polys = list(polys)
    content = None
    for p in polys:
        nz = np.flatnonzero(p.coeffs)
        if nz.size == 0:
            continue
        low = exponent_matrix(p.kind, p.degree)[nz].min(axis=0)
        content = low if content is None else np.minimum(content, low)
    if content is None:
        raise PolynomialError("monomial content of zero polynomials is undefined")
    return tuple(int(x) for x in content)


def exact_divide_by_monomial(a: MultiHomogPoly, m: Monomial) -> MultiHomogPoly:
    m = np.asarray(m, dtype=np.int64)
    kind = a.kind
    deg = monomial_degree(kind, tuple(int(x) for x in m))
    qdeg = tuple(x - y for x, y in zip(a.degree, deg))
    if any(x < 0 for x in qdeg):
        if a.is_zero():
            raise DivisibilityError(f"divisor degree {deg} exceeds {a.degree}")
        raise DivisibilityError(f"monomial {tuple(m)} does not divide a polynomial of degree {a.degree}")
    index = basis_index(kind, qdeg)
    out = np.zeros(len(index))
    exps = exponent_matrix(kind, a.degree)
    for i in np.flatnonzero(a.coeffs):
        q = exps[i] - m
        if np.any(q < 0):
            raise DivisibilityError(
                f"term {tuple(exps[i])} is not divisible by {tuple(m)}"
            )
        out[index[tuple(q)]] = a.coeffs[i]
    return MultiHomogPoly(kind, qdeg, out)


def dehomogenize(a: MultiHomogPoly) -> Dict[Tuple[int, int, int], float]:
    """Affine coefficients keyed by ``(e_u, e_v, e_t)``, in canonical order."""
    out: Dict[Tuple[int, int, int], float] = {}
    for mono, c in zip(a.basis, a.coeffs):
        if c == 0.0:
            continue
        key = dehomogenized(a.kind, mono)
        out[key] = out.get(key, 0.0) + float(c)
    return out

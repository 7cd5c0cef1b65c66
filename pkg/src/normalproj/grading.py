"""Multi-degree bookkeeping over P^2 x P^1 and P^1 x P^1 x P^1.

Monomials are plain tuples of exponents in the variable order of the
ambient space:

* triangular:      ``(w, u, v, tbar, t)``
* tensor product:  ``(ubar, u, vbar, v, tbar, t)``

A multi-degree is a tuple with one entry per block of variables:
``(deg_X, deg_t)`` for triangular and ``(deg_u, deg_v, deg_t)`` for tensor
product spaces.

Within a degree slice monomials are sorted by their dehomogenized exponents
``(e_v, e_u, e_t)`` in ascending lexicographic order, so the slice reads
``1, u, u^2, ..., v, vu, ..., v^2, ...`` with the t-exponent as the least
significant key.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Optional, Sequence, Tuple

MultiDegree = Tuple[int, ...]
Monomial = Tuple[int, ...]


class GradingError(ValueError):
    """Invalid degree, arity or region request."""


class SpaceKind(enum.Enum):
    TRIANGULAR = "triangular"
    TENSOR_PRODUCT = "tensor"

    @property
    def block_sizes(self) -> Tuple[int, ...]:
        if self is SpaceKind.TRIANGULAR:
            return (3, 2)
        return (2, 2, 2)

    @property
    def variables(self) -> Tuple[str, ...]:
        if self is SpaceKind.TRIANGULAR:
            return ("w", "u", "v", "tbar", "t")
        return ("ubar", "u", "vbar", "v", "tbar", "t")

    @property
    def arity(self) -> int:
        """Number of components of a multi-degree."""
        return len(self.block_sizes)

    @property
    def nvars(self) -> int:
        return sum(self.block_sizes)

    @property
    def x_arity(self) -> int:
        """Number of degree components carried by the surface factor X."""
        return self.arity - 1

    def var_index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise GradingError(f"{name!r} is not a variable of {self.value}") from None

    def block_of(self, var: int) -> int:
        """Index of the degree block containing variable number ``var``."""
        start = 0
        for b, size in enumerate(self.block_sizes):
            if var < start + size:
                return b
            start += size
        raise GradingError(f"variable index {var} out of range")

    @classmethod
    def parse(cls, value) -> "SpaceKind":
        if isinstance(value, SpaceKind):
            return value
        aliases = {
            "triangular": cls.TRIANGULAR,
            "tensor": cls.TENSOR_PRODUCT,
            "tensor_product": cls.TENSOR_PRODUCT,
            "tensorproduct": cls.TENSOR_PRODUCT,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise GradingError(f"unknown space kind {value!r}") from None


def check_degree(kind: SpaceKind, deg: Sequence[int]) -> MultiDegree:
    deg = tuple(int(x) for x in deg)
    if len(deg) != kind.arity:
        raise GradingError(f"{kind.value} degrees have {kind.arity} components, got {deg}")
    if any(x < 0 for x in deg):
        raise GradingError(f"negative degree component in {deg}")
    return deg


def basis_size(kind: SpaceKind, deg: Sequence[int]) -> int:
    """Number of multi-homogeneous monomials of multi-degree ``deg``."""
    deg = check_degree(kind, deg)
    n = 1
    for k, size in zip(deg, kind.block_sizes):
        n *= comb(k + size - 1, size - 1)
    return n


def _block_exponents(k: int, size: int) -> Iterable[Tuple[int, ...]]:
    # all exponent vectors of length ``size`` summing to k
    for cut in itertools.combinations(range(k + size - 1), size - 1):
        prev = -1
        out = []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(k + size - 2 - prev)
        yield tuple(out)


def sort_key(kind: SpaceKind, mono: Monomial) -> Tuple[int, int, int]:
    """Canonical ordering key ``(e_v, e_u, e_t)`` of a monomial."""
    if kind is SpaceKind.TRIANGULAR:
        _, eu, ev, _, et = mono
    else:
        _, eu, _, ev, _, et = mono
    return (ev, eu, et)


@lru_cache(maxsize=None)
def _basis(kind: SpaceKind, deg: MultiDegree) -> Tuple[Monomial, ...]:
    blocks = [list(_block_exponents(k, s)) for k, s in zip(deg, kind.block_sizes)]
    monos = [sum(parts, ()) for parts in itertools.product(*blocks)]
    monos.sort(key=lambda m: sort_key(kind, m))
    return tuple(monos)


def enumerate_basis(kind: SpaceKind, deg: Sequence[int]) -> Tuple[Monomial, ...]:
    """Monomials of multi-degree ``deg`` in canonical order."""
    return _basis(kind, check_degree(kind, deg))


@lru_cache(maxsize=None)
def _index(kind: SpaceKind, deg: MultiDegree) -> dict:
    return {m: i for i, m in enumerate(_basis(kind, deg))}


def basis_index(kind: SpaceKind, deg: Sequence[int]) -> dict:
    """Map monomial -> position in ``enumerate_basis(kind, deg)``."""
    return _index(kind, check_degree(kind, deg))


def monomial_degree(kind: SpaceKind, mono: Monomial) -> MultiDegree:
    if len(mono) != kind.nvars:
        raise GradingError(f"monomial {mono} has wrong length for {kind.value}")
    out = []
    start = 0
    for size in kind.block_sizes:
        out.append(sum(mono[start:start + size]))
        start += size
    return tuple(out)


def dehomogenized(kind: SpaceKind, mono: Monomial) -> Tuple[int, int, int]:
    """Exponents ``(e_u, e_v, e_t)`` left after setting homogenizing variables to 1."""
    ev, eu, et = sort_key(kind, mono)
    return (eu, ev, et)


def add_degrees(a: Sequence[int], b: Sequence[int]) -> MultiDegree:
    if len(a) != len(b):
        raise GradingError(f"arity mismatch: {tuple(a)} vs {tuple(b)}")
    return tuple(x + y for x, y in zip(a, b))


# --- degree regions ------------------------------------------------------

Corner = Tuple[Optional[int], ...]


@dataclass(frozen=True)
class DegreeRegion:
    """Union of up-sets E(corner); a ``None`` component means unbounded below."""

    corners: Tuple[Corner, ...]

    def __post_init__(self):
        arities = {len(c) for c in self.corners}
        if len(arities) > 1:
            raise GradingError(f"corners of mixed arity: {self.corners}")

    @property
    def arity(self) -> Optional[int]:
        return len(self.corners[0]) if self.corners else None

    def contains(self, deg: Sequence[int]) -> bool:
        return region_contains(self, deg)


def _dominates(deg: Sequence[int], corner: Corner) -> bool:
    return all(c is None or z >= c for z, c in zip(deg, corner))


def region_contains(region: DegreeRegion, deg: Sequence[int]) -> bool:
    """True iff ``deg`` dominates at least one corner component-wise."""
    if region.arity is not None and len(deg) != region.arity:
        raise GradingError(f"degree {tuple(deg)} does not match region arity {region.arity}")
    return any(_dominates(deg, c) for c in region.corners)


def intersect_corners(a: Corner, b: Corner) -> Corner:
    """Corner of E(a) ∩ E(b)."""
    if len(a) != len(b):
        raise GradingError("arity mismatch")
    out = []
    for x, y in zip(a, b):
        if x is None:
            out.append(y)
        elif y is None:
            out.append(x)
        else:
            out.append(max(x, y))
    return tuple(out)


def theorem_region(kind: SpaceKind, d: Sequence[int], e: int, curve=None) -> DegreeRegion:
    """Degrees where the corank of the syzygy matrix is stabilized.

    Parameters
    ----------
    kind : SpaceKind
    d : sequence of int
        X-degree of the congruence polynomials (one entry for triangular,
        two for tensor product).
    e : int
        Degree of the congruence polynomials in ``(tbar, t)``.
    curve : optional
        ``((m1, n1), (m2, n2))`` degrees of a regular sequence cutting the
        curve component of the base locus; ``m_i`` is an int (triangular)
        or a pair (tensor product).
    """
    d = tuple(int(x) for x in (d if isinstance(d, (tuple, list)) else (d,)))
    if len(d) != kind.x_arity:
        raise GradingError(f"X-degree {d} has wrong arity for {kind.value}")
    if any(x < 1 for x in d) or e < 1:
        raise GradingError("degrees must be positive")

    if curve is None:
        eta = 0
        tau = (0,) * len(d)
        shift_p2 = 0
    else:
        (m1, n1), (m2, n2) = curve
        m1 = tuple(m1) if isinstance(m1, (tuple, list)) else (m1,)
        m2 = tuple(m2) if isinstance(m2, (tuple, list)) else (m2,)
        if len(m1) != len(d) or len(m2) != len(d):
            raise GradingError("curve degrees do not match the X arity")
        if any(not 0 <= m <= di for m, di in zip(m1 + m2, d + d)):
            raise GradingError("curve degrees must satisfy 0 <= m_i <= d")
        eta = max(e - n1 - n2, 0)
        tau = tuple(
            di - min(2 * a + b, a + 2 * b, di) for di, a, b in zip(d, m1, m2)
        )
        shift_p2 = d[0] - min(m1[0], m2[0])

    if kind is SpaceKind.TRIANGULAR:
        (dd,) = d
        corners = (
            (3 * dd - 2, e - 1 + eta),
            (2 * dd - 2 + shift_p2, 3 * e - 1),
        )
    else:
        d1, d2 = d
        t1, t2 = tau
        corners = (
            (3 * d1 - 1, 2 * d2 - 1 + t2, e - 1 + eta),
            (2 * d1 - 1 + t1, 3 * d2 - 1, e - 1 + eta),
            (2 * d1 - 1 + t1, 2 * d2 - 1 + t2, 3 * e - 1),
        )
    return DegreeRegion(corners)

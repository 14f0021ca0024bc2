"""
Tropical Analysis Tool

This module provides valuations, the tropicalization of a characteristic
polynomial, tropical roots (bend locus) and the EP-order classification
derived from them. Everything here is exact: intercepts are integers or
infinity and roots are Fractions.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from app.errors import InputError
from app.tools.poly import BiPoly, UniPoly

# Set up logging
logger = logging.getLogger(__name__)

INFINITY = math.inf

Valuation = Union[int, float]  # int, or math.inf for the zero polynomial
ExtendedReal = Union[int, float, Fraction]


def valuation(u: UniPoly) -> Valuation:
    """Least nu-exponent of u; infinity for the zero polynomial."""
    if u.is_zero():
        return INFINITY
    return min(u.terms)


def _check_extended(value: ExtendedReal) -> None:
    if isinstance(value, float) and (math.isnan(value) or value == -math.inf):
        raise InputError(f"tropical values live in R plus infinity, got {value!r}")


def trop_semiring(a: ExtendedReal, b: ExtendedReal) -> Tuple[ExtendedReal, ExtendedReal]:
    """Return (a ⊕ b, a ⊙ b) = (min(a, b), a + b) with infinity as the ⊕ identity."""
    _check_extended(a)
    _check_extended(b)
    if a == INFINITY or b == INFINITY:
        return (b if a == INFINITY else a), INFINITY
    return min(a, b), a + b


def tropical_add(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    return trop_semiring(a, b)[0]


def tropical_mul(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    return trop_semiring(a, b)[1]


@dataclass(frozen=True)
class TropicalPolynomial:
    """The min-plus function min_i(c_i + i*omega) as (i, c_i) terms ordered by i."""

    terms: Tuple[Tuple[int, Valuation], ...]

    def __post_init__(self):
        terms = tuple(sorted((int(i), c) for i, c in self.terms))
        exponents = [i for i, _ in terms]
        if len(set(exponents)) != len(exponents):
            raise InputError(f"tropical terms must have distinct exponents, got {exponents}")
        if any(i < 0 for i in exponents):
            raise InputError("tropical exponents must be non-negative")
        if not any(c != INFINITY for _, c in terms):
            raise InputError("a tropical polynomial needs at least one finite term")
        object.__setattr__(self, "terms", terms)

    @property
    def finite_terms(self) -> List[Tuple[int, int]]:
        return [(i, c) for i, c in self.terms if c != INFINITY]

    def __call__(self, omega: ExtendedReal) -> Fraction:
        return trop_eval(self, omega)

    def render(self, symbol: str = "ω") -> str:
        """Min-plus expression in ascending exponent order, e.g. ``min(1, 2ω)``."""
        pieces = []
        for i, c in self.finite_terms:
            if i == 0:
                pieces.append(str(c))
                continue
            slope = symbol if i == 1 else f"{i}{symbol}"
            pieces.append(slope if c == 0 else f"{slope}+{c}")
        if len(pieces) == 1:
            return pieces[0]
        return f"min({', '.join(pieces)})"


@dataclass(frozen=True)
class TropicalRoot:
    """A point of the bend locus with its multiplicity (hull edge width)."""

    value: Fraction
    multiplicity: int

    def render(self) -> str:
        return f"{self.value} (multiplicity {self.multiplicity})"


class EPKind(str, Enum):
    ORDER = "order"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EPClassification:
    kind: EPKind
    order: Optional[int]
    roots: Tuple[TropicalRoot, ...]

    @property
    def is_exceptional(self) -> bool:
        return self.kind is EPKind.ORDER and self.order >= 2

    def describe(self) -> str:
        if self.kind is EPKind.DEGENERATE:
            return "degenerate point (no non-zero tropical root)"
        if self.order == 1:
            return "analytic splitting (order 1; not an EP)"
        return f"EP order {self.order}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "order": self.order,
            "roots": [{"value": str(r.value), "multiplicity": r.multiplicity} for r in self.roots],
        }


def tropicalize(p: BiPoly) -> TropicalPolynomial:
    """Tropicalize p = sum_i a_i(nu) lambda^i into min_i(val(a_i) + i*omega)."""
    if p.is_zero():
        raise InputError("tropicalization of the zero polynomial is undefined")
    return TropicalPolynomial(
        tuple((i, valuation(p.lambda_coefficient(i))) for i in p.lambda_support)
    )


def trop_eval(tropical: TropicalPolynomial, omega: ExtendedReal) -> Fraction:
    """Exact value of the tropical polynomial at omega."""
    omega = Fraction(omega)
    return min(Fraction(c) + i * omega for i, c in tropical.finite_terms)


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(points: Sequence[Tuple[int, ExtendedReal]]) -> List[Tuple[int, ExtendedReal]]:
    """
    Lower convex hull by the monotone chain, left to right.

    Collinear interior points are dropped so every returned edge is maximal.
    """
    hull: List[Tuple[int, ExtendedReal]] = []
    for point in sorted(points):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) <= 0:
            hull.pop()
        hull.append(point)
    return hull


def tropical_roots(tropical: TropicalPolynomial) -> List[TropicalRoot]:
    """
    Tropical roots with multiplicities, sorted ascending.

    Each lower-hull edge of {(i, c_i)} contributes its negated slope as a
    root and its horizontal width as the multiplicity.
    """
    hull = lower_hull([(i, Fraction(c)) for i, c in tropical.finite_terms])
    roots = [
        TropicalRoot(-(c2 - c1) / (i2 - i1), i2 - i1)
        for (i1, c1), (i2, c2) in zip(hull, hull[1:])
    ]
    return sorted(roots, key=lambda root: root.value)


def bend_points(tropical: TropicalPolynomial) -> List[Fraction]:
    """All omega where the minimum is attained by two or more terms (brute force)."""
    terms = tropical.finite_terms
    found = set()
    for a, (i, c) in enumerate(terms):
        for j, d in terms[a + 1:]:
            omega = Fraction(c - d, j - i)
            if Fraction(c) + i * omega == trop_eval(tropical, omega):
                found.add(omega)
    return sorted(found)


def ep_order(tropical: TropicalPolynomial) -> EPClassification:
    """
    Classify nu = 0 from the tropical roots.

    The order is the largest denominator among the non-zero roots; with no
    non-zero root the point is degenerate.
    """
    roots = tuple(tropical_roots(tropical))
    non_zero = [root for root in roots if root.value != 0]
    if not non_zero:
        return EPClassification(EPKind.DEGENERATE, None, roots)
    order = max(root.value.denominator for root in non_zero)
    return EPClassification(EPKind.ORDER, order, roots)


def classify(p: BiPoly) -> EPClassification:
    """Shortcut for ``ep_order(tropicalize(p))``."""
    return ep_order(tropicalize(p))

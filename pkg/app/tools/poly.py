"""
Exact Polynomial Tool

This module provides the exact coefficient field (Gaussian rationals) and the
sparse univariate and bivariate polynomials used throughout the analyzer.
Univariate polynomials live in the perturbation variable nu; bivariate
polynomials carry exponent pairs (i, k) meaning lambda^i * nu^k.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
import sympy

from app.errors import InputError

# Set up logging
logger = logging.getLogger(__name__)

RationalLike = Union[int, str, float, Fraction]
Exponents = Tuple[int, int]

_NU = sympy.Symbol("nu")
_PARSE_LOCALS = {"nu": _NU, "i": sympy.I, "I": sympy.I}


def parse_rational(value: RationalLike) -> Fraction:
    """
    Convert user input into an exact rational.

    Args:
        value: An int, a Fraction, a string such as "3", "-1/2" or "0.577",
            or a float (read through its shortest decimal representation)

    Returns:
        The value as a reduced Fraction
    """
    if isinstance(value, bool):
        raise InputError(f"expected a rational number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"expected a finite number, got {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"cannot read {value!r} as a rational number") from e
    raise InputError(f"expected a rational number, got {type(value).__name__}")


def _format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class GaussianRational:
    """A complex number with exact rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", parse_rational(self.re))
        object.__setattr__(self, "im", parse_rational(self.im))

    @classmethod
    def coerce(cls, value: Union["GaussianRational", RationalLike]) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        return cls(parse_rational(value))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except InputError:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except InputError:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except InputError:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except InputError:
            return NotImplemented
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by a zero Gaussian rational")
        product = self * other.conjugate()
        return GaussianRational(product.re / norm, product.im / norm)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        imag = "i" if self.im == 1 else "-i" if self.im == -1 else f"{self.im}*i"
        if not self.re:
            return imag
        sign = "+" if self.im > 0 else "-"
        magnitude = "i" if abs(self.im) == 1 else f"{abs(self.im)}*i"
        return f"({self.re} {sign} {magnitude})"


ZERO = GaussianRational()
ONE = GaussianRational(1)
IMAG_UNIT = GaussianRational(0, 1)

Scalar = Union[GaussianRational, RationalLike]


def _clean(terms: Iterable[Tuple[object, Scalar]], key_check) -> Dict:
    cleaned: Dict = {}
    for key, coef in terms:
        key_check(key)
        value = cleaned.get(key, ZERO) + GaussianRational.coerce(coef)
        if value:
            cleaned[key] = value
        else:
            cleaned.pop(key, None)
    return dict(sorted(cleaned.items()))


def _check_exponent(exponent) -> None:
    if isinstance(exponent, bool) or not isinstance(exponent, int) or exponent < 0:
        raise InputError(f"exponents must be non-negative integers, got {exponent!r}")


def _check_pair(pair) -> None:
    if not isinstance(pair, tuple) or len(pair) != 2:
        raise InputError(f"expected an exponent pair (i, k), got {pair!r}")
    _check_exponent(pair[0])
    _check_exponent(pair[1])


class UniPoly:
    """
    Sparse univariate polynomial over the Gaussian rationals.

    The variable is nu unless stated otherwise (``BiPoly.nu_coefficient``
    returns polynomials in lambda with the same representation).
    """

    __slots__ = ("_terms", "_dense")

    def __init__(self, terms: Optional[Mapping[int, Scalar]] = None):
        self._terms = _clean((terms or {}).items(), _check_exponent)
        self._dense: Optional[np.ndarray] = None

    @classmethod
    def constant(cls, value: Scalar) -> "UniPoly":
        return cls({0: value})

    @classmethod
    def monomial(cls, exponent: int, coefficient: Scalar = ONE) -> "UniPoly":
        return cls({exponent: coefficient})

    @property
    def terms(self) -> Mapping[int, GaussianRational]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        """Highest exponent, or -1 for the zero polynomial."""
        return max(self._terms) if self._terms else -1

    @property
    def support(self) -> List[int]:
        return list(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, exponent: int) -> GaussianRational:
        return self._terms.get(exponent, ZERO)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "UniPoly":
        return UniPoly({e: -c for e, c in self._terms.items()})

    def __add__(self, other) -> "UniPoly":
        other = _as_unipoly(other)
        if other is None:
            return NotImplemented
        merged = dict(self._terms)
        for e, c in other._terms.items():
            merged[e] = merged.get(e, ZERO) + c
        return UniPoly(merged)

    __radd__ = __add__

    def __sub__(self, other) -> "UniPoly":
        other = _as_unipoly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "UniPoly":
        return -self + other

    def __mul__(self, other) -> "UniPoly":
        other = _as_unipoly(other)
        if other is None:
            return NotImplemented
        product: Dict[int, GaussianRational] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                product[e1 + e2] = product.get(e1 + e2, ZERO) + c1 * c2
        return UniPoly(product)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Scalar) -> "UniPoly":
        divisor = GaussianRational.coerce(scalar)
        return UniPoly({e: c / divisor for e, c in self._terms.items()})

    def __call__(self, value: complex) -> complex:
        """Evaluate at a floating complex point (Horner scheme)."""
        if self._dense is None:
            dense = np.zeros(self.degree + 1, dtype=complex)
            for e, c in self._terms.items():
                dense[e] = complex(c)
            self._dense = dense
        result = 0j
        for coef in self._dense[::-1]:
            result = result * value + coef
        return complex(result)

    def __str__(self) -> str:
        return format_unipoly(self)

    def __repr__(self) -> str:
        return f"UniPoly({format_unipoly(self)!r})"


def _as_unipoly(value) -> Optional[UniPoly]:
    if isinstance(value, UniPoly):
        return value
    try:
        return UniPoly.constant(GaussianRational.coerce(value))
    except InputError:
        return None


NU = UniPoly.monomial(1)


def format_unipoly(poly: UniPoly, variable: str = "nu") -> str:
    """Render a UniPoly as text that ``parse_unipoly`` reads back."""
    if poly.is_zero():
        return "0"
    pieces = []
    for exponent in sorted(poly.terms, reverse=True):
        coef = poly.terms[exponent]
        power = "" if exponent == 0 else variable if exponent == 1 else f"{variable}^{exponent}"
        if not power:
            pieces.append(str(coef))
        elif coef == ONE:
            pieces.append(power)
        elif coef == -ONE:
            pieces.append(f"-{power}")
        else:
            pieces.append(f"{coef}*{power}")
    return " + ".join(pieces)


def _sympy_to_fraction(value: sympy.Expr, text: str) -> Fraction:
    if value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    if value.is_Float:
        return Fraction(str(value))
    raise InputError(f"coefficient {value} in {text!r} is not rational")


def parse_unipoly(text: str) -> UniPoly:
    """
    Parse a polynomial in nu such as ``"2*nu^2 + (1/2 - i)*nu"``.

    Args:
        text: Expression in the symbol ``nu`` with ``i`` (or ``I``) as the
            imaginary unit

    Returns:
        The parsed UniPoly
    """
    if isinstance(text, (int, Fraction)):
        return UniPoly.constant(text)
    try:
        expr = sympy.sympify(str(text), locals=_PARSE_LOCALS)
        poly = sympy.Poly(sympy.expand(expr), _NU)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as e:
        raise InputError(f"cannot parse {text!r} as a polynomial in nu") from e

    terms: Dict[int, GaussianRational] = {}
    for (exponent,), coef in poly.terms():
        re, im = sympy.sympify(coef).as_real_imag()
        terms[int(exponent)] = GaussianRational(
            _sympy_to_fraction(re, text), _sympy_to_fraction(im, text)
        )
    return UniPoly(terms)


class BiPoly:
    """
    Sparse bivariate polynomial p(nu, lambda) over the Gaussian rationals.

    Terms are keyed by (i, k) for the monomial lambda^i * nu^k.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Exponents, Scalar]] = None):
        self._terms = _clean((terms or {}).items(), _check_pair)

    @classmethod
    def from_lambda_coefficients(cls, coefficients: Mapping[int, UniPoly]) -> "BiPoly":
        """Assemble sum_i a_i(nu) lambda^i from its lambda coefficients."""
        terms = {}
        for i, a_i in coefficients.items():
            for k, c in a_i.terms.items():
                terms[(i, k)] = c
        return cls(terms)

    @property
    def terms(self) -> Mapping[Exponents, GaussianRational]:
        return MappingProxyType(self._terms)

    @property
    def support(self) -> List[Exponents]:
        return list(self._terms)

    @property
    def lambda_degree(self) -> int:
        return max((i for i, _ in self._terms), default=-1)

    @property
    def nu_degree(self) -> int:
        return max((k for _, k in self._terms), default=-1)

    @property
    def lambda_support(self) -> List[int]:
        return sorted({i for i, _ in self._terms})

    def is_zero(self) -> bool:
        return not self._terms

    def is_bivariate(self) -> bool:
        """True when the polynomial depends on both nu and lambda."""
        return self.lambda_degree >= 1 and self.nu_degree >= 1

    def coefficient(self, i: int, k: int) -> GaussianRational:
        return self._terms.get((i, k), ZERO)

    def lambda_coefficient(self, i: int) -> UniPoly:
        return lambda_coefficient(self, i)

    def nu_coefficient(self, k: int) -> UniPoly:
        """Coefficient of nu^k, returned as a polynomial in lambda."""
        return UniPoly({i: c for (i, kk), c in self._terms.items() if kk == k})

    def dense_coefficients(self) -> np.ndarray:
        """Complex array C with C[i, k] the coefficient of lambda^i nu^k."""
        dense = np.zeros((self.lambda_degree + 1, self.nu_degree + 1), dtype=complex)
        for (i, k), c in self._terms.items():
            dense[i, k] = complex(c)
        return dense

    def items(self) -> Iterator[Tuple[Exponents, GaussianRational]]:
        return iter(self._terms.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, BiPoly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "BiPoly":
        return BiPoly({key: -c for key, c in self._terms.items()})

    def __add__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            return NotImplemented
        return poly_add(self, other)

    def __sub__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            return NotImplemented
        return poly_add(self, -other)

    def __mul__(self, other) -> "BiPoly":
        if isinstance(other, BiPoly):
            return poly_mul(self, other)
        try:
            scalar = GaussianRational.coerce(other)
        except InputError:
            return NotImplemented
        return BiPoly({key: c * scalar for key, c in self._terms.items()})

    __rmul__ = __mul__

    def __call__(self, nu: complex, lam: complex) -> complex:
        return poly_eval(self, nu, lam)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for (i, k), c in sorted(self._terms.items(), key=lambda t: (-t[0][0], -t[0][1])):
            factors = []
            if i:
                factors.append("lambda" if i == 1 else f"lambda^{i}")
            if k:
                factors.append("nu" if k == 1 else f"nu^{k}")
            monomial = "*".join(factors)
            if not monomial:
                pieces.append(str(c))
            elif c == ONE:
                pieces.append(monomial)
            elif c == -ONE:
                pieces.append(f"-{monomial}")
            else:
                pieces.append(f"{c}*{monomial}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"BiPoly({str(self)!r})"


def build_bipoly(raw_terms: Iterable[Tuple[int, int, Scalar]]) -> BiPoly:
    """
    Build a BiPoly from (lambda-exponent, nu-exponent, coefficient) triples.

    Duplicate exponent pairs are summed and zero coefficients dropped.
    """
    merged: Dict[Exponents, GaussianRational] = {}
    for entry in raw_terms:
        try:
            i, k, coef = entry
        except (TypeError, ValueError) as e:
            raise InputError(f"expected (i, k, coefficient), got {entry!r}") from e
        _check_pair((i, k))
        merged[(i, k)] = merged.get((i, k), ZERO) + GaussianRational.coerce(coef)
    return BiPoly(merged)


def poly_add(p: BiPoly, q: BiPoly) -> BiPoly:
    merged = dict(p.terms)
    for key, c in q.items():
        merged[key] = merged.get(key, ZERO) + c
    return BiPoly(merged)


def poly_mul(p: BiPoly, q: BiPoly) -> BiPoly:
    product: Dict[Exponents, GaussianRational] = {}
    for (i1, k1), c1 in p.items():
        for (i2, k2), c2 in q.items():
            key = (i1 + i2, k1 + k2)
            product[key] = product.get(key, ZERO) + c1 * c2
    return BiPoly(product)


def poly_eval(p: BiPoly, nu: complex, lam: complex) -> complex:
    """Evaluate p(nu, lambda) in double precision, Horner in lambda then nu."""
    if p.is_zero():
        return 0j
    result = 0j
    for i in range(p.lambda_degree, -1, -1):
        result = result * lam + lambda_coefficient(p, i)(nu)
    return complex(result)


def lambda_coefficient(p: BiPoly, i: int) -> UniPoly:
    """Coefficient a_i(nu) of lambda^i; the zero polynomial when absent."""
    if i < 0:
        raise InputError(f"lambda exponent must be non-negative, got {i}")
    return UniPoly({k: c for (ii, k), c in p.items() if ii == i})


def format_terms(p: BiPoly) -> str:
    """Serialize as one ``i k re_num/re_den im_num/im_den`` line per term."""
    lines = [
        f"{i} {k} {_format_rational(c.re)} {_format_rational(c.im)}"
        for (i, k), c in p.items()
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_terms(text: str) -> BiPoly:
    """Read the line format written by ``format_terms``; '#' starts a comment."""
    raw = []
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        fields = content.split()
        if len(fields) not in (3, 4):
            raise InputError(f"line {number}: expected 'i k re [im]', got {line!r}")
        try:
            i, k = int(fields[0]), int(fields[1])
        except ValueError as e:
            raise InputError(f"line {number}: exponents must be integers") from e
        im = fields[3] if len(fields) == 4 else "0"
        raw.append((i, k, GaussianRational(parse_rational(fields[2]), parse_rational(im))))
    return build_bipoly(raw)

"""
Characteristic Polynomial Tool

This module provides parametric matrices H(nu) with exact polynomial entries
and computes det(lambda*Id - H(nu)) exactly with the Faddeev-LeVerrier
recurrence.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from app.config import settings
from app.errors import InputError
from app.tools.poly import (
    BiPoly,
    GaussianRational,
    UniPoly,
    format_unipoly,
    parse_unipoly,
)

# Set up logging
logger = logging.getLogger(__name__)

EntryLike = Union[UniPoly, GaussianRational, int, str]


def _as_entry(value: EntryLike) -> UniPoly:
    if isinstance(value, UniPoly):
        return value
    if isinstance(value, str):
        return parse_unipoly(value)
    return UniPoly.constant(GaussianRational.coerce(value))


@dataclass(frozen=True)
class ParametricMatrix:
    """Square matrix whose entries are exact polynomials in nu."""

    entries: Tuple[Tuple[UniPoly, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_entry(value) for value in row) for row in self.entries)
        n = len(rows)
        if n < 1:
            raise InputError("a parametric matrix needs at least one row")
        if any(len(row) != n for row in rows):
            raise InputError(f"parametric matrix must be square, got {n} rows of lengths "
                             f"{sorted({len(row) for row in rows})}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def zeros(cls, n: int) -> "ParametricMatrix":
        return cls(tuple(tuple(UniPoly() for _ in range(n)) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: Tuple[int, int]) -> UniPoly:
        row, col = index
        return self.entries[row][col]

    def trace(self) -> UniPoly:
        return sum((self.entries[j][j] for j in range(self.n)), UniPoly())

    def with_entries(self, updates: Dict[Tuple[int, int], EntryLike]) -> "ParametricMatrix":
        """Return a copy with the given (row, col) entries replaced."""
        rows = [list(row) for row in self.entries]
        for (row, col), value in updates.items():
            rows[row][col] = _as_entry(value)
        return ParametricMatrix(tuple(tuple(row) for row in rows))


def _matmul(a: Sequence[Sequence[UniPoly]], b: Sequence[Sequence[UniPoly]]) -> List[List[UniPoly]]:
    n = len(a)
    result = []
    for r in range(n):
        row = []
        for c in range(n):
            acc = UniPoly()
            for j in range(n):
                if a[r][j] and b[j][c]:
                    acc = acc + a[r][j] * b[j][c]
            row.append(acc)
        result.append(row)
    return result


def char_poly(matrix: ParametricMatrix) -> BiPoly:
    """
    Compute det(lambda*Id - H(nu)) exactly.

    Faddeev-LeVerrier: with M_0 = 0 and c_n = 1,
    M_k = H M_{k-1} + c_{n-k+1} Id and c_{n-k} = -tr(H M_k) / k.
    The divisions are by the integers 1..n, exact over the rationals.

    Args:
        matrix: The parametric matrix H(nu)

    Returns:
        Monic BiPoly of lambda-degree n
    """
    n = matrix.n
    if n > settings.CHARPOLY_MAX_DIM:
        logger.warning(f"Characteristic polynomial of a {n}x{n} matrix; exact expansion may be slow")

    a = matrix.entries
    coefficients: Dict[int, UniPoly] = {n: UniPoly.constant(1)}
    product = [[UniPoly() for _ in range(n)] for _ in range(n)]  # H M_{k-1}
    for k in range(1, n + 1):
        m_k = [row[:] for row in product]
        for j in range(n):
            m_k[j][j] = m_k[j][j] + coefficients[n - k + 1]
        product = _matmul(a, m_k)
        trace = sum((product[j][j] for j in range(n)), UniPoly())
        coefficients[n - k] = -trace / k

    return BiPoly.from_lambda_coefficients(coefficients)


def eval_matrix(matrix: ParametricMatrix, nu: complex) -> np.ndarray:
    """Evaluate every entry at a complex nu; returns a complex128 array."""
    return np.array([[entry(nu) for entry in row] for row in matrix.entries], dtype=complex)


def matrix_to_json(matrix: ParametricMatrix) -> Dict[str, Any]:
    return {
        "n": matrix.n,
        "entries": [[format_unipoly(entry) for entry in row] for row in matrix.entries],
    }


def matrix_from_json(data: Dict[str, Any]) -> ParametricMatrix:
    """Read ``{"n": int, "entries": [[UniPoly-string, ...], ...]}``."""
    if not isinstance(data, dict) or "entries" not in data:
        raise InputError("matrix document must be an object with an 'entries' array")
    entries = data["entries"]
    if not isinstance(entries, list) or not all(isinstance(row, list) for row in entries):
        raise InputError("'entries' must be a list of rows")
    matrix = ParametricMatrix(tuple(tuple(_as_entry(v) for v in row) for row in entries))
    if "n" in data and data["n"] != matrix.n:
        raise InputError(f"declared n={data['n']} does not match {matrix.n} rows")
    return matrix

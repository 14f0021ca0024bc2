"""
Tests for the characteristic polynomial tool.
"""

import os
import random
import sys
import unittest
from fractions import Fraction

import numpy as np
import sympy

# Add the parent directory to the path so we can import the app modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.errors import InputError
from app.models import SSHParams, TwoSiteParams, ssh_chain, two_site
from app.tools.charpoly import ParametricMatrix, char_poly, eval_matrix, matrix_from_json, matrix_to_json
from app.tools.poly import GaussianRational, UniPoly, build_bipoly, lambda_coefficient, poly_eval, poly_mul

NU = sympy.Symbol("nu")


def to_sympy(u: UniPoly) -> sympy.Expr:
    return sum((sympy.Rational(c.re.numerator, c.re.denominator)
                + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)) * NU ** e
               for e, c in u.terms.items()) if not u.is_zero() else sympy.Integer(0)


def random_matrix(rng: random.Random, n: int, max_degree: int = 1) -> ParametricMatrix:
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            terms = {}
            for e in range(max_degree + 1):
                if rng.random() < 0.6:
                    terms[e] = GaussianRational(Fraction(rng.randint(-5, 5), rng.randint(1, 3)), rng.randint(-3, 3))
            row.append(UniPoly(terms))
        rows.append(tuple(row))
    return ParametricMatrix(tuple(rows))


def block_diagonal(a: ParametricMatrix, b: ParametricMatrix) -> ParametricMatrix:
    n = a.n + b.n
    rows = [[UniPoly() for _ in range(n)] for _ in range(n)]
    for r in range(a.n):
        for c in range(a.n):
            rows[r][c] = a[r, c]
    for r in range(b.n):
        for c in range(b.n):
            rows[a.n + r][a.n + c] = b[r, c]
    return ParametricMatrix(tuple(tuple(row) for row in rows))


class TestCharPoly(unittest.TestCase):
    """Test cases for char_poly."""

    def test_two_site(self):
        """Test the two-site characteristic polynomial with gamma = kappa = 1."""
        p = char_poly(two_site(TwoSiteParams(kappa=1, gamma=1)))
        expected = build_bipoly([(2, 0, 1), (0, 2, -1), (0, 1, GaussianRational(0, -2))])
        self.assertEqual(p, expected)

    def test_identity(self):
        """Test that a constant identity matrix gives (lambda - 1)^2."""
        identity = ParametricMatrix(((1, 0), (0, 1)))
        self.assertEqual(char_poly(identity), build_bipoly([(2, 0, 1), (1, 0, -2), (0, 0, 1)]))

    def test_companion_of_lambda_cubed_minus_nu(self):
        """Test the 3x3 companion matrix of lambda^3 - nu."""
        matrix = ParametricMatrix((
            (0, 0, "nu"),
            (1, 0, 0),
            (0, 1, 0),
        ))
        self.assertEqual(char_poly(matrix), build_bipoly([(3, 0, 1), (0, 1, -1)]))

    def test_monic(self):
        """Test that the leading coefficient is lambda^n."""
        rng = random.Random(3)
        for n in range(1, 6):
            p = char_poly(random_matrix(rng, n))
            self.assertEqual(p.lambda_degree, n)
            self.assertEqual(lambda_coefficient(p, n), UniPoly.constant(1))

    def test_trace_and_determinant_identities(self):
        """Test a_{n-1} = -trace and a_0 = (-1)^n det against sympy."""
        rng = random.Random(2024)
        for trial in range(200):
            n = 1 + trial % 5
            matrix = random_matrix(rng, n)
            p = char_poly(matrix)
            self.assertEqual(lambda_coefficient(p, n - 1), -matrix.trace())

            oracle = sympy.Matrix(n, n, lambda r, c: to_sympy(matrix[r, c])).det(method="berkowitz")
            constant = to_sympy(lambda_coefficient(p, 0))
            self.assertEqual(sympy.expand(constant - (-1) ** n * oracle), 0)

    def test_roots_match_eigenvalues(self):
        """Test that numeric eigenvalues are roots of the exact polynomial."""
        rng = random.Random(11)
        matrix = random_matrix(rng, 4, max_degree=2)
        p = char_poly(matrix)
        for k in range(100):
            nu = np.exp(2j * np.pi * k / 100)
            a = eval_matrix(matrix, nu)
            scale = max(1.0, np.linalg.norm(a)) ** 4
            for lam in np.linalg.eigvals(a):
                self.assertLessEqual(abs(poly_eval(p, nu, lam)), 1e-8 * scale)

    def test_block_diagonal_is_product(self):
        """Test that block-diagonal matrices multiply characteristic polynomials."""
        rng = random.Random(5)
        for _ in range(10):
            a = random_matrix(rng, rng.randint(1, 3))
            b = random_matrix(rng, rng.randint(1, 3))
            self.assertEqual(char_poly(block_diagonal(a, b)), poly_mul(char_poly(a), char_poly(b)))


class TestEvalMatrix(unittest.TestCase):
    """Test cases for eval_matrix and the matrix document format."""

    def test_two_site_at_zero(self):
        """Test the two-site matrix at alpha = 0."""
        a = eval_matrix(two_site(TwoSiteParams(kappa=1, gamma=1)), 0)
        np.testing.assert_allclose(a, np.array([[1j, 1], [1, -1j]]))

    def test_ssh_corner_vanishes_at_zero(self):
        """Test that the SSH corner entry is zero at nu = 0 and nu elsewhere."""
        matrix = ssh_chain(SSHParams(n_sites=5))
        self.assertEqual(eval_matrix(matrix, 0)[0, 4], 0)
        self.assertAlmostEqual(eval_matrix(matrix, 0.25)[0, 4], 0.25)

    def test_constant_entries(self):
        """Test that constant entries evaluate to themselves."""
        matrix = ParametricMatrix((("1/2", GaussianRational(0, 3)), (-1, 0)))
        np.testing.assert_allclose(eval_matrix(matrix, 7 + 2j), np.array([[0.5, 3j], [-1, 0]]))

    def test_matrix_document(self):
        """Test JSON serialization of parametric matrices."""
        matrix = two_site(TwoSiteParams(kappa=2, gamma="1/2"))
        document = matrix_to_json(matrix)
        self.assertEqual(document["n"], 2)
        self.assertEqual(matrix_from_json(document), matrix)

    def test_invalid_matrices(self):
        """Test that non-square or empty matrices are rejected."""
        with self.assertRaises(InputError):
            ParametricMatrix(((1, 2),))
        with self.assertRaises(InputError):
            ParametricMatrix(())
        with self.assertRaises(InputError):
            matrix_from_json({"n": 3, "entries": [["1"]]})
        with self.assertRaises(InputError):
            matrix_from_json({"rows": []})


if __name__ == '__main__':
    unittest.main()

"""
Tests for the tropical analysis tool.

Covers valuations, the min-plus semiring, tropicalization, tropical roots
and the EP-order classification.
"""

import math
import os
import random
import sys
import unittest
from fractions import Fraction

import numpy as np

# Add the parent directory to the path so we can import the app modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.errors import InputError
from app.tools.poly import BiPoly, GaussianRational, UniPoly, build_bipoly
from app.tools.tropical import (
    INFINITY,
    EPKind,
    TropicalPolynomial,
    TropicalRoot,
    bend_points,
    ep_order,
    trop_eval,
    trop_semiring,
    tropical_add,
    tropical_mul,
    tropical_roots,
    tropicalize,
    valuation,
)


def random_extended(rng: random.Random):
    if rng.random() < 0.1:
        return INFINITY
    return Fraction(rng.randint(-20, 20), rng.randint(1, 6))


def random_unipoly(rng: random.Random) -> UniPoly:
    return UniPoly({rng.randint(0, 6): GaussianRational(rng.randint(-4, 4), rng.randint(-4, 4))
                    for _ in range(rng.randint(0, 4))})


class TestSemiring(unittest.TestCase):
    """Test cases for the min-plus semiring."""

    def test_examples(self):
        """Test the basic sums and products."""
        self.assertEqual(trop_semiring(3, 5), (3, 8))
        self.assertEqual(trop_semiring(7, INFINITY), (7, INFINITY))
        self.assertEqual(tropical_mul(Fraction(5, 2), 0), Fraction(5, 2))
        self.assertEqual(tropical_add(INFINITY, INFINITY), INFINITY)

    def test_rejects_minus_infinity(self):
        """Test that values outside R plus infinity are rejected."""
        with self.assertRaises(InputError):
            trop_semiring(-math.inf, 1)
        with self.assertRaises(InputError):
            trop_semiring(1, math.nan)

    def test_axioms(self):
        """Test commutativity, associativity, distributivity and identities."""
        rng = random.Random(42)
        for _ in range(1000):
            x, y, z = random_extended(rng), random_extended(rng), random_extended(rng)
            self.assertEqual(tropical_add(x, y), tropical_add(y, x))
            self.assertEqual(tropical_mul(x, y), tropical_mul(y, x))
            self.assertEqual(tropical_add(tropical_add(x, y), z), tropical_add(x, tropical_add(y, z)))
            self.assertEqual(tropical_mul(tropical_mul(x, y), z), tropical_mul(x, tropical_mul(y, z)))
            self.assertEqual(tropical_mul(x, tropical_add(y, z)),
                             tropical_add(tropical_mul(x, y), tropical_mul(x, z)))
            self.assertEqual(tropical_add(x, INFINITY), x)
            self.assertEqual(tropical_mul(x, 0), x)


class TestValuation(unittest.TestCase):
    """Test cases for valuations of polynomials in nu."""

    def test_examples(self):
        """Test valuations of small polynomials."""
        self.assertEqual(valuation(UniPoly({2: 1, 1: -2, 0: 3})), 0)
        self.assertEqual(valuation(UniPoly()), INFINITY)
        self.assertEqual(valuation(UniPoly({2: 1}) * UniPoly({3: 1})), 5)

    def test_axioms(self):
        """Test val(fg) = val f + val g and the ultrametric inequality."""
        rng = random.Random(8)
        for _ in range(1000):
            f, g = random_unipoly(rng), random_unipoly(rng)
            self.assertEqual(valuation(f * g), tropical_mul(valuation(f), valuation(g)))
            total = valuation(f + g)
            self.assertGreaterEqual(total, min(valuation(f), valuation(g)))
            if valuation(f) != valuation(g):
                self.assertEqual(total, min(valuation(f), valuation(g)))


class TestTropicalize(unittest.TestCase):
    """Test cases for tropicalization and rendering."""

    def test_two_site(self):
        """Test that the two-site polynomial tropicalizes to min(1, 2ω)."""
        p = build_bipoly([(2, 0, 1), (0, 1, GaussianRational(0, -2)), (0, 2, -1)])
        tropical = tropicalize(p)
        self.assertEqual(tropical.terms, ((0, 1), (2, 0)))
        self.assertEqual(tropical.render(), "min(1, 2ω)")

    def test_render_generic_terms(self):
        """Test rendering with slopes and intercepts."""
        tropical = TropicalPolynomial(((4, 0), (2, 1), (1, 1), (0, 1)))
        self.assertEqual(tropical.render(), "min(1, ω+1, 2ω+1, 4ω)")
        self.assertEqual(TropicalPolynomial(((3, 2),)).render(), "3ω+2")

    def test_zero_polynomial_rejected(self):
        """Test that tropicalizing zero is an error."""
        with self.assertRaises(InputError):
            tropicalize(BiPoly())

    def test_invariants(self):
        """Test distinct exponents and the finite-term requirement."""
        with self.assertRaises(InputError):
            TropicalPolynomial(((1, 0), (1, 2)))
        with self.assertRaises(InputError):
            TropicalPolynomial(((1, INFINITY),))

    def test_trop_eval(self):
        """Test exact evaluation of min-plus expressions."""
        two_site = TropicalPolynomial(((0, 1), (2, 0)))
        self.assertEqual(trop_eval(two_site, Fraction(1, 2)), 1)
        self.assertEqual(trop_eval(two_site, 0), 0)
        generic = TropicalPolynomial(((4, 0), (2, 1), (1, 1), (0, 1)))
        self.assertEqual(trop_eval(generic, Fraction(1, 4)), 1)


class TestTropicalRoots(unittest.TestCase):
    """Test cases for tropical roots and EP orders."""

    def test_known_roots(self):
        """Test roots of the two-site, SSH and Hatano-Nelson tropicalizations."""
        self.assertEqual(tropical_roots(TropicalPolynomial(((0, 1), (2, 0)))),
                         [TropicalRoot(Fraction(1, 2), 2)])
        self.assertEqual(tropical_roots(TropicalPolynomial(((0, 1), (5, 0)))),
                         [TropicalRoot(Fraction(1, 5), 5)])
        self.assertEqual(tropical_roots(TropicalPolynomial(((4, 0), (2, 1), (1, 1), (0, 1)))),
                         [TropicalRoot(Fraction(1, 4), 4)])
        self.assertEqual(tropical_roots(TropicalPolynomial(((3, 0),))), [])
        self.assertEqual(TropicalRoot(Fraction(1, 2), 2).render(), "1/2 (multiplicity 2)")

    def test_mixed_roots_sorted(self):
        """Test that several hull edges give ascending roots."""
        roots = tropical_roots(TropicalPolynomial(((0, 2), (1, 1), (2, 1), (4, 0))))
        self.assertEqual(roots, [TropicalRoot(Fraction(1, 3), 3), TropicalRoot(Fraction(1), 1)])

    def test_classification(self):
        """Test order, analytic and degenerate verdicts."""
        order_two = ep_order(TropicalPolynomial(((0, 1), (2, 0))))
        self.assertEqual(order_two.kind, EPKind.ORDER)
        self.assertEqual(order_two.order, 2)
        self.assertEqual(order_two.describe(), "EP order 2")
        self.assertTrue(order_two.is_exceptional)

        analytic = ep_order(TropicalPolynomial(((0, 2), (2, 0))))
        self.assertEqual(analytic.order, 1)
        self.assertEqual(analytic.describe(), "analytic splitting (order 1; not an EP)")
        self.assertFalse(analytic.is_exceptional)

        degenerate = ep_order(TropicalPolynomial(((0, 0), (2, 0))))
        self.assertEqual(degenerate.kind, EPKind.DEGENERATE)
        self.assertIsNone(degenerate.order)
        self.assertEqual(degenerate.roots, (TropicalRoot(Fraction(0), 2),))
        self.assertEqual(ep_order(TropicalPolynomial(((2, 3),))).kind, EPKind.DEGENERATE)

    def test_mixed_order_uses_largest_denominator(self):
        """Test that the order is the largest denominator over non-zero roots."""
        classification = ep_order(TropicalPolynomial(((0, 2), (1, 1), (2, 1), (4, 0))))
        self.assertEqual(classification.order, 3)

    def test_bend_locus_matches_hull(self):
        """Test that hull roots coincide with brute-force ties on random inputs."""
        rng = random.Random(500)
        for _ in range(500):
            degree = rng.randint(1, 7)
            exponents = rng.sample(range(degree + 1), rng.randint(1, degree + 1))
            terms = [(i, rng.randint(-5, 5) if rng.random() > 0.15 else INFINITY) for i in exponents]
            if all(c == INFINITY for _, c in terms):
                terms[0] = (terms[0][0], 0)
            tropical = TropicalPolynomial(tuple(terms))
            self.assertEqual([root.value for root in tropical_roots(tropical)], bend_points(tropical))

    def test_multiplicities_account_for_degree(self):
        """Test that multiplicities plus the first hull exponent equal the degree."""
        rng = random.Random(77)
        for _ in range(200):
            p = build_bipoly([(rng.randint(0, 5), rng.randint(0, 4), rng.randint(1, 9)) for _ in range(6)])
            tropical = tropicalize(p)
            first = tropical.finite_terms[0][0]
            total = sum(root.multiplicity for root in tropical_roots(tropical))
            self.assertEqual(total + first, p.lambda_degree)

    def test_numeric_roots_follow_tropical_roots(self):
        """Test that numeric root valuations at small nu sit near tropical roots."""
        rng = random.Random(31)
        checked = 0
        while checked < 30:
            raw = [(i, k, GaussianRational(rng.randint(1, 5), rng.randint(-3, 3)))
                   for i in range(rng.randint(1, 4) + 1) for k in range(2) if rng.random() < 0.5]
            p = build_bipoly(raw)
            if p.is_zero() or p.lambda_degree < 1:
                continue
            roots = [root.value for root in tropical_roots(tropicalize(p))]
            if not roots:
                continue
            nu = 1e-6
            coefficients = [p.lambda_coefficient(i)(nu) for i in range(p.lambda_degree + 1)]
            for lam in np.roots(coefficients[::-1]):
                if abs(lam) == 0:
                    continue
                estimate = math.log(abs(lam)) / math.log(nu)
                self.assertLess(min(abs(estimate - float(r)) for r in roots), 0.2)
            checked += 1


if __name__ == '__main__':
    unittest.main()

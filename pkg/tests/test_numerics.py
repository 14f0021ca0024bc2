"""
Tests for the numerics service: eigenvalues, splitting fits and holonomy loops.
"""

import os
import random
import sys
import unittest
from fractions import Fraction
from unittest.mock import patch

import numpy as np

# Add the parent directory to the path so we can import the app modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.config import settings
from app.errors import InputError, NumericalError
from app.models import (
    COS_PI_4,
    INV_SQRT3,
    SIN_PI_4,
    HNParams,
    SSHParams,
    TrimerParams,
    TwoSiteParams,
    build_model,
    hatano_nelson,
    ssh_chain,
    three_site,
    two_site,
)
from app.services.numerics import (
    DecadeRange,
    LoopMode,
    LoopOptions,
    LoopSpec,
    cycle_decomposition,
    cycle_notation,
    degenerate_cluster,
    eigenvalues,
    holonomy_trace,
    max_splitting,
    polynomial_roots,
    root_valuations,
    splitting_exponent,
)
from app.tools.charpoly import ParametricMatrix, char_poly, eval_matrix
from app.tools.poly import GaussianRational, UniPoly, build_bipoly

FIT_TOL = 0.02


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    distance = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    return float(max(distance.min(axis=1).max(), distance.min(axis=0).max()))


def hn(cos_theta=1, sin_theta=0, cos_phi=COS_PI_4, sin_phi=SIN_PI_4, **factors) -> ParametricMatrix:
    return hatano_nelson(HNParams(cos_theta=cos_theta, sin_theta=sin_theta,
                                  cos_phi=cos_phi, sin_phi=sin_phi, **factors))


class TestEigenvalues(unittest.TestCase):
    """Test cases for dense eigenvalues."""

    def test_examples(self):
        """Test eigenvalues of small matrices."""
        np.testing.assert_allclose(np.sort_complex(eigenvalues(np.array([[1j, 1], [1, -1j]]))), [0, 0], atol=1e-7)
        np.testing.assert_allclose(eigenvalues(np.array([[0, 1], [0, 0]])), [0, 0], atol=1e-12)
        np.testing.assert_allclose(np.sort_complex(eigenvalues(np.diag([3.0, -1.0, 2j]))),
                                   np.sort_complex(np.array([3, -1, 2j])))

    def test_invalid_input(self):
        """Test non-square, oversized and non-finite matrices."""
        with self.assertRaises(InputError):
            eigenvalues(np.zeros((2, 3)))
        with self.assertRaises(InputError):
            eigenvalues(np.eye(settings.EIGEN_MAX_DIM + 1))
        with self.assertRaises(NumericalError):
            eigenvalues(np.array([[np.nan, 0], [0, 1]]))

    @patch("app.services.numerics.scipy.linalg.eigvals", side_effect=np.linalg.LinAlgError("no convergence"))
    def test_no_convergence(self, _):
        """Test that a failed QR iteration reports no partial spectrum."""
        with self.assertRaises(NumericalError) as context:
            eigenvalues(np.eye(3))
        self.assertIsNone(context.exception.partial)
        self.assertIn("no partial results", str(context.exception))

    def test_degenerate_cluster(self):
        """Test that the cluster centre ignores a spectator eigenvalue."""
        centre, members = degenerate_cluster(np.array([1.0, 1e-9, -1e-9]))
        self.assertAlmostEqual(abs(centre), 0.0, places=8)
        self.assertEqual(members.tolist(), [1, 2])
        centre, members = degenerate_cluster(np.array([2.0, -2.0]))
        self.assertEqual(len(members), 1)

    def test_match_characteristic_roots(self):
        """Test that eigenvalues agree with the roots of the exact polynomial."""
        rng = random.Random(6)
        for _ in range(100):
            rows = tuple(
                tuple(UniPoly({0: GaussianRational(rng.randint(-3, 3), rng.randint(-3, 3)),
                               1: GaussianRational(rng.randint(-3, 3))}) for _ in range(6))
                for _ in range(6)
            )
            matrix = ParametricMatrix(rows)
            p = char_poly(matrix)
            nu = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            self.assertLess(hausdorff(eigenvalues(eval_matrix(matrix, nu)), polynomial_roots(p, nu)), 1e-6)

    def test_similarity_invariance(self):
        """Test that a unitary similarity leaves the spectrum unchanged."""
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
            self.assertLess(hausdorff(eigenvalues(q @ a @ q.conj().T), eigenvalues(a)), 1e-9)

    def test_max_splitting(self):
        """Test the largest pairwise distance."""
        self.assertEqual(max_splitting(np.array([1.0, -1.0, 0.5])), 2.0)
        self.assertEqual(max_splitting(np.array([3.0])), 0.0)


class TestSplittingExponent(unittest.TestCase):
    """Test cases for the splitting fit near nu = 0."""

    def assertFits(self, source, order, decades=None):
        fit = splitting_exponent(source, decades)
        self.assertLess(abs(fit.exponent - 1.0 / order), FIT_TOL, f"exponent {fit.exponent} for order {order}")
        return fit

    def test_two_site(self):
        """Test the square-root splitting of the dimer."""
        fit = self.assertFits(two_site(TwoSiteParams(kappa=1, gamma=1)), 2)
        self.assertEqual(len(fit.samples), 7)
        self.assertAlmostEqual(fit.samples[0][0], 1e-3)

    def test_two_site_polynomial_source(self):
        """Test the fit on characteristic-polynomial roots."""
        p = build_bipoly([(2, 0, 1), (0, 1, GaussianRational(0, -2)), (0, 2, -1)])
        self.assertFits(p, 2)

    def test_trimers(self):
        """Test the third-order and second-order trimer configurations."""
        self.assertFits(three_site(TrimerParams(gamma=1, kappa_squared="1/2", tan_phi=-INV_SQRT3)), 3)
        self.assertFits(three_site(TrimerParams(gamma=1, kappa_squared="1/2", tan_phi=-1)), 2)

    def test_ssh_chain(self):
        """Test the fifth-root splitting of the collapsed SSH chain."""
        self.assertFits(ssh_chain(SSHParams(n_sites=5, t2_back=0)), 5)

    def test_hatano_nelson(self):
        """Test orders 4, 2 and 3 along the three Hatano-Nelson directions."""
        self.assertFits(hn(), 4)
        self.assertFits(hn(cos_phi=1, sin_phi=0), 2)
        self.assertFits(hn(cos_theta=COS_PI_4, sin_theta=SIN_PI_4, cos_phi=1, sin_phi=0), 3)

    def test_companion(self):
        """Test the cube-root splitting of lambda^3 - nu."""
        self.assertFits(build_model("companion", {"coeffs": ["-nu", "0", "0"]}), 3)

    def test_root_valuations(self):
        """Test that numeric root sizes follow the tropical roots."""
        p = build_bipoly([(3, 0, 1), (0, 1, -1)])
        np.testing.assert_allclose(root_valuations(p, 1e-9), [1 / 3] * 3, atol=1e-9)
        mixed = build_bipoly([(2, 0, 1), (1, 1, -1), (0, 3, 1)])
        np.testing.assert_allclose(sorted(root_valuations(mixed, 1e-4)), [1, 2], atol=1e-3)

    def test_constant_spectrum(self):
        """Test that a nu-independent degenerate spectrum cannot be fitted."""
        with self.assertRaises(NumericalError) as context:
            splitting_exponent(ParametricMatrix(((1, 0), (0, 1))))
        self.assertIn("degenerate or constant spectrum", str(context.exception))
        self.assertEqual(len(context.exception.partial), 7)

    def test_decade_range(self):
        """Test decade parsing and validation."""
        decades = DecadeRange.parse("2,6")
        self.assertEqual((decades.k_min, decades.k_max), (2, 6))
        np.testing.assert_allclose(decades.nus(), [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
        for bad in ("3,4", "3", "a,b"):
            with self.assertRaises(InputError):
                DecadeRange.parse(bad)


class TestHolonomy(unittest.TestCase):
    """Test cases for eigenvalue tracking around loops."""

    def test_two_site_swap(self):
        """Test that circling the dimer EP swaps the two eigenvalues."""
        result = holonomy_trace(LoopSpec(two_site(TwoSiteParams(kappa=1, gamma=1)), radius=0.1, samples=256))
        self.assertEqual(result.permutation, (1, 0))
        self.assertEqual(result.cycle_type(), [2])
        self.assertIsNone(result.petal_count)
        self.assertEqual(result.trajectories.shape, (256, 2))

    def test_hermitian_identity(self):
        """Test that a Hermitian dimer picks up no permutation."""
        result = holonomy_trace(LoopSpec(two_site(TwoSiteParams(kappa=1, gamma=0)), radius=0.1, samples=128))
        self.assertEqual(result.permutation, (0, 1))
        self.assertEqual(result.cycle_type(), [1, 1])

    def test_hatano_nelson_four_cycle(self):
        """Test the four-cycle around the fourth-order EP, with and without disorder."""
        result = holonomy_trace(LoopSpec(hn(), radius=0.1, samples=512))
        self.assertEqual(result.cycle_type(), [4])
        self.assertLess(result.step_ratio, settings.CONTINUITY_FACTOR)

        rng = random.Random(12)
        for _ in range(10):
            factors = {name: Fraction(rng.randint(80, 125), 100) for name in "abcdmn"}
            disordered = holonomy_trace(LoopSpec(hn(**factors), radius=0.1, samples=512))
            self.assertEqual(disordered.cycle_type(), [4])

    def test_polynomial_source(self):
        """Test that lambda^3 - nu gives a three-cycle."""
        result = holonomy_trace(LoopSpec(build_bipoly([(3, 0, 1), (0, 1, -1)]), radius=0.1, samples=128))
        self.assertEqual(result.cycle_type(), [3])

    def test_touching_loop_petals(self):
        """Test four petals for the fourth-order Hatano-Nelson EP."""
        result = holonomy_trace(LoopSpec(hn(), radius=0.001, samples=512, mode=LoopMode.TOUCHING))
        self.assertEqual(result.petal_count, 4)
        self.assertEqual(result.permutation, (0, 1, 2, 3))
        self.assertEqual(result.mode, LoopMode.TOUCHING)
        self.assertLess(abs(result.ep_value), 1e-2)

    def test_touching_loop_second_order(self):
        """Test two petals when a spectator eigenvalue sits away from the EP."""
        # (lambda - 1)(lambda^2 - nu)
        result = holonomy_trace(LoopSpec(build_model("companion", {"coeffs": ["nu", "-nu", "-1"]}),
                                         radius=0.01, samples=512, mode=LoopMode.TOUCHING))
        self.assertEqual(result.petal_count, 2)
        self.assertLess(abs(result.ep_value), 1e-4)

        trimer = three_site(TrimerParams(gamma=1, kappa_squared="1/2", tan_phi=-1))
        result = holonomy_trace(LoopSpec(trimer, radius=0.01, samples=512, mode=LoopMode.TOUCHING))
        self.assertEqual(result.petal_count, 2)

    def test_touching_loop_third_order(self):
        """Test three petals with and without a faster-vanishing fourth branch."""
        cube = build_model("companion", {"coeffs": ["-nu", "0", "0"]})
        result = holonomy_trace(LoopSpec(cube, radius=0.01, samples=512, mode=LoopMode.TOUCHING))
        self.assertEqual(result.petal_count, 3)

        ep3 = hn(cos_theta=COS_PI_4, sin_theta=SIN_PI_4, cos_phi=1, sin_phi=0)
        result = holonomy_trace(LoopSpec(ep3, radius=0.001, samples=512, mode=LoopMode.TOUCHING))
        self.assertEqual(result.petal_count, 3)

    def test_loop_points(self):
        """Test the enclosing and touching parametrizations."""
        source = two_site(TwoSiteParams())
        psi, nus = LoopSpec(source, radius=0.5, samples=64).points()
        self.assertEqual(psi[0], 0.0)
        np.testing.assert_allclose(np.abs(nus), 0.5)
        psi, nus = LoopSpec(source, radius=0.5, samples=64, mode="touching").points()
        self.assertGreater(psi[0], 0.0)
        np.testing.assert_allclose(np.abs(nus - 0.5), 0.5)
        self.assertGreater(np.abs(nus).min(), 0.0)

    def test_invalid_loops(self):
        """Test loop validation."""
        source = two_site(TwoSiteParams())
        with self.assertRaises(InputError):
            LoopSpec(source, radius=0, samples=128)
        with self.assertRaises(InputError):
            LoopSpec(source, radius=0.1, samples=settings.LOOP_MIN_SAMPLES - 1)

    def test_loop_options(self):
        """Test parsing of c,K,mode."""
        options = LoopOptions.parse("0.05,512,touching")
        self.assertEqual((options.radius, options.samples, options.mode), (0.05, 512, LoopMode.TOUCHING))
        for bad in ("0.1,512", "0.1,8,enclosing", "x,128,enclosing", "0.1,128,sideways"):
            with self.assertRaises(InputError):
                LoopOptions.parse(bad)

    def test_cycle_notation(self):
        """Test cycle decomposition and rendering."""
        self.assertEqual(cycle_notation((1, 2, 3, 0)), "(0 1 2 3)")
        self.assertEqual(cycle_notation((0, 1)), "(0)(1)")
        self.assertEqual(cycle_decomposition((1, 0, 2)), [(0, 1), (2,)])
        with self.assertRaises(InputError):
            cycle_decomposition((0, 0))


if __name__ == '__main__':
    unittest.main()

# tests/test_nmf.py
import unittest
import sys
import os

import numpy as np

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from engine.errors import DomainError, ShapeError
from engine.nmf import (Decomposition, NmfConfig, factorize, init_factors, is_monotone, normalize_rows,
                        reconstruction_error, update_step)
from utils.json_parser import JSONParser


class TestMultiplicativeUpdates(unittest.TestCase):
    """Test NMF convergence properties"""

    def test_objective_non_increasing_and_factors_non_negative(self):
        """Every update keeps factors non-negative and the objective non-increasing"""
        rng = np.random.default_rng(7)
        for trial in range(50):
            rows, cols = int(rng.integers(2, 41)), int(rng.integers(2, 31))
            c0 = int(rng.integers(2, 7))
            V = rng.uniform(size=(rows, cols))
            V[rng.uniform(size=V.shape) < 0.2] = 0.0
            config = NmfConfig(c0=c0, a0=60, seed=trial)
            T, U = init_factors(V.shape, c0, config, trial)
            previous = np.inf
            for _ in range(config.a0):
                T, U = update_step(V, T, U, config.denom_floor)
                self.assertTrue(np.all(T >= 0) and np.all(U >= 0))
                objective = float(np.linalg.norm(V - T @ U))
                self.assertLessEqual(objective, previous + 1e-9)
                previous = objective

    def test_trace_is_monotone(self):
        """The recorded trace never rises"""
        V = np.random.default_rng(1).uniform(size=(12, 9))
        dec = factorize(V, NmfConfig(c0=3, a0=300))
        self.assertEqual(len(dec.objective_trace), 300)
        self.assertTrue(is_monotone(dec.objective_trace))

    def test_rank_one_is_recovered(self):
        """An exact rank-one matrix is fitted to 1e-6"""
        V = np.array([[1.0, 2.0], [2.0, 4.0]])
        dec = factorize(V, NmfConfig(c0=1, a0=500))
        self.assertLess(reconstruction_error(V, dec), 1e-6)
        self.assertLess(dec.objective_trace[-1], 1e-6 * np.linalg.norm(V))

    def test_exact_factorization_is_fixed_point(self):
        """An exact factorization is a fixed point of one update"""
        T = np.array([[1.0, 0.5], [0.0, 2.0], [0.3, 0.3]])
        U = np.array([[1.0, 0.0, 2.0], [0.5, 1.0, 0.0]])
        V = T @ U
        T1, U1 = update_step(V, T, U, 1e-12)
        np.testing.assert_allclose(T1, T, atol=1e-12)
        np.testing.assert_allclose(U1, U, atol=1e-12)

    def test_gauge_rescaling_keeps_product(self):
        """Scaling a U row by alpha and the T column by 1/alpha leaves TU unchanged"""
        dec = factorize(np.random.default_rng(13).uniform(size=(6, 4)), NmfConfig(c0=2, a0=50))
        T, U = dec.T.copy(), dec.U.copy()
        U[1] *= 4.0
        T[:, 1] /= 4.0
        np.testing.assert_allclose(T @ U, dec.product(), atol=1e-12)

    def test_zero_matrix(self):
        """A zero matrix gives zero objective and error"""
        dec = factorize(np.zeros((4, 3)), NmfConfig(c0=2, a0=20))
        self.assertEqual(dec.objective_trace[-1], 0.0)
        self.assertEqual(reconstruction_error(np.zeros((4, 3)), dec), 0.0)


class TestReconstructionError(unittest.TestCase):
    """Test the relative reconstruction error"""

    def test_zero_factor_gives_one(self):
        """With U all zeros the relative error is exactly 1"""
        V = np.random.default_rng(9).uniform(size=(5, 4))
        dec = Decomposition(np.ones((5, 2)), np.zeros((2, 4)), [0.0], NmfConfig(c0=2))
        self.assertEqual(reconstruction_error(V, dec), 1.0)

    def test_matches_elementwise_sum(self):
        """Relative error agrees with an explicit double sum"""
        rng = np.random.default_rng(10)
        V, T, U = rng.uniform(size=(4, 3)), rng.uniform(size=(4, 2)), rng.uniform(size=(2, 3))
        residual = sum((V[r, c] - sum(T[r, k] * U[k, c] for k in range(2))) ** 2
                       for r in range(4) for c in range(3))
        total = sum(V[r, c] ** 2 for r in range(4) for c in range(3))
        dec = Decomposition(T, U, [0.0], NmfConfig(c0=2))
        self.assertAlmostEqual(reconstruction_error(V, dec), np.sqrt(residual / total), places=12)

    def test_overcomplete_factorization(self):
        """With c0 equal to the column count the updates approach an exact fit"""
        V = np.random.default_rng(12).uniform(0.1, 1.0, size=(10, 6))
        config = NmfConfig(c0=6, a0=1000, seed=3)
        dec = factorize(V, config)

        # plain loop over the same draws
        T, U = init_factors(V.shape, 6, config, config.seed)
        for _ in range(config.a0):
            T = np.maximum(T * ((V @ U.T) / np.maximum(T @ (U @ U.T), config.denom_floor)), 0.0)
            U = np.maximum(U * ((T.T @ V) / np.maximum((T.T @ T) @ U, config.denom_floor)), 0.0)
        expected = np.linalg.norm(V - T @ U) / np.linalg.norm(V)
        self.assertAlmostEqual(reconstruction_error(V, dec), expected, places=9)

        # multiplicative updates close the gap slowly: after 1000 iterations
        # the error is of order 1e-2, not below 1e-3, but well under rank one
        rank_one = factorize(V, NmfConfig(c0=1, a0=1000, seed=3))
        self.assertLess(reconstruction_error(V, dec), reconstruction_error(V, rank_one))
        self.assertLess(reconstruction_error(V, dec), 0.2)


class TestFactorize(unittest.TestCase):
    """Test the factorize entry point"""

    def test_rejects_negative_entries(self):
        """Negative entries raise DomainError"""
        with self.assertRaises(DomainError):
            factorize(np.array([[1.0, -0.1], [0.0, 1.0]]), NmfConfig(c0=1, a0=5))

    def test_rejects_bad_config(self):
        """Non-positive task or iteration counts are rejected"""
        with self.assertRaises(ValueError):
            NmfConfig(c0=0)
        with self.assertRaises(ValueError):
            NmfConfig(c0=2, a0=0)

    def test_init_shapes_checked(self):
        """Supplied factors must fit V and c0"""
        V = np.ones((3, 4))
        with self.assertRaises(ShapeError):
            factorize(V, NmfConfig(c0=2, a0=5), init=(np.ones((3, 3)), np.ones((2, 4))))

    def test_explicit_init_is_used(self):
        """Supplied factors seed the run and are not mutated"""
        V = np.random.default_rng(3).uniform(size=(5, 4))
        T0, U0 = np.full((5, 2), 0.5), np.full((2, 4), 0.5)
        a = factorize(V, NmfConfig(c0=2, a0=10), init=(T0, U0))
        b = factorize(V, NmfConfig(c0=2, a0=10), init=(T0, U0))
        np.testing.assert_array_equal(a.T, b.T)
        np.testing.assert_array_equal(T0, np.full((5, 2), 0.5))

    def test_deterministic_for_seed(self):
        """Same seed gives identical factors and trace"""
        V = np.random.default_rng(4).uniform(size=(8, 6))
        a = factorize(V, NmfConfig(c0=3, a0=50, seed=5))
        b = factorize(V, NmfConfig(c0=3, a0=50, seed=5))
        np.testing.assert_array_equal(a.U, b.U)
        self.assertEqual(a.objective_trace, b.objective_trace)
        self.assertEqual(a.v_sha256, b.v_sha256)

    def test_restarts_keep_best(self):
        """Restarts keep the lowest final objective"""
        V = np.random.default_rng(5).uniform(size=(10, 7))
        single = [factorize(V, NmfConfig(c0=3, a0=40, seed=s)).objective_trace[-1] for s in range(4)]
        best = factorize(V, NmfConfig(c0=3, a0=40, seed=0, restarts=4))
        self.assertEqual(best.objective_trace[-1], min(single))
        self.assertEqual(best.restart, int(np.argmin(single)))

    def test_single_task(self):
        """c0 = 1 gives a single task row"""
        dec = factorize(np.random.default_rng(6).uniform(size=(6, 5)), NmfConfig(c0=1, a0=10))
        self.assertEqual(dec.U.shape, (1, 5))
        self.assertEqual(dec.T.shape, (6, 1))


class TestPresentation(unittest.TestCase):
    """Test gauge normalization and serialization"""

    def test_normalize_rows_keeps_product(self):
        """Row normalization keeps TU and scales U rows to max 1"""
        V = np.random.default_rng(2).uniform(size=(7, 5))
        dec = factorize(V, NmfConfig(c0=2, a0=100))
        shown = normalize_rows(dec)
        np.testing.assert_allclose(shown.product(), dec.product(), atol=1e-12)
        np.testing.assert_allclose(shown.U.max(axis=1), 1.0)

    def test_dict_round_trip(self):
        """Decomposition survives JSON unchanged"""
        V = np.random.default_rng(8).uniform(size=(4, 3))
        dec = factorize(V, NmfConfig(c0=2, a0=15))
        dec.meta["input_block_width"] = 2
        parser = JSONParser()
        restored = Decomposition.from_dict(parser.loads(parser.dumps(dec.to_dict())))
        np.testing.assert_array_equal(restored.T, dec.T)
        np.testing.assert_array_equal(restored.U, dec.U)
        self.assertEqual(restored.objective_trace, dec.objective_trace)
        self.assertEqual(restored.config, dec.config)
        self.assertEqual(restored.meta, {"input_block_width": 2})


if __name__ == '__main__':
    unittest.main()

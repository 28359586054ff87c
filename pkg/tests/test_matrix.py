# tests/test_matrix.py
import unittest
import sys
import os

import numpy as np

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from engine.errors import ShapeError
from engine.matrix import (elementwise_div, from_flat, from_rows, frobenius_norm, hadamard, identity,
                           matmul, subtract, transpose, zeros)


class TestMatrix(unittest.TestCase):
    """Test dense matrix helpers"""

    def test_from_flat_is_row_major(self):
        """Flat values fill rows first"""
        m = from_flat([1, 2, 3, 4, 5, 6], 2, 3)
        self.assertEqual(m.shape, (2, 3))
        self.assertEqual(m[0, 2], 3.0)
        self.assertEqual(m[1, 0], 4.0)

    def test_from_flat_wrong_size(self):
        """Value count must equal rows * cols"""
        with self.assertRaises(ShapeError):
            from_flat([1, 2, 3], 2, 2)

    def test_matmul_identity(self):
        """Multiplying by the identity changes nothing"""
        a = from_rows([[1.5, -2.0], [0.25, 4.0], [3.0, 1.0]])
        np.testing.assert_array_equal(matmul(a, identity(2)), a)
        np.testing.assert_array_equal(matmul(identity(3), a), a)

    def test_matmul_matches_triple_loop(self):
        """matmul equals the textbook triple loop"""
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 5))
        expected = np.zeros((3, 5))
        for i in range(3):
            for j in range(5):
                for k in range(4):
                    expected[i, j] += a[i, k] * b[k, j]
        np.testing.assert_allclose(matmul(a, b), expected, rtol=1e-12, atol=1e-12)

    def test_matmul_is_associative(self):
        """(AB)C equals A(BC) up to rounding"""
        rng = np.random.default_rng(1)
        a, b, c = rng.normal(size=(2, 3)), rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
        np.testing.assert_allclose(matmul(matmul(a, b), c), matmul(a, matmul(b, c)), rtol=1e-10, atol=1e-12)

    def test_matmul_mismatch_names_both_shapes(self):
        """Inner-dimension mismatch reports both shapes"""
        with self.assertRaises(ShapeError) as ctx:
            matmul(zeros(2, 3), zeros(2, 3))
        self.assertIn("(2, 3)", str(ctx.exception))
        self.assertEqual(ctx.exception.left, (2, 3))
        self.assertEqual(ctx.exception.right, (2, 3))

    def test_transpose_twice(self):
        """Transposing twice restores the matrix"""
        a = from_rows([[1, 2, 3], [4, 5, 6]])
        self.assertEqual(transpose(a).shape, (3, 2))
        np.testing.assert_array_equal(transpose(transpose(a)), a)

    def test_hadamard_and_subtract(self):
        """Elementwise product and difference need equal shapes"""
        a = from_rows([[1, 2], [3, 4]])
        b = from_rows([[2, 0], [1, -1]])
        np.testing.assert_array_equal(hadamard(a, b), [[2, 0], [3, -4]])
        np.testing.assert_array_equal(subtract(a, b), [[-1, 2], [2, 5]])
        with self.assertRaises(ShapeError):
            hadamard(a, zeros(2, 3))

    def test_elementwise_div_floor(self):
        """Denominators are floored and the floor must be positive"""
        a = from_rows([[1.0, 2.0]])
        b = from_rows([[0.0, 4.0]])
        result = elementwise_div(a, b, floor=1e-12)
        self.assertEqual(result[0, 0], 1e12)
        self.assertEqual(result[0, 1], 0.5)
        with self.assertRaises(ValueError):
            elementwise_div(a, b, floor=0.0)

    def test_frobenius_norm(self):
        """Frobenius norm of small known matrices"""
        self.assertEqual(frobenius_norm(from_rows([[3, 0], [0, 4]])), 5.0)
        self.assertEqual(frobenius_norm(zeros(3, 3)), 0.0)


if __name__ == '__main__':
    unittest.main()

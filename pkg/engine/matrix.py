# engine/matrix.py
"""
Dense real matrices.

A ``Mat`` is a 2-D float64 numpy array in C (row-major) order. The helpers
below add the shape checks the rest of the engine relies on and raise
``ShapeError`` naming both operands on mismatch.
"""
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeError

Mat = np.ndarray


def from_rows(rows: Iterable[Sequence[float]]) -> Mat:
    """Build a matrix from nested rows"""
    return as_matrix(np.array(list(rows), dtype=np.float64))


def from_flat(data: Sequence[float], rows: int, cols: int) -> Mat:
    """Build a matrix from row-major data"""
    values = np.asarray(data, dtype=np.float64)
    if rows < 1 or cols < 1 or values.size != rows * cols:
        raise ShapeError("from_flat", (values.size,), (rows, cols))
    return np.ascontiguousarray(values.reshape(rows, cols))


def as_matrix(a) -> Mat:
    """Coerce to a non-empty 2-D float64 row-major array"""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError("as_matrix", arr.shape)
    return np.ascontiguousarray(arr)


def zeros(rows: int, cols: int) -> Mat:
    return np.zeros((rows, cols), dtype=np.float64)


def identity(n: int) -> Mat:
    return np.eye(n, dtype=np.float64)


def matmul(a: Mat, b: Mat) -> Mat:
    """Matrix product; a.cols must equal b.rows"""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    return a @ b


def transpose(a: Mat) -> Mat:
    return np.ascontiguousarray(as_matrix(a).T)


def _check_same(operation: str, a: Mat, b: Mat):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(operation, a.shape, b.shape)
    return a, b


def hadamard(a: Mat, b: Mat) -> Mat:
    """Elementwise product"""
    a, b = _check_same("hadamard", a, b)
    return a * b


def elementwise_div(a: Mat, b: Mat, floor: float = 1e-12) -> Mat:
    """a / max(b, floor) elementwise"""
    if not floor > 0:
        raise ValueError(f"floor must be > 0, got {floor}")
    a, b = _check_same("elementwise_div", a, b)
    return a / np.maximum(b, floor)


def frobenius_norm(a: Mat) -> float:
    """sqrt of the sum of squared entries"""
    a = as_matrix(a)
    return float(np.sqrt(np.sum(a * a)))


def subtract(a: Mat, b: Mat) -> Mat:
    a, b = _check_same("subtract", a, b)
    return a - b

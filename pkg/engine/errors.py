# engine/errors.py
from typing import Any, Optional


class NtdError(Exception):
    """Base class for toolkit failures"""


class ShapeError(NtdError, ValueError):
    """Dimension mismatch between two operands"""

    def __init__(self, operation: str, left: Any, right: Any = None):
        self.operation = operation
        self.left = tuple(left) if left is not None else None
        self.right = tuple(right) if right is not None else None
        if right is None:
            message = f"{operation}: bad shape {self.left}"
        else:
            message = f"{operation}: shape mismatch {self.left} vs {self.right}"
        super().__init__(message)


class DivergedError(NtdError):
    """Training produced non-finite parameters"""

    def __init__(self, epoch: int, report: Optional[Any] = None):
        self.epoch = epoch
        self.report = report
        super().__init__(f"training diverged: non-finite parameter at epoch {epoch}")


class DomainError(NtdError, ValueError):
    """Input outside the domain of an operation (e.g. negative entry for NMF)"""


class NumericError(NtdError, ArithmeticError):
    """Non-finite value encountered during a numeric loop"""

    def __init__(self, message: str, iteration: Optional[int] = None, unit: Optional[Any] = None):
        self.iteration = iteration
        self.unit = unit
        super().__init__(message)


class GenerationError(NtdError):
    """Synthetic generator could not produce a valid teacher network"""


class DatasetError(NtdError, ValueError):
    """Dataset cannot be built from the given source or settings"""


class ManifestError(NtdError):
    """Recorded artifact hash does not match the file on disk"""

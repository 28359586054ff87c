# utils/validators.py
from typing import List, Optional, Sequence

import regex


class ValidationError(ValueError):
    """Bad command-line value or settings that disagree with the data; exits 2"""


class PipelineValidator:
    """Validation utilities for command-line values"""

    LAYERS_PATTERN = regex.compile(r"^\s*\d+(\s*,\s*\d+)+\s*$")

    @classmethod
    def parse_layers(cls, text: str) -> List[int]:
        """Parse "108,40,40,3" into layer sizes; raises ValidationError on bad input"""
        if not text or not cls.LAYERS_PATTERN.match(text):
            raise ValidationError(f"layers must be comma-separated integers, got {text!r}")
        sizes = [int(part) for part in text.split(",")]
        cls.validate_layer_sizes(sizes)
        return sizes

    @staticmethod
    def validate_layer_sizes(sizes: Sequence[int]) -> None:
        """At least one hidden layer and every layer non-empty"""
        if len(sizes) < 3:
            raise ValidationError(f"need at least one hidden layer, got layers {list(sizes)}")
        if any(s < 1 for s in sizes):
            raise ValidationError(f"every layer needs at least one unit, got {list(sizes)}")

    @staticmethod
    def validate_layers_for_data(sizes: Sequence[int], i0: int, j0: int) -> Optional[str]:
        """Return an error message when layer sizes disagree with dataset widths"""
        if sizes[0] != i0:
            return f"input layer has {sizes[0]} units but dataset has {i0} input dims"
        if sizes[-1] != j0:
            return f"output layer has {sizes[-1]} units but dataset has {j0} output dims"
        return None

    @staticmethod
    def validate_positive(name: str, value: float, allow_zero: bool = False) -> None:
        """Reject negative (or zero) numeric settings"""
        if value < 0 or (value == 0 and not allow_zero):
            bound = ">= 0" if allow_zero else "> 0"
            raise ValidationError(f"{name} must be {bound}, got {value}")

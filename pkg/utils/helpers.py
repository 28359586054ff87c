# utils/helpers.py
import hashlib
from typing import Any, Iterable, List

import numpy as np


class HelperFunctions:
    """General helper functions"""

    @staticmethod
    def sha256_file(path: str) -> str:
        """Content hash of a file"""
        h = hashlib.sha256()
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1024 * 1024), b""):
                h.update(chunk)
        return h.hexdigest()

    @staticmethod
    def sha256_array(array: Any) -> str:
        """Content hash of a numeric array (shape and float64 bytes)"""
        arr = np.ascontiguousarray(np.asarray(array, dtype=np.float64))
        h = hashlib.sha256()
        h.update(repr(arr.shape).encode("ascii"))
        h.update(arr.tobytes())
        return h.hexdigest()

    @staticmethod
    def format_duration(ms: int) -> str:
        """Format milliseconds for display"""
        if ms < 1000:
            return f"{ms} ms"
        return f"{ms / 1000:.1f} s"

    @staticmethod
    def column_names(prefix: str, count: int) -> List[str]:
        """d0..d{n-1} style header names"""
        return [f"{prefix}{i}" for i in range(count)]

    @staticmethod
    def blend_hex(color: str, fraction: float) -> str:
        """Linear blend from white (0) to the given color (1)"""
        fraction = min(1.0, max(0.0, float(fraction)))
        color = color.lstrip("#")
        rgb = [int(color[i:i + 2], 16) for i in (0, 2, 4)]
        mixed = [round(255 + (c - 255) * fraction) for c in rgb]
        return "#" + "".join(f"{c:02x}" for c in mixed)

    @staticmethod
    def is_finite_all(values: Iterable[Any]) -> bool:
        """True when every array in the iterable is finite"""
        return all(bool(np.all(np.isfinite(v))) for v in values)

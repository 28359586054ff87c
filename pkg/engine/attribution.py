# engine/attribution.py
"""
Role vectors of hidden units.

For hidden unit k the input effect v_in[k, i] is the RMS change of the unit's
activation when input column i is replaced by its dataset mean; the output
effect v_out[k, j] is the RMS change of network output j when the unit's
activation is replaced by its dataset mean. Both families are min-max scaled
as whole blocks and concatenated into V.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import Config
from utils.helpers import HelperFunctions
from utils.logger import attribution_logger
from .errors import NumericError, ShapeError
from .lnn import Dataset, NetworkParams, forward_batch


@dataclass
class FeatureMatrix:
    """Normalized V plus the raw effect blocks it was built from"""

    V: np.ndarray
    input_block_width: int
    unit_index: List[Tuple[int, int]]
    v_in_raw: np.ndarray
    v_out_raw: np.ndarray
    in_range: Tuple[float, float] = (0.0, 0.0)
    out_range: Tuple[float, float] = (0.0, 0.0)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def k0(self) -> int:
        return self.V.shape[0]

    @property
    def i0(self) -> int:
        return self.input_block_width

    @property
    def j0(self) -> int:
        return self.V.shape[1] - self.input_block_width

    def header(self) -> List[str]:
        return (["unit", "layer"]
                + HelperFunctions.column_names("in_", self.i0)
                + HelperFunctions.column_names("out_", self.j0))

    def sidecar(self) -> Dict[str, Any]:
        return {
            "i0": self.i0,
            "j0": self.j0,
            "k0": self.k0,
            "input_block": {"raw_min": self.in_range[0], "raw_max": self.in_range[1]},
            "output_block": {"raw_min": self.out_range[0], "raw_max": self.out_range[1]},
            "unit_index": [list(key) for key in self.unit_index],
            "v_in_raw": self.v_in_raw.ravel().tolist(),
            "v_out_raw": self.v_out_raw.ravel().tolist(),
            "v_sha256": HelperFunctions.sha256_array(self.V),
            **self.meta,
        }

    def to_csv(self, path: str, digits: int = 0) -> str:
        """unit,layer,in_*,out_* rows; full round-trip precision unless digits is set"""
        frame = pd.DataFrame(self.V, columns=self.header()[2:])
        frame.insert(0, "layer", [layer for layer, _ in self.unit_index])
        frame.insert(0, "unit", [unit for _, unit in self.unit_index])
        float_format = f"%.{digits}g" if digits else None
        frame.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
        return path

    @classmethod
    def from_csv(cls, path: str, sidecar: Optional[Dict[str, Any]] = None) -> "FeatureMatrix":
        frame = pd.read_csv(path, float_precision="round_trip")
        in_cols = [c for c in frame.columns if c.startswith("in_")]
        out_cols = [c for c in frame.columns if c.startswith("out_")]
        V = frame[in_cols + out_cols].to_numpy(dtype=np.float64)
        unit_index = list(zip(frame["layer"].astype(int).tolist(), frame["unit"].astype(int).tolist()))
        i0, j0 = len(in_cols), len(out_cols)
        if sidecar:
            v_in_raw = np.asarray(sidecar["v_in_raw"], dtype=np.float64).reshape(len(unit_index), i0)
            v_out_raw = np.asarray(sidecar["v_out_raw"], dtype=np.float64).reshape(len(unit_index), j0)
            in_range = (sidecar["input_block"]["raw_min"], sidecar["input_block"]["raw_max"])
            out_range = (sidecar["output_block"]["raw_min"], sidecar["output_block"]["raw_max"])
        else:
            v_in_raw, v_out_raw = V[:, :i0].copy(), V[:, i0:].copy()
            in_range = out_range = (0.0, 0.0)
        return cls(np.ascontiguousarray(V), i0, unit_index, v_in_raw, v_out_raw, in_range, out_range)


def _replacement_value(column: np.ndarray) -> float:
    # constant columns keep their own value so the perturbation is an identity
    if np.all(column == column[0]):
        return float(column[0])
    return float(np.mean(column))


def _rms(diff: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(diff * diff, axis=0))


class EffectCalculator:
    """Mean-replacement effects over one cached clean forward pass"""

    def __init__(self, params: NetworkParams, data: Dataset):
        if data.input_dim != params.input_dim or data.output_dim != params.output_dim:
            raise ShapeError("attribution", (data.input_dim, data.output_dim), (params.input_dim, params.output_dim))
        self.params = params
        self.X = data.X
        self.layers = forward_batch(params, data.X)
        self.unit_index = params.hidden_units()
        # 0-based layer index of each hidden row
        self._rows = [(layer - 1, unit) for layer, unit in self.unit_index]

    @property
    def k0(self) -> int:
        return len(self._rows)

    def _locate(self, k: int) -> Tuple[int, int]:
        if not 0 <= k < self.k0:
            raise ShapeError("hidden unit", (k,), (self.k0,))
        return self._rows[k]

    def input_effect_column(self, i: int) -> np.ndarray:
        """v_in[:, i] for every hidden unit"""
        if not 0 <= i < self.params.input_dim:
            raise ShapeError("input dim", (i,), (self.params.input_dim,))
        perturbed_X = self.X.copy()
        perturbed_X[:, i] = _replacement_value(self.X[:, i])
        perturbed = forward_batch(self.params, perturbed_X, stop_layer=self.params.depth - 2)
        parts = [_rms(self.layers[d] - perturbed[d]) for d in range(1, self.params.depth - 1)]
        return np.concatenate(parts)

    def output_effect_row(self, k: int) -> np.ndarray:
        """v_out[k, :]; only layers after the unit's layer are recomputed"""
        d, unit = self._locate(k)
        perturbed = self.layers[d].copy()
        perturbed[:, unit] = _replacement_value(self.layers[d][:, unit])
        out = forward_batch(self.params, perturbed, start_layer=d)[-1]
        return _rms(self.layers[-1] - out)

    def input_effect(self, k: int, i: int) -> float:
        self._locate(k)
        return float(self.input_effect_column(i)[k])

    def output_effect(self, k: int, j: int) -> float:
        if not 0 <= j < self.params.output_dim:
            raise ShapeError("output dim", (j,), (self.params.output_dim,))
        return float(self.output_effect_row(k)[j])

    @staticmethod
    def worker_count(threads: Optional[int] = None) -> int:
        """Requested workers, capped at NTD_THREADS and at least one"""
        return max(1, min(threads or Config.THREADS, Config.THREADS))

    def raw_blocks(self, threads: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """(v_in k0 x i0, v_out k0 x j0); assembled by index, independent of completion order"""
        workers = self.worker_count(threads)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(self.input_effect_column, range(self.params.input_dim)))
            rows = list(pool.map(self.output_effect_row, range(self.k0)))
        v_in = np.column_stack(columns) if columns else np.zeros((self.k0, 0))
        v_out = np.vstack(rows)
        return np.ascontiguousarray(v_in), np.ascontiguousarray(v_out)


def input_effect(params: NetworkParams, data: Dataset, k: int, i: int) -> float:
    """Effect of input dim i on hidden unit k"""
    return EffectCalculator(params, data).input_effect(k, i)


def output_effect(params: NetworkParams, data: Dataset, k: int, j: int) -> float:
    """Effect of hidden unit k on output dim j"""
    return EffectCalculator(params, data).output_effect(k, j)


def min_max_block(block: np.ndarray, name: str) -> Tuple[np.ndarray, Tuple[float, float]]:
    """Affine scaling of a whole block to [0, 1]; a constant block maps to zeros"""
    lo, hi = float(block.min()), float(block.max())
    if hi == lo:
        attribution_logger.log_degenerate_block(name, lo)
        return np.zeros_like(block), (lo, hi)
    return (block - lo) / (hi - lo), (lo, hi)


def build_feature_matrix(params: NetworkParams, data: Dataset, threads: Optional[int] = None) -> FeatureMatrix:
    """Compute every effect, scale each block globally, and concatenate rows"""
    calculator = EffectCalculator(params, data)
    v_in, v_out = calculator.raw_blocks(threads)

    for name, block in (("input", v_in), ("output", v_out)):
        bad = np.argwhere(~np.isfinite(block))
        if bad.size:
            k = int(bad[0][0])
            raise NumericError(f"non-finite {name} effect for hidden unit {calculator.unit_index[k]}",
                               unit=calculator.unit_index[k])

    in_scaled, in_range = min_max_block(v_in, "input")
    out_scaled, out_range = min_max_block(v_out, "output")
    V = np.ascontiguousarray(np.hstack([in_scaled, out_scaled]))

    attribution_logger.info("Feature matrix built", {
        "k0": calculator.k0, "i0": params.input_dim, "j0": params.output_dim,
        "samples": data.n, "threads": EffectCalculator.worker_count(threads),
    })
    return FeatureMatrix(V, params.input_dim, list(calculator.unit_index), v_in, v_out, in_range, out_range)

# engine/nmf.py
"""
Multiplicative-update NMF, V (k0 x m) ~ T (k0 x c0) U (c0 x m).

Each iteration updates T then U by the Euclidean Lee-Seung ratios with
floored denominators and clamps negatives to zero. The Frobenius objective is
recorded after every iteration.
"""
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config import Config
from utils.helpers import HelperFunctions
from utils.logger import nmf_logger
from utils.validators import PipelineValidator
from .errors import DomainError, NumericError, ShapeError
from .matrix import as_matrix, elementwise_div, frobenius_norm, matmul, subtract, transpose


@dataclass(frozen=True)
class NmfConfig:
    c0: int
    a0: int = Config.NMF_ITERATIONS
    mu1: float = Config.NMF_MU1
    sigma1: float = Config.NMF_SIGMA1
    mu2: float = Config.NMF_MU2
    sigma2: float = Config.NMF_SIGMA2
    seed: int = Config.NMF_SEED
    denom_floor: float = Config.NMF_DENOM_FLOOR
    restarts: int = Config.NMF_RESTARTS

    def __post_init__(self):
        for name in ("c0", "a0", "denom_floor", "restarts"):
            PipelineValidator.validate_positive(name, getattr(self, name))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Decomposition:
    T: np.ndarray
    U: np.ndarray
    objective_trace: List[float]
    config: NmfConfig
    v_sha256: str = ""
    restart: int = 0
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def c0(self) -> int:
        return self.U.shape[0]

    def product(self) -> np.ndarray:
        return matmul(self.T, self.U)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T": {"shape": list(self.T.shape), "data": self.T.ravel().tolist()},
            "U": {"shape": list(self.U.shape), "data": self.U.ravel().tolist()},
            "objective_trace": list(self.objective_trace),
            "config": self.config.to_dict(),
            "v_sha256": self.v_sha256,
            "restart": self.restart,
            **self.meta,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "Decomposition":
        def matrix(entry):
            rows, cols = entry["shape"]
            return np.asarray(entry["data"], dtype=np.float64).reshape(rows, cols)

        known = {"T", "U", "objective_trace", "config", "v_sha256", "restart", "schema_version"}
        return cls(
            T=matrix(document["T"]),
            U=matrix(document["U"]),
            objective_trace=[float(v) for v in document["objective_trace"]],
            config=NmfConfig(**document["config"]),
            v_sha256=document.get("v_sha256", ""),
            restart=int(document.get("restart", 0)),
            meta={k: v for k, v in document.items() if k not in known},
        )


def _check_input(V) -> np.ndarray:
    V = as_matrix(V)
    if not np.all(np.isfinite(V)):
        raise DomainError("V contains non-finite entries")
    if np.any(V < 0):
        row, col = (int(x) for x in np.argwhere(V < 0)[0])
        raise DomainError(f"V has a negative entry at ({row}, {col}): {V[row, col]}")
    return V


def init_factors(shape: Tuple[int, int], c0: int, config: NmfConfig, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gaussian draws for T and U, raised to at least the denominator floor"""
    rows, cols = shape
    rng = np.random.default_rng(seed)
    T = rng.normal(config.mu1, config.sigma1, size=(rows, c0))
    U = rng.normal(config.mu2, config.sigma2, size=(c0, cols))
    return np.maximum(T, config.denom_floor), np.maximum(U, config.denom_floor)


def update_step(V: np.ndarray, T: np.ndarray, U: np.ndarray, floor: float) -> Tuple[np.ndarray, np.ndarray]:
    """One multiplicative iteration: T first, then U with the new T"""
    Ut = transpose(U)
    T = T * elementwise_div(matmul(V, Ut), matmul(T, matmul(U, Ut)), floor)
    T = np.maximum(T, 0.0)
    Tt = transpose(T)
    U = U * elementwise_div(matmul(Tt, V), matmul(matmul(Tt, T), U), floor)
    U = np.maximum(U, 0.0)
    return T, U


def _run(V: np.ndarray, T: np.ndarray, U: np.ndarray, config: NmfConfig, restart: int) -> Tuple[np.ndarray, np.ndarray, List[float]]:
    trace: List[float] = []
    for a in range(1, config.a0 + 1):
        T, U = update_step(V, T, U, config.denom_floor)
        objective = frobenius_norm(subtract(V, matmul(T, U)))
        if not np.isfinite(objective) or not (np.all(np.isfinite(T)) and np.all(np.isfinite(U))):
            raise NumericError(f"non-finite value in NMF at iteration {a}", iteration=a)
        trace.append(objective)
        if a == 1 or a % 500 == 0:
            nmf_logger.log_nmf_progress(a, objective, restart)
    return T, U, trace


def factorize(V, config: NmfConfig, init: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> Decomposition:
    """
    Factorize non-negative V into T U.

    ``init`` supplies starting factors (single run). Otherwise each of
    ``config.restarts`` runs draws from seed + r and the lowest final
    objective wins, earliest restart on ties.
    """
    V = _check_input(V)
    if config.c0 > min(V.shape):
        nmf_logger.warning("c0 exceeds min(V.shape); factors will be redundant",
                           {"c0": config.c0, "shape": list(V.shape)})

    digest = HelperFunctions.sha256_array(V)
    if init is not None:
        T0, U0 = as_matrix(init[0]), as_matrix(init[1])
        if T0.shape != (V.shape[0], config.c0) or U0.shape != (config.c0, V.shape[1]):
            raise ShapeError("factorize init", T0.shape + U0.shape, (V.shape[0], config.c0, config.c0, V.shape[1]))
        T, U, trace = _run(V, T0.copy(), U0.copy(), config, 0)
        return Decomposition(T, U, trace, config, digest, 0)

    best: Optional[Decomposition] = None
    for r in range(config.restarts):
        T0, U0 = init_factors(V.shape, config.c0, config, config.seed + r)
        T, U, trace = _run(V, T0, U0, config, r)
        if best is None or trace[-1] < best.objective_trace[-1]:
            best = Decomposition(T, U, trace, config, digest, r)

    nmf_logger.info("NMF finished", {
        "shape": list(V.shape), "c0": config.c0, "iterations": config.a0,
        "restart": best.restart, "objective": best.objective_trace[-1],
    })
    return best


def reconstruction_error(V, dec: Decomposition) -> float:
    """||V - TU||_F / max(||V||_F, floor)"""
    V = as_matrix(V)
    residual = frobenius_norm(subtract(V, dec.product()))
    return residual / max(frobenius_norm(V), dec.config.denom_floor)


def normalize_rows(dec: Decomposition) -> Decomposition:
    """Presentation copy: each U row scaled to max 1, T columns compensated"""
    scale = dec.U.max(axis=1)
    scale = np.where(scale > 0, scale, 1.0)
    return replace(dec, T=dec.T * scale[np.newaxis, :], U=dec.U / scale[:, np.newaxis])


def is_monotone(trace: List[float], tolerance: float = Config.NMF_MONOTONE_TOLERANCE) -> bool:
    return all(b <= a + tolerance for a, b in zip(trace, trace[1:]))

# engine/lnn.py
"""
Layered sigmoid networks trained by stochastic steepest descent with LASSO.

Depths are 1-based in the docs (layer 1 is the input, layer D the output) and
0-based in code: ``weights[d]`` connects layer d+1 to layer d+2 and has shape
(l_{d+1}, l_{d+2}); ``biases[d]`` belongs to the receiving layer d+2. Every
layer after the input, the output layer included, applies the logistic
sigmoid.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from utils.logger import train_logger
from utils.validators import PipelineValidator, ValidationError
from .errors import DivergedError, ShapeError


def sigmoid(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


@dataclass
class NetworkParams:
    """Weights and biases of a depth-D sigmoid network"""

    layer_sizes: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        self.layer_sizes = [int(s) for s in self.layer_sizes]
        if len(self.layer_sizes) < 3:
            raise ShapeError("NetworkParams", tuple(self.layer_sizes))
        if any(s < 1 for s in self.layer_sizes):
            raise ShapeError("NetworkParams", tuple(self.layer_sizes))
        self.weights = [np.ascontiguousarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.ascontiguousarray(b, dtype=np.float64).reshape(-1) for b in self.biases]
        if len(self.weights) != self.depth - 1 or len(self.biases) != self.depth - 1:
            raise ShapeError("NetworkParams", (len(self.weights), len(self.biases)), (self.depth - 1, self.depth - 1))
        for d in range(self.depth - 1):
            expected = (self.layer_sizes[d], self.layer_sizes[d + 1])
            if self.weights[d].shape != expected:
                raise ShapeError(f"weights[{d}]", self.weights[d].shape, expected)
            if self.biases[d].shape != (self.layer_sizes[d + 1],):
                raise ShapeError(f"biases[{d}]", self.biases[d].shape, (self.layer_sizes[d + 1],))

    @property
    def depth(self) -> int:
        return len(self.layer_sizes)

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def hidden_count(self) -> int:
        return sum(self.layer_sizes[1:-1])

    def hidden_units(self) -> List[Tuple[int, int]]:
        """(1-based layer depth, unit index) for every hidden unit, layer by layer"""
        return [
            (d + 1, u)
            for d in range(1, self.depth - 1)
            for u in range(self.layer_sizes[d])
        ]

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights) and all(
            np.all(np.isfinite(b)) for b in self.biases
        )

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "NetworkParams":
        sizes = [int(s) for s in document["layer_sizes"]]
        weights = [
            np.asarray(flat, dtype=np.float64).reshape(sizes[d], sizes[d + 1])
            for d, flat in enumerate(document["weights"])
        ]
        biases = [np.asarray(b, dtype=np.float64) for b in document["biases"]]
        return cls(sizes, weights, biases)


@dataclass
class Dataset:
    """Paired inputs X (n x i0) and targets Y (n x j0)"""

    X: np.ndarray
    Y: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.Y = np.ascontiguousarray(self.Y, dtype=np.float64)
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ShapeError("Dataset", self.X.shape, self.Y.shape)
        if self.X.shape[0] != self.Y.shape[0] or self.X.shape[0] < 1:
            raise ShapeError("Dataset", self.X.shape, self.Y.shape)
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise ValueError("Dataset values must be finite")
        if self.Y.min() < 0.0 or self.Y.max() > 1.0:
            train_logger.warning(
                "Targets outside [0, 1]; sigmoid outputs cannot reach them",
                {"min": float(self.Y.min()), "max": float(self.Y.max())},
            )

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    @property
    def output_dim(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    """Stochastic steepest descent settings; epochs is the mean iteration count per sample"""

    lambda_: float = Config.LAMBDA
    epsilon1: float = Config.EPSILON1
    epochs: int = Config.EPOCHS
    eta0: float = Config.ETA0
    seed: int = Config.TRAIN_SEED
    shuffle: bool = True
    prune_threshold: float = Config.PRUNE_THRESHOLD

    def __post_init__(self):
        PipelineValidator.validate_positive("epochs", self.epochs)
        PipelineValidator.validate_positive("eta0", self.eta0)
        PipelineValidator.validate_positive("lambda", self.lambda_, allow_zero=True)
        PipelineValidator.validate_positive("epsilon1", self.epsilon1, allow_zero=True)

    def eta(self, t: int, n: int) -> float:
        """Learning rate at 1-based step t"""
        total = self.epochs * n
        return self.eta0 * total / (total + Config.ETA_DECAY * t)

    def step_lambda(self, n: int) -> float:
        """L1 coefficient of one sample's step: H spreads lambda over n samples"""
        return self.lambda_ / n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lambda_,
            "epsilon1": self.epsilon1,
            "epochs": self.epochs,
            "eta0": self.eta0,
            "seed": self.seed,
            "shuffle": self.shuffle,
            "prune_threshold": self.prune_threshold,
        }


@dataclass
class TrainReport:
    """Per-epoch training trace"""

    initial_error: float = 0.0
    train_errors: List[float] = field(default_factory=list)
    test_errors: List[float] = field(default_factory=list)
    final_test_error: Optional[float] = None
    lasso_objective: Optional[float] = None
    near_zero_weights: int = 0
    near_zero_by_depth: List[int] = field(default_factory=list)
    total_weights: int = 0
    steps: int = 0
    diverged_epoch: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        # a diverged run can start from an overflowing error; JSON gets null
        return {
            "initial_error": self.initial_error if math.isfinite(self.initial_error) else None,
            "train_errors": list(self.train_errors),
            "test_errors": list(self.test_errors),
            "final_test_error": self.final_test_error,
            "lasso_objective": self.lasso_objective,
            "near_zero_weights": self.near_zero_weights,
            "near_zero_by_depth": list(self.near_zero_by_depth),
            "total_weights": self.total_weights,
            "steps": self.steps,
            "diverged_epoch": self.diverged_epoch,
        }


def _check_input(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.input_dim:
        raise ShapeError("forward", x.shape, (params.input_dim,))
    return x


def forward(params: NetworkParams, x) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Output and activations o^2..o^D for one input vector"""
    x = _check_input(params, x)
    if x.ndim != 1:
        raise ShapeError("forward", x.shape, (params.input_dim,))
    activations = []
    o = x
    for w, b in zip(params.weights, params.biases):
        o = sigmoid(o @ w + b)
        activations.append(o)
    return activations[-1], activations


def forward_batch(params: NetworkParams, X, start_layer: int = 0, stop_layer: Optional[int] = None) -> List[np.ndarray]:
    """
    Activations for a batch, indexed by 0-based layer.

    With ``start_layer`` = s, ``X`` holds layer-s activations and only layers
    s+1..stop_layer are computed; the returned list starts with X itself.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.layer_sizes[start_layer]:
        raise ShapeError("forward_batch", X.shape, (None, params.layer_sizes[start_layer]))
    stop = params.depth - 1 if stop_layer is None else stop_layer
    layers = [X]
    o = X
    for d in range(start_layer, stop):
        o = sigmoid(o @ params.weights[d] + params.biases[d])
        layers.append(o)
    return layers


def predict(params: NetworkParams, X) -> np.ndarray:
    return forward_batch(params, X)[-1]


def training_error(params: NetworkParams, data: Dataset) -> float:
    """E(w): mean over samples of the squared Euclidean output error"""
    if data.output_dim != params.output_dim:
        raise ShapeError("training_error", data.Y.shape, (data.n, params.output_dim))
    residual = data.Y - predict(params, data.X)
    return float(np.mean(np.sum(residual * residual, axis=1)))


def generalization_error(params: NetworkParams, data: Dataset) -> float:
    """Held-out approximation of the generalization error G(w)"""
    return training_error(params, data)


def lasso_objective(params: NetworkParams, data: Dataset, lambda_: float) -> float:
    """H(w) = n/2 E(w) + lambda * sum |w|"""
    l1 = sum(float(np.sum(np.abs(w))) for w in params.weights)
    return data.n / 2.0 * training_error(params, data) + lambda_ * l1


def count_near_zero(params: NetworkParams, threshold: float) -> Tuple[int, List[int]]:
    by_depth = [int(np.count_nonzero(np.abs(w) < threshold)) for w in params.weights]
    return sum(by_depth), by_depth


def _apply_step(params: NetworkParams, x: np.ndarray, y: np.ndarray, lambda_: float, epsilon1: float, eta: float):
    """One in-place backpropagation update for sample (x, y)"""
    layers = [x]
    o = x
    for w, b in zip(params.weights, params.biases):
        o = sigmoid(o @ w + b)
        layers.append(o)

    out = layers[-1]
    delta = (out - y) * (out * (1.0 - out) + epsilon1)
    for d in range(params.depth - 2, -1, -1):
        w = params.weights[d]
        below = layers[d]
        if d > 0:
            # uses pre-update weights
            next_delta = (w @ delta) * (below * (1.0 - below) + epsilon1)
        grad = np.outer(below, delta)
        if lambda_:
            grad += lambda_ * np.sign(w)
        w -= eta * grad
        params.biases[d] -= eta * delta
        if d > 0:
            delta = next_delta


def sgd_step(params: NetworkParams, sample: Tuple[Any, Any], config: TrainConfig, eta: float) -> NetworkParams:
    """Return params after one stochastic steepest descent update"""
    if not eta > 0:
        raise ValidationError(f"eta must be > 0, got {eta}")
    x, y = sample
    x = _check_input(params, x)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (params.output_dim,):
        raise ShapeError("sgd_step", y.shape, (params.output_dim,))
    updated = params.copy()
    _apply_step(updated, x, y, config.lambda_, config.epsilon1, eta)
    return updated


def init_params(layer_sizes: Sequence[int], seed: int = Config.TRAIN_SEED,
                weight_sigma: float = Config.INIT_WEIGHT_SIGMA,
                bias_sigma: float = Config.INIT_BIAS_SIGMA) -> NetworkParams:
    """Seeded Gaussian initialization"""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 3 or any(s < 1 for s in sizes):
        raise ShapeError("init_params", tuple(sizes))
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for d in range(len(sizes) - 1):
        weights.append(rng.normal(0.0, weight_sigma, size=(sizes[d], sizes[d + 1])))
        biases.append(rng.normal(0.0, bias_sigma, size=sizes[d + 1]))
    return NetworkParams(sizes, weights, biases)


def train(init: NetworkParams, data: Dataset, config: TrainConfig,
          test: Optional[Dataset] = None) -> Tuple[NetworkParams, TrainReport]:
    """
    Run epochs * n steps of stochastic steepest descent on H(w).

    Samples are drawn uniformly with replacement from a seeded generator
    (or cycled in order when ``shuffle`` is off). Each step is the stochastic
    gradient of one sample's share of H(w), so its L1 term uses lambda / n;
    a single ``sgd_step`` applies lambda as given. E(w) is recorded after
    every n steps. Raises DivergedError carrying the partial report.
    """
    if data.input_dim != init.input_dim or data.output_dim != init.output_dim:
        raise ShapeError("train", (data.input_dim, data.output_dim), (init.input_dim, init.output_dim))

    params = init.copy()
    rng = np.random.default_rng(config.seed)
    n = data.n
    report = TrainReport(initial_error=training_error(params, data))
    train_logger.info("Training started", {
        "layers": params.layer_sizes, "samples": n, "steps": config.epochs * n, **config.to_dict()
    })

    step_lambda = config.step_lambda(n)
    t = 0
    for epoch in range(1, config.epochs + 1):
        if config.shuffle:
            order = rng.integers(0, n, size=n)
        else:
            order = np.arange(n)
        for idx in order:
            t += 1
            _apply_step(params, data.X[idx], data.Y[idx], step_lambda, config.epsilon1, config.eta(t, n))
        report.steps = t

        if not params.is_finite():
            report.diverged_epoch = epoch
            train_logger.log_divergence(epoch, t)
            raise DivergedError(epoch, report)

        error = training_error(params, data)
        if not math.isfinite(error):
            report.diverged_epoch = epoch
            train_logger.log_divergence(epoch, t)
            raise DivergedError(epoch, report)
        report.train_errors.append(error)
        held_out = None
        if test is not None:
            held_out = generalization_error(params, test)
            report.test_errors.append(held_out)
        train_logger.log_epoch(epoch, error, held_out, config.eta(t, n))

    report.final_test_error = report.test_errors[-1] if report.test_errors else None
    report.lasso_objective = lasso_objective(params, data, config.lambda_)
    report.near_zero_weights, report.near_zero_by_depth = count_near_zero(params, config.prune_threshold)
    report.total_weights = sum(int(w.size) for w in params.weights)
    train_logger.info("Training finished", {
        "initial_error": report.initial_error,
        "final_error": report.train_errors[-1],
        "near_zero_weights": report.near_zero_weights,
        "total_weights": report.total_weights,
    })
    return params, report

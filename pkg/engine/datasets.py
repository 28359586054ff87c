# engine/datasets.py
"""
Data sources: planted block-diagonal teacher networks, sliding windows over
CSV series, and a small rendered corpus of 20x20 diagrams.
"""
import os
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import Config
from utils.helpers import HelperFunctions
from utils.json_parser import JSONParser
from utils.logger import data_logger
from utils.validators import ValidationError
from .errors import DatasetError, GenerationError
from .lnn import Dataset, NetworkParams, predict

_SYN = Config.SYNTHETIC_DEFAULTS


@dataclass(frozen=True)
class SyntheticSpec:
    blocks: int = _SYN["blocks"]
    hidden_layers_per_block: int = _SYN["hidden_layers_per_block"]
    units_per_hidden_layer: int = _SYN["units_per_hidden_layer"]
    inputs_per_block: int = _SYN["inputs_per_block"]
    outputs_per_block: int = _SYN["outputs_per_block"]
    prune_threshold: float = _SYN["prune_threshold"]
    input_sigma: float = _SYN["input_sigma"]
    noise_sigma: float = _SYN["noise_sigma"]
    weight_sigma: float = _SYN["weight_sigma"]
    bias_sigma: float = _SYN["bias_sigma"]
    n_train: int = _SYN["n_train"]
    n_test: int = _SYN["n_test"]
    seed: int = _SYN["seed"]

    def __post_init__(self):
        counts = ("blocks", "hidden_layers_per_block", "units_per_hidden_layer",
                  "inputs_per_block", "outputs_per_block", "n_train", "n_test")
        for name in counts:
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("input_sigma", "noise_sigma", "weight_sigma", "bias_sigma", "prune_threshold"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")

    def block_layer_sizes(self) -> List[int]:
        return ([self.inputs_per_block]
                + [self.units_per_hidden_layer] * self.hidden_layers_per_block
                + [self.outputs_per_block])

    def layer_sizes(self) -> List[int]:
        return [s * self.blocks for s in self.block_layer_sizes()]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class GroundTruth:
    """Planted block label of every input, hidden unit (layer by layer) and output"""

    blocks: int
    input_labels: List[int]
    hidden_labels: List[int]
    output_labels: List[int]

    def __post_init__(self):
        for name in ("input_labels", "hidden_labels", "output_labels"):
            labels = getattr(self, name)
            if any(not 0 <= label < self.blocks for label in labels):
                raise ValueError(f"{name} must lie in [0, {self.blocks})")

    def block_columns(self) -> List[List[int]]:
        """Column indices of V belonging to each block: its inputs, then its outputs offset by i0"""
        i0 = len(self.input_labels)
        columns = []
        for b in range(self.blocks):
            cols = [i for i, label in enumerate(self.input_labels) if label == b]
            cols += [i0 + j for j, label in enumerate(self.output_labels) if label == b]
            columns.append(cols)
        return columns

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "GroundTruth":
        return cls(int(document["blocks"]), list(document["input_labels"]),
                   list(document["hidden_labels"]), list(document["output_labels"]))


def _block_labels(per_block: int, blocks: int) -> List[int]:
    return [u // per_block for u in range(per_block * blocks)]


def _draw_teacher(spec: SyntheticSpec, rng: np.random.Generator) -> NetworkParams:
    per_block = spec.block_layer_sizes()
    sizes = spec.layer_sizes()
    weights = [np.zeros((sizes[d], sizes[d + 1])) for d in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[d + 1]) for d in range(len(sizes) - 1)]
    for b in range(spec.blocks):
        for d in range(len(sizes) - 1):
            rows = slice(b * per_block[d], (b + 1) * per_block[d])
            cols = slice(b * per_block[d + 1], (b + 1) * per_block[d + 1])
            w = rng.normal(0.0, spec.weight_sigma, size=(per_block[d], per_block[d + 1]))
            w[np.abs(w) <= spec.prune_threshold] = 0.0
            weights[d][rows, cols] = w
            biases[d][cols] = rng.normal(0.0, spec.bias_sigma, size=per_block[d + 1])
    return NetworkParams(sizes, weights, biases)


def disconnected_outputs(params: NetworkParams) -> List[int]:
    """Output units with no nonzero-weight path from any input"""
    reach = np.ones(params.input_dim, dtype=bool)
    for w in params.weights:
        reach = (reach.astype(np.int64) @ (w != 0).astype(np.int64)) > 0
    return [int(j) for j in np.flatnonzero(~reach)]


def gen_synthetic(spec: SyntheticSpec) -> Tuple[NetworkParams, Dataset, Dataset, GroundTruth]:
    """Teacher network, noisy train/test sets and planted labels"""
    teacher, rng, seed = None, None, spec.seed
    for attempt in range(Config.MAX_REGENERATIONS):
        seed = spec.seed + attempt
        rng = np.random.default_rng(seed)
        candidate = _draw_teacher(spec, rng)
        missing = disconnected_outputs(candidate)
        if not missing:
            teacher = candidate
            break
        data_logger.warning("Teacher has disconnected outputs; regenerating",
                            {"seed": seed, "outputs": missing})
    if teacher is None:
        raise GenerationError(
            f"no connected teacher after {Config.MAX_REGENERATIONS} attempts from seed {spec.seed}; "
            f"lower prune_threshold or widen the blocks"
        )

    def sample(n: int) -> Dataset:
        X = rng.normal(0.0, spec.input_sigma, size=(n, teacher.input_dim))
        Y = predict(teacher, X) + rng.normal(0.0, spec.noise_sigma, size=(n, teacher.output_dim))
        return Dataset(X, Y)

    train = sample(spec.n_train)
    test = sample(spec.n_test)

    per_block = spec.block_layer_sizes()
    hidden = []
    for size in per_block[1:-1]:
        hidden += _block_labels(size, spec.blocks)
    truth = GroundTruth(
        spec.blocks,
        _block_labels(spec.inputs_per_block, spec.blocks),
        hidden,
        _block_labels(spec.outputs_per_block, spec.blocks),
    )
    surviving = sum(int(np.count_nonzero(w)) for w in teacher.weights)
    meta = {"source": "synthetic", "spec": spec.to_dict(), "seed_used": seed, "teacher_nonzero_weights": surviving}
    train.meta.update(meta)
    test.meta.update(meta)
    data_logger.info("Synthetic problem generated", {"layers": teacher.layer_sizes, **meta})
    return teacher, train, test, truth


def _min_max_columns(frame: pd.DataFrame) -> Tuple[pd.DataFrame, Dict[str, Dict[str, float]]]:
    scaled = {}
    scalers = {}
    for name in frame.columns:
        column = frame[name].to_numpy(dtype=np.float64)
        lo, hi = float(column.min()), float(column.max())
        scalers[name] = {"min": lo, "max": hi}
        if hi == lo:
            data_logger.warning("Constant column scaled to zeros", {"column": name, "value": lo})
            scaled[name] = np.zeros_like(column)
        else:
            scaled[name] = (column - lo) / (hi - lo)
    return pd.DataFrame(scaled, index=frame.index), scalers


def unscale(values, scaler: Dict[str, float]) -> np.ndarray:
    """Inverse of the per-column min-max scaling"""
    values = np.asarray(values, dtype=np.float64)
    return scaler["min"] + values * (scaler["max"] - scaler["min"])


def window_csv(path: str, input_columns: Sequence[str], target_columns: Sequence[str],
               window: int, horizon: int = 1) -> Dataset:
    """
    Sliding windows over CSV series.

    Sample s ending at row r has, for each input column in order, the values
    of rows r-window+1..r (oldest first); its targets are the target columns
    at row r+horizon. Columns are min-max scaled to [0, 1] first.
    """
    if window < 1 or horizon < 0:
        raise DatasetError(f"window must be >= 1 and horizon >= 0, got {window}, {horizon}")
    input_columns, target_columns = list(input_columns), list(target_columns)
    if not input_columns or not target_columns:
        raise DatasetError("need at least one input column and one target column")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetError(f"cannot read {path}: {e}") from e

    used = list(dict.fromkeys(input_columns + target_columns))
    missing = [c for c in used if c not in frame.columns]
    if missing:
        raise DatasetError(f"{path}: missing columns {missing}; available {list(frame.columns)}")

    frame = frame[used].apply(pd.to_numeric, errors="coerce")
    bad_rows = frame.isna().any(axis=1)
    if bad_rows.any():
        data_logger.warning("Skipping rows with missing values",
                            {"rows": [int(r) for r in np.flatnonzero(bad_rows.to_numpy())]})
        frame = frame[~bad_rows].reset_index(drop=True)

    rows = len(frame)
    count = rows - window - horizon + 1
    if count < 1:
        raise DatasetError(f"{path}: {rows} usable rows give no samples for window {window}, horizon {horizon}")

    scaled, scalers = _min_max_columns(frame)
    series = scaled[input_columns].to_numpy(dtype=np.float64)
    targets = scaled[target_columns].to_numpy(dtype=np.float64)

    ends = np.arange(window - 1, window - 1 + count)
    lags = np.arange(-window + 1, 1)
    # (count, window, series) -> series-major flattening: all lags of series 1, then series 2
    stacked = series[ends[:, None] + lags[None, :], :]
    X = stacked.transpose(0, 2, 1).reshape(count, window * len(input_columns))
    Y = targets[ends + horizon]

    input_names = [f"{c}[t{lag:+d}]" if lag else f"{c}[t]" for c in input_columns for lag in lags]
    meta = {
        "source": "window",
        "path": os.path.basename(path),
        "input_columns": input_columns,
        "target_columns": target_columns,
        "window": window,
        "horizon": horizon,
        "scalers": scalers,
        "input_names": input_names,
        "output_names": list(target_columns),
    }
    data_logger.info("Windowed CSV", {"samples": count, "i0": X.shape[1], "j0": Y.shape[1]})
    return Dataset(X, Y, meta)


class Canvas:
    """Square grayscale raster with a few drawing primitives in pixel coordinates"""

    def __init__(self, size: int):
        self.size = size
        self.pixels = np.zeros((size, size), dtype=np.float64)

    def dot(self, x: float, y: float):
        col, row = int(round(x)), int(round(y))
        if 0 <= row < self.size and 0 <= col < self.size:
            self.pixels[row, col] = 1.0

    def line(self, p0: Tuple[float, float], p1: Tuple[float, float]):
        steps = max(2, int(np.ceil(4 * np.hypot(p1[0] - p0[0], p1[1] - p0[1]))))
        for t in np.linspace(0.0, 1.0, steps):
            self.dot(p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    def polyline(self, points: Sequence[Tuple[float, float]], closed: bool = True):
        pairs = list(zip(points, points[1:]))
        if closed:
            pairs.append((points[-1], points[0]))
        for a, b in pairs:
            self.line(a, b)

    def fill_polygon(self, points: Sequence[Tuple[float, float]]):
        ys, xs = np.mgrid[0:self.size, 0:self.size]
        inside = np.zeros((self.size, self.size), dtype=bool)
        n = len(points)
        for k in range(n):
            (x0, y0), (x1, y1) = points[k], points[(k + 1) % n]
            crosses = (y0 > ys) != (y1 > ys)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_at = x0 + (ys - y0) * (x1 - x0) / (y1 - y0)
            inside ^= crosses & (xs < x_at)
        self.pixels[inside] = 1.0
        self.polyline(points)

    def curve(self, fx: Callable[[np.ndarray], np.ndarray], fy: Callable[[np.ndarray], np.ndarray],
              t0: float = 0.0, t1: float = 2 * np.pi, steps: int = 200):
        for t in np.linspace(t0, t1, steps):
            self.dot(float(fx(t)), float(fy(t)))


def _shape_points(name: str) -> Dict[str, Any]:
    """Shape description in unit coordinates (x right, y down, extent about [-1, 1])"""
    shapes = {
        "rectangle": {"outline": [(-0.8, -0.55), (0.8, -0.55), (0.8, 0.55), (-0.8, 0.55)]},
        "cross": {"lines": [((-0.8, 0.0), (0.8, 0.0)), ((0.0, -0.8), (0.0, 0.8))]},
        "line": {"lines": [((-0.8, 0.8), (0.8, -0.8))]},
        "two_lines": {"lines": [((-0.8, -0.4), (0.8, -0.4)), ((-0.8, 0.4), (0.8, 0.4))]},
        "triangle": {"outline": [(0.0, -0.8), (0.85, 0.7), (-0.85, 0.7)]},
        "diamond": {"outline": [(0.0, -0.9), (0.65, 0.0), (0.0, 0.9), (-0.65, 0.0)]},
        "arrow": {"lines": [((-0.85, 0.0), (0.85, 0.0)), ((0.85, 0.0), (0.4, -0.45)), ((0.85, 0.0), (0.4, 0.45))]},
        "ribbon": {"fill": [[(-0.85, -0.6), (0.0, 0.0), (-0.85, 0.6)], [(0.85, -0.6), (0.0, 0.0), (0.85, 0.6)]]},
        "heart": {"heart": True},
        "face": {"face": True},
    }
    return shapes[name]


def render_diagram(name: str, size: int, cx: float, cy: float, scale: float) -> np.ndarray:
    """Rasterize one shape centred at (cx, cy) with half-extent scale pixels"""
    canvas = Canvas(size)

    def to_px(p):
        return cx + p[0] * scale, cy + p[1] * scale

    shape = _shape_points(name)
    if "outline" in shape:
        canvas.polyline([to_px(p) for p in shape["outline"]])
    for a, b in shape.get("lines", []):
        canvas.line(to_px(a), to_px(b))
    for polygon in shape.get("fill", []):
        canvas.fill_polygon([to_px(p) for p in polygon])
    if shape.get("heart"):
        canvas.curve(lambda t: cx + scale * 0.9 * np.sin(t) ** 3,
                     lambda t: cy - scale * (13 * np.cos(t) - 5 * np.cos(2 * t)
                                             - 2 * np.cos(3 * t) - np.cos(4 * t)) / 17.0)
    if shape.get("face"):
        canvas.curve(lambda t: cx + scale * 0.9 * np.cos(t), lambda t: cy + scale * 0.9 * np.sin(t))
        canvas.dot(*to_px((-0.35, -0.3)))
        canvas.dot(*to_px((0.35, -0.3)))
        canvas.curve(lambda t: cx + scale * 0.45 * np.cos(t), lambda t: cy + scale * (0.15 + 0.35 * np.sin(t)),
                     t0=0.15 * np.pi, t1=0.85 * np.pi, steps=40)
    return canvas.pixels


def gen_diagrams(classes: Optional[Sequence[str]] = None, per_class: int = 10,
                 size: int = Config.DIAGRAM_SIZE, seed: int = 0) -> Dataset:
    """size x size diagram images flattened row-major, one-hot targets over ``classes``"""
    classes = list(classes or Config.DIAGRAM_CLASSES)
    unknown = [c for c in classes if c not in Config.DIAGRAM_CLASSES]
    if unknown:
        raise DatasetError(f"unknown diagram classes {unknown}; choose from {Config.DIAGRAM_CLASSES}")
    if len(set(classes)) != len(classes):
        raise DatasetError("diagram classes must be distinct")
    if per_class < 1:
        raise DatasetError(f"per_class must be >= 1, got {per_class}")

    rng = np.random.default_rng(seed)
    images, labels = [], []
    half = (size - 1) / 2.0
    for label, name in enumerate(classes):
        for _ in range(per_class):
            cx = half + rng.uniform(-0.1, 0.1) * size
            cy = half + rng.uniform(-0.1, 0.1) * size
            scale = rng.uniform(0.7, 1.0) * (half - 0.1 * size)
            images.append(render_diagram(name, size, cx, cy, scale).ravel())
            labels.append(label)

    X = np.vstack(images)
    Y = np.zeros((len(labels), len(classes)))
    Y[np.arange(len(labels)), labels] = 1.0
    meta = {
        "source": "diagrams",
        "classes": classes,
        "per_class": per_class,
        "size": size,
        "seed": seed,
        "output_names": classes,
    }
    data_logger.info("Diagram corpus rendered", {"samples": len(labels), "i0": X.shape[1], "classes": classes})
    return Dataset(X, Y, meta)


def write_pgm(path: str, image: np.ndarray) -> str:
    """Plain PGM (P2, maxval 255)"""
    grid = np.clip(np.rint(np.asarray(image) * 255), 0, 255).astype(int)
    lines = ["P2", f"{grid.shape[1]} {grid.shape[0]}", "255"]
    lines += [" ".join(str(v) for v in row) for row in grid]
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    return path


def dump_pgm(dataset: Dataset, directory: str) -> List[str]:
    size = int(dataset.meta.get("size", int(round(np.sqrt(dataset.input_dim)))))
    classes = dataset.meta.get("classes", [str(j) for j in range(dataset.output_dim)])
    os.makedirs(directory, exist_ok=True)
    paths = []
    for s in range(dataset.n):
        name = classes[int(np.argmax(dataset.Y[s]))]
        paths.append(write_pgm(os.path.join(directory, f"{s:04d}_{name}.pgm"), dataset.X[s].reshape(size, size)))
    return paths


def _write_matrix_csv(path: str, values: np.ndarray) -> str:
    frame = pd.DataFrame(values, columns=HelperFunctions.column_names("d", values.shape[1]))
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def _read_matrix_csv(path: str) -> np.ndarray:
    return pd.read_csv(path, float_precision="round_trip").to_numpy(dtype=np.float64)


def save_dataset(directory: str, train: Dataset, test: Optional[Dataset] = None,
                 truth: Optional[GroundTruth] = None, extra: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """X.csv/Y.csv (+ test split) and dataset.json manifest"""
    os.makedirs(directory, exist_ok=True)
    written = {
        "x_train": _write_matrix_csv(os.path.join(directory, Config.file_name("x_train")), train.X),
        "y_train": _write_matrix_csv(os.path.join(directory, Config.file_name("y_train")), train.Y),
    }
    shapes = {"train": {"n": train.n, "i0": train.input_dim, "j0": train.output_dim}}
    if test is not None:
        written["x_test"] = _write_matrix_csv(os.path.join(directory, Config.file_name("x_test")), test.X)
        written["y_test"] = _write_matrix_csv(os.path.join(directory, Config.file_name("y_test")), test.Y)
        shapes["test"] = {"n": test.n, "i0": test.input_dim, "j0": test.output_dim}
    manifest = {"shapes": shapes, "i0": train.input_dim, "j0": train.output_dim, "meta": train.meta}
    if truth is not None:
        manifest["ground_truth"] = truth.to_dict()
    if extra:
        manifest.update(extra)
    written["dataset"] = JSONParser().write(os.path.join(directory, Config.file_name("dataset")), manifest)
    return written


def load_dataset(directory: str, split: str = "train") -> Tuple[Dataset, Dict[str, Any]]:
    """Read one split and the dataset manifest"""
    manifest = JSONParser().read(os.path.join(directory, Config.file_name("dataset")))
    keys = ("x_train", "y_train") if split == "train" else ("x_test", "y_test")
    x_path, y_path = (os.path.join(directory, Config.file_name(k)) for k in keys)
    if not (os.path.exists(x_path) and os.path.exists(y_path)):
        raise DatasetError(f"{directory}: no {split} split")
    dataset = Dataset(_read_matrix_csv(x_path), _read_matrix_csv(y_path), dict(manifest.get("meta", {})))
    return dataset, manifest


def ground_truth_of(manifest: Dict[str, Any]) -> Optional[GroundTruth]:
    document = manifest.get("ground_truth")
    return GroundTruth.from_dict(document) if document else None

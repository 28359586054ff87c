# engine/analysis.py
"""
Reading a decomposition: hard community labels, recovery against planted
blocks, and task importance.
"""
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import Config
from utils.logger import analysis_logger
from .datasets import GroundTruth
from .nmf import Decomposition

UNASSIGNED = Config.UNASSIGNED


@dataclass
class CommunityAssignment:
    """Argmax community of every hidden unit plus the soft weights (rows of T)"""

    labels: List[int]
    weights: np.ndarray
    unit_index: List[Tuple[int, int]]

    @property
    def c0(self) -> int:
        return self.weights.shape[1]

    @property
    def k0(self) -> int:
        return len(self.labels)

    def members(self) -> Dict[int, Dict[int, List[int]]]:
        """community -> layer depth -> unit indices"""
        grouped: Dict[int, Dict[int, List[int]]] = {c: {} for c in range(self.c0)}
        for label, (layer, unit) in zip(self.labels, self.unit_index):
            if label == UNASSIGNED:
                continue
            grouped[label].setdefault(layer, []).append(unit)
        return grouped

    def unassigned(self) -> List[int]:
        return [k for k, label in enumerate(self.labels) if label == UNASSIGNED]

    def to_dict(self) -> Dict[str, Any]:
        members = {
            str(c): {str(layer): units for layer, units in sorted(by_layer.items())}
            for c, by_layer in self.members().items()
        }
        return {
            "c0": self.c0,
            "k0": self.k0,
            "labels": list(self.labels),
            "unit_index": [list(key) for key in self.unit_index],
            "members": members,
            "unassigned": self.unassigned(),
        }

    def to_csv(self, path: str) -> str:
        """unit,layer,community,weight_0..weight_{c0-1}"""
        frame = pd.DataFrame(self.weights, columns=[f"weight_{c}" for c in range(self.c0)])
        frame.insert(0, "community", self.labels)
        frame.insert(0, "layer", [layer for layer, _ in self.unit_index])
        frame.insert(0, "unit", [unit for _, unit in self.unit_index])
        frame.to_csv(path, index=False, lineterminator="\n")
        return path


@dataclass
class RecoveryScore:
    purity: float
    matching: Dict[int, int]
    concentrations: List[Optional[float]]
    partial: bool
    scored_units: int
    k0: int
    notes: List[str] = field(default_factory=list)

    @property
    def median_concentration(self) -> Optional[float]:
        matched = [c for c in self.concentrations if c is not None]
        return float(np.median(matched)) if matched else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "purity": self.purity,
            "matching": {str(c): b for c, b in sorted(self.matching.items())},
            "concentrations": list(self.concentrations),
            "median_concentration": self.median_concentration,
            "partial_matching": self.partial,
            "scored_units": self.scored_units,
            "k0": self.k0,
            "notes": list(self.notes),
        }


def assign_communities(dec: Decomposition, unit_index: Optional[Sequence[Tuple[int, int]]] = None) -> CommunityAssignment:
    """Argmax of each T row; ties go to the lowest index; all-zero rows are unassigned"""
    T = np.asarray(dec.T, dtype=np.float64)
    labels = [int(c) for c in np.argmax(T, axis=1)]
    empty = np.flatnonzero(~np.any(T > 0, axis=1))
    for k in empty:
        labels[k] = UNASSIGNED
    if empty.size:
        analysis_logger.warning("Hidden units with all-zero weights left unassigned", {"rows": empty.tolist()})
    if unit_index is None:
        unit_index = dec.meta.get("unit_index") or [(0, k) for k in range(T.shape[0])]
    return CommunityAssignment(labels, T.copy(), [tuple(key) for key in unit_index])


def infer_unit_blocks(V: np.ndarray, block_columns: Sequence[Sequence[int]]) -> List[int]:
    """Planted block holding the largest share of each V row; zero rows get UNASSIGNED"""
    V = np.asarray(V, dtype=np.float64)
    mass = np.column_stack([V[:, list(cols)].sum(axis=1) for cols in block_columns])
    labels = [int(b) for b in np.argmax(mass, axis=1)]
    for k in np.flatnonzero(mass.sum(axis=1) <= 0):
        labels[k] = UNASSIGNED
    return labels


def _candidate_matchings(c0: int, blocks: int):
    """Injective community -> block maps covering min(c0, blocks) pairs"""
    if c0 <= blocks:
        for perm in itertools.permutations(range(blocks), c0):
            yield {c: perm[c] for c in range(c0)}
    else:
        for perm in itertools.permutations(range(c0), blocks):
            yield {perm[b]: b for b in range(blocks)}


def score_recovery(assign: CommunityAssignment, truth: Union[GroundTruth, Sequence[int]],
                   U: np.ndarray, block_columns: Sequence[Sequence[int]]) -> RecoveryScore:
    """
    Purity under the best label bijection and per-task block concentration.

    ``truth`` is a GroundTruth (its hidden labels are used) or a per-unit label
    list where UNASSIGNED marks units without a planted block. Purity is the
    share of truth-labelled units whose community maps to their block; a
    labelled unit left without a community counts as a miss.
    """
    truth_labels = list(truth.hidden_labels) if isinstance(truth, GroundTruth) else list(truth)
    if len(truth_labels) != assign.k0:
        raise ValueError(f"truth has {len(truth_labels)} hidden labels, assignment has {assign.k0}")
    blocks = len(block_columns)
    c0 = assign.c0
    if max(c0, blocks) > Config.MAX_EXACT_MATCHING:
        raise ValueError(f"exhaustive matching supports at most {Config.MAX_EXACT_MATCHING} labels, got {max(c0, blocks)}")

    labelled = [(a, t) for a, t in zip(assign.labels, truth_labels) if t != UNASSIGNED]
    pairs = [(a, t) for a, t in labelled if a != UNASSIGNED]
    counts = np.zeros((c0, blocks), dtype=np.int64)
    for a, t in pairs:
        counts[a, t] += 1

    best_match: Dict[int, int] = {}
    best_hits = -1
    for matching in _candidate_matchings(c0, blocks):
        hits = sum(int(counts[c, b]) for c, b in matching.items())
        if hits > best_hits:
            best_hits, best_match = hits, matching

    scored = len(labelled)
    purity = best_hits / scored if scored else 0.0

    U = np.asarray(U, dtype=np.float64)
    concentrations: List[Optional[float]] = []
    for c in range(c0):
        if c not in best_match:
            concentrations.append(None)
            continue
        total = float(U[c].sum())
        mass = float(U[c, list(block_columns[best_match[c]])].sum())
        concentrations.append(mass / total if total > 0 else 0.0)

    notes = []
    partial = c0 != blocks
    if partial:
        notes.append(f"c0={c0} differs from block count {blocks}; best injective partial matching used")
    if scored < assign.k0:
        notes.append(f"{assign.k0 - scored} hidden units without a truth label were not scored")
    missing = len(labelled) - len(pairs)
    if missing:
        notes.append(f"{missing} labelled hidden units without a community counted as misses")

    score = RecoveryScore(purity, best_match, concentrations, partial, scored, assign.k0, notes)
    analysis_logger.info("Recovery scored", {"purity": purity, "median_concentration": score.median_concentration})
    return score


def task_importance(dec: Decomposition, input_block_width: Optional[int] = None) -> List[Dict[str, Any]]:
    """sum_k T[k, c] * (output-block mass of U[c]) per task, sorted descending (ties by index)"""
    i0 = input_block_width if input_block_width is not None else dec.meta.get("input_block_width")
    if i0 is None:
        raise ValueError("input block width unknown; pass input_block_width")
    T = np.asarray(dec.T, dtype=np.float64)
    U = np.asarray(dec.U, dtype=np.float64)
    values = T.sum(axis=0) * U[:, int(i0):].sum(axis=1)
    order = sorted(range(len(values)), key=lambda c: (-values[c], c))
    return [{"task": int(c), "importance": float(values[c])} for c in order]

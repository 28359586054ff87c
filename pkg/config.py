# config.py - Configuration settings for the task decomposition toolkit
import os
from typing import Dict, Any

from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return max(1, int(value))
    except ValueError:
        return default


class Config:
    """Configuration settings for the non-negative task decomposition toolkit"""

    TOOL_NAME = "ntd"
    TOOL_VERSION = "1.0.0"
    SCHEMA_VERSION = 1

    # Runtime Configuration
    LOG_LEVEL = os.getenv('NTD_LOG_LEVEL', 'INFO')
    THREADS = _env_int('NTD_THREADS', os.cpu_count() or 1)

    # Training (stochastic steepest descent with LASSO)
    LAMBDA = 0.001
    EPSILON1 = 0.001
    EPOCHS = 200
    ETA0 = 0.7
    ETA_DECAY = 5.0
    PRUNE_THRESHOLD = 1e-3
    INIT_WEIGHT_SIGMA = 0.5
    INIT_BIAS_SIGMA = 0.5
    TRAIN_SEED = 0

    # Non-negative matrix factorization
    NMF_ITERATIONS = 2000
    NMF_MU1 = 0.5
    NMF_SIGMA1 = 0.5
    NMF_MU2 = 0.5
    NMF_SIGMA2 = 0.5
    NMF_DENOM_FLOOR = 1e-12
    NMF_RESTARTS = 1
    NMF_SEED = 11
    NMF_MONOTONE_TOLERANCE = 1e-9

    # Synthetic ground-truth generator
    SYNTHETIC_DEFAULTS = {
        "blocks": 3,
        "hidden_layers_per_block": 2,
        "units_per_hidden_layer": 15,
        "inputs_per_block": 5,
        "outputs_per_block": 5,
        "prune_threshold": 1.0,
        "input_sigma": 3.0,
        "noise_sigma": 0.05,
        "weight_sigma": 1.0,
        "bias_sigma": 0.5,
        "n_train": 3000,
        "n_test": 1000,
        "seed": 0,
    }
    MAX_REGENERATIONS = 10

    # Diagram corpus
    DIAGRAM_SIZE = 20
    DIAGRAM_CLASSES = [
        "rectangle", "cross", "line", "two_lines", "triangle",
        "diamond", "arrow", "ribbon", "heart", "face",
    ]

    # Analysis
    MAX_EXACT_MATCHING = 8
    UNASSIGNED = -1

    # Verify
    VERIFY_RECENT_EVENTS = 5

    # Report Configuration
    REPORT_PANEL_WIDTH = 720
    REPORT_PANEL_HEIGHT = 220
    COMMUNITY_COLORS = [
        "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
        "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
    ]

    # Artifact file names inside a run directory
    FILE_NAMES = {
        "manifest": "manifest.json",
        "events": "events.jsonl",
        "dataset": "dataset.json",
        "x_train": "X.csv",
        "y_train": "Y.csv",
        "x_test": "X_test.csv",
        "y_test": "Y_test.csv",
        "teacher": "teacher.json",
        "model": "model.json",
        "train_report": "train_report.json",
        "features": "V.csv",
        "features_meta": "V.json",
        "decomposition": "decomposition.json",
        "assignments": "assignments.json",
        "assignments_csv": "assignments.csv",
        "score": "score.json",
        "report_svg": "report.svg",
        "report_json": "report.json",
        "features_rounded": "V_rounded.csv",
    }

    @classmethod
    def get_stage_config(cls, stage: str) -> Dict[str, Any]:
        """Get the default settings for a pipeline stage"""
        stages = {
            "train": {
                "lambda_": cls.LAMBDA,
                "epsilon1": cls.EPSILON1,
                "epochs": cls.EPOCHS,
                "eta0": cls.ETA0,
                "seed": cls.TRAIN_SEED,
                "shuffle": True,
            },
            "nmf": {
                "a0": cls.NMF_ITERATIONS,
                "mu1": cls.NMF_MU1,
                "sigma1": cls.NMF_SIGMA1,
                "mu2": cls.NMF_MU2,
                "sigma2": cls.NMF_SIGMA2,
                "seed": cls.NMF_SEED,
                "denom_floor": cls.NMF_DENOM_FLOOR,
                "restarts": cls.NMF_RESTARTS,
            },
            "synthetic": dict(cls.SYNTHETIC_DEFAULTS),
        }
        return dict(stages.get(stage, {}))

    @classmethod
    def file_name(cls, key: str) -> str:
        """Get the artifact file name for a key"""
        return cls.FILE_NAMES[key]

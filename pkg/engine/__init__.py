# engine/__init__.py
"""
Task Decomposition Engine

Sigmoid networks trained with LASSO, mean-replacement attribution of hidden
units, and non-negative factorization of the resulting role vectors.
"""

from .errors import (NtdError, ShapeError, DivergedError, DomainError, NumericError,
                     GenerationError, DatasetError, ManifestError)
from .lnn import NetworkParams, Dataset, TrainConfig, TrainReport, forward, sgd_step, train, training_error
from .attribution import FeatureMatrix, input_effect, output_effect, build_feature_matrix
from .nmf import NmfConfig, Decomposition, factorize, reconstruction_error, normalize_rows
from .datasets import SyntheticSpec, GroundTruth, gen_synthetic, window_csv, gen_diagrams
from .analysis import CommunityAssignment, RecoveryScore, assign_communities, score_recovery, task_importance
from .verifier import Verdict, DecompositionVerifier

__all__ = [
    'NtdError', 'ShapeError', 'DivergedError', 'DomainError', 'NumericError',
    'GenerationError', 'DatasetError', 'ManifestError',
    'NetworkParams', 'Dataset', 'TrainConfig', 'TrainReport',
    'forward', 'sgd_step', 'train', 'training_error',
    'FeatureMatrix', 'input_effect', 'output_effect', 'build_feature_matrix',
    'NmfConfig', 'Decomposition', 'factorize', 'reconstruction_error', 'normalize_rows',
    'SyntheticSpec', 'GroundTruth', 'gen_synthetic', 'window_csv', 'gen_diagrams',
    'CommunityAssignment', 'RecoveryScore', 'assign_communities', 'score_recovery', 'task_importance',
    'Verdict', 'DecompositionVerifier',
]

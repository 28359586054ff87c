# utils/__init__.py
"""
Task Decomposition Utilities

Utility modules for hashing, versioned JSON, validation and logging.
"""

from .helpers import HelperFunctions
from .json_parser import JSONParser
from .json_logger import RunEventLogger
from .logger import (
    Logger,
    cli_logger,
    train_logger,
    attribution_logger,
    nmf_logger,
    data_logger,
    analysis_logger,
)
from .validators import PipelineValidator

__all__ = [
    'HelperFunctions',
    'JSONParser',
    'RunEventLogger',
    'Logger',
    'cli_logger',
    'train_logger',
    'attribution_logger',
    'nmf_logger',
    'data_logger',
    'analysis_logger',
    'PipelineValidator'
]

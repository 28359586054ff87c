# utils/logger.py
import json
import logging
import sys
from typing import Any, Optional, Sequence

from .helpers import HelperFunctions


class Logger:
    """Stage logger: one stderr handler per name, structured ' | Data:' payloads"""

    FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

    def __init__(self, name: str, level: Optional[str] = None):
        if level is None:
            from config import Config
            level = Config.LOG_LEVEL
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper(), logging.INFO))

        # stdout carries command results, so logs go to stderr
        if not self.logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(logging.Formatter(self.FORMAT, datefmt=self.DATE_FORMAT))
            self.logger.addHandler(handler)
            self.logger.propagate = False

    def _log(self, level: int, message: str, data: Optional[Any]):
        """Emit at ``level``, appending ``data`` as a ' | Data:' payload"""
        if not self.logger.isEnabledFor(level):
            return
        if data is not None:
            message = f"{message} | Data: {self._format_data(data)}"
        self.logger.log(level, message)

    def debug(self, message: str, data: Optional[Any] = None):
        """Log debug message"""
        self._log(logging.DEBUG, message, data)

    def info(self, message: str, data: Optional[Any] = None):
        """Log info message"""
        self._log(logging.INFO, message, data)

    def warning(self, message: str, data: Optional[Any] = None):
        """Log warning message"""
        self._log(logging.WARNING, message, data)

    def error(self, message: str, data: Optional[Any] = None):
        """Log error message"""
        self._log(logging.ERROR, message, data)

    @staticmethod
    def _format_data(data: Any) -> str:
        """JSON for dicts and lists, str() for anything else"""
        if isinstance(data, (dict, list)):
            try:
                return json.dumps(data, default=str, sort_keys=True)
            except (TypeError, ValueError):
                pass
        return str(data)

    def log_epoch(self, epoch: int, train_error: float, test_error: Optional[float] = None,
                  eta: Optional[float] = None):
        """Per-epoch training progress (DEBUG)"""
        payload = {"epoch": epoch, "train_error": train_error}
        if test_error is not None:
            payload["test_error"] = test_error
        if eta is not None:
            payload["eta"] = eta
        self.debug("Epoch", payload)

    def log_stage(self, stage: str, success: bool, elapsed_ms: int, outputs: Optional[Sequence[str]] = None):
        """Stage completion (INFO) or failure (ERROR) with its timing"""
        payload = {"stage": stage, "elapsed_ms": elapsed_ms, "outputs": list(outputs or [])}
        if success:
            self.info(f"Stage {stage} finished in {HelperFunctions.format_duration(elapsed_ms)}", payload)
        else:
            self.error(f"Stage {stage} failed", payload)

    def log_nmf_progress(self, iteration: int, objective: float, restart: int = 0):
        """NMF objective at an iteration (DEBUG)"""
        self.debug("NMF objective", {"iteration": iteration, "objective": objective, "restart": restart})

    def log_degenerate_block(self, block: str, value: float):
        """Constant effect block mapped to zeros"""
        self.warning(f"Degenerate {block} block: constant value, mapped to zeros", {"value": value})

    def log_divergence(self, epoch: int, step: int):
        """Non-finite parameters during training"""
        self.error("Training diverged", {"epoch": epoch, "step": step})


cli_logger = Logger("ntd.cli")
train_logger = Logger("ntd.lnn")
attribution_logger = Logger("ntd.attribution")
nmf_logger = Logger("ntd.nmf")
data_logger = Logger("ntd.datasets")
analysis_logger = Logger("ntd.analysis")

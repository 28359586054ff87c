# engine/verifier.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from config import Config
from utils.helpers import HelperFunctions
from .nmf import Decomposition, is_monotone, reconstruction_error


class Verdict(Enum):
    """Verification outcomes, ordered by severity"""
    PASS = "PASS"   # invariant holds
    WARN = "WARN"   # holds, but the result deserves a look
    FAIL = "FAIL"   # invariant violated

    @property
    def severity(self) -> int:
        return {"PASS": 0, "WARN": 1, "FAIL": 2}[self.value]


@dataclass
class CheckResult:
    name: str
    verdict: Verdict
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "verdict": self.verdict.value, "detail": self.detail}


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)
    run: Optional[Dict[str, Any]] = None

    @property
    def verdict(self) -> Verdict:
        if not self.checks:
            return Verdict.PASS
        return max((c.verdict for c in self.checks), key=lambda v: v.severity)

    def add(self, name: str, verdict: Verdict, **detail):
        self.checks.append(CheckResult(name, verdict, detail))

    def to_dict(self) -> Dict[str, Any]:
        document = {"verdict": self.verdict.value, "checks": [c.to_dict() for c in self.checks]}
        if self.run is not None:
            document["run"] = self.run
        return document


class DecompositionVerifier:
    """Re-checks the invariants of a stored decomposition and its run manifest"""

    def __init__(self, tolerance: float = Config.NMF_MONOTONE_TOLERANCE):
        self.tolerance = tolerance

    def verify(self, dec: Decomposition, V: Optional[np.ndarray] = None,
               hash_results: Optional[List[Dict[str, Any]]] = None) -> VerificationReport:
        report = VerificationReport()
        self._check_factors(dec, report)
        self._check_trace(dec, report)
        if V is not None:
            self._check_source(dec, np.asarray(V, dtype=np.float64), report)
        if hash_results is not None:
            self._check_manifest(hash_results, report)
        return report

    def verify_manifest(self, hash_results: List[Dict[str, Any]]) -> VerificationReport:
        report = VerificationReport()
        self._check_manifest(hash_results, report)
        return report

    def _check_factors(self, dec: Decomposition, report: VerificationReport):
        finite = HelperFunctions.is_finite_all([dec.T, dec.U])
        negative = int(np.count_nonzero(dec.T < 0) + np.count_nonzero(dec.U < 0))
        if not finite or negative:
            report.add("non_negative_factors", Verdict.FAIL, finite=finite, negative_entries=negative)
        else:
            report.add("non_negative_factors", Verdict.PASS)

        empty_rows = [int(k) for k in np.flatnonzero(~np.any(dec.T > 0, axis=1))]
        empty_tasks = [int(c) for c in np.flatnonzero(~np.any(dec.U > 0, axis=1))]
        if empty_rows or empty_tasks:
            report.add("degenerate_factors", Verdict.WARN, zero_t_rows=empty_rows, zero_u_rows=empty_tasks)

    def _check_trace(self, dec: Decomposition, report: VerificationReport):
        trace = dec.objective_trace
        if not trace:
            report.add("monotone_objective", Verdict.FAIL, reason="empty objective trace")
            return
        if is_monotone(trace, self.tolerance):
            report.add("monotone_objective", Verdict.PASS, iterations=len(trace), final=trace[-1])
            return
        worst = max(b - a for a, b in zip(trace, trace[1:]))
        first = next(i for i, (a, b) in enumerate(zip(trace, trace[1:]), start=2) if b > a + self.tolerance)
        report.add("monotone_objective", Verdict.FAIL, first_increase_iteration=first, largest_increase=worst)

    def _check_source(self, dec: Decomposition, V: np.ndarray, report: VerificationReport):
        digest = HelperFunctions.sha256_array(V)
        if dec.v_sha256 and digest != dec.v_sha256:
            report.add("source_matrix", Verdict.FAIL, expected=dec.v_sha256, actual=digest)
            return
        report.add("source_matrix", Verdict.PASS, sha256=digest)

        residual = float(np.linalg.norm(V - dec.product()))
        last = dec.objective_trace[-1] if dec.objective_trace else residual
        if abs(residual - last) > self.tolerance * max(1.0, abs(last)):
            report.add("final_objective", Verdict.FAIL, recomputed=residual, recorded=last)
        else:
            report.add("final_objective", Verdict.PASS, relative_error=reconstruction_error(V, dec))
        if dec.c0 > min(V.shape):
            report.add("task_count", Verdict.WARN, c0=dec.c0, shape=list(V.shape))

    def _check_manifest(self, hash_results: List[Dict[str, Any]], report: VerificationReport):
        bad = [r for r in hash_results if r["status"] != "ok"]
        if bad:
            report.add("manifest_hashes", Verdict.FAIL,
                       files=[{"file": r["file"], "status": r["status"]} for r in bad])
        elif not hash_results:
            report.add("manifest_hashes", Verdict.WARN, reason="manifest records no outputs")
        else:
            report.add("manifest_hashes", Verdict.PASS, files=len(hash_results))

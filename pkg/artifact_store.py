# artifact_store.py
import os
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from config import Config
from engine.errors import ManifestError
from utils.helpers import HelperFunctions
from utils.json_logger import RunEventLogger
from utils.json_parser import JSONParser
from utils.logger import cli_logger


class ArtifactStore:
    """Run directory: artifacts plus a manifest of their hashes, configs and stage timings"""

    def __init__(self, directory: str):
        self.directory = directory
        self.parser = JSONParser()
        self.setup_directory()
        self.events = RunEventLogger(self.path("events"))

    def setup_directory(self):
        """Create the run directory and an empty manifest if needed"""
        os.makedirs(self.directory, exist_ok=True)
        if not os.path.exists(self.path("manifest")):
            self.parser.write(self.path("manifest"), self._empty_manifest())

    def _empty_manifest(self) -> Dict[str, Any]:
        return {
            "tool": Config.TOOL_NAME,
            "tool_version": Config.TOOL_VERSION,
            "created_at": self._now(),
            "stages": {},
        }

    @staticmethod
    def _now() -> str:
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")

    def path(self, key: str) -> str:
        """Absolute-or-relative path of a named artifact inside the run directory"""
        return os.path.join(self.directory, Config.file_name(key))

    def load_manifest(self) -> Dict[str, Any]:
        if not os.path.exists(self.path("manifest")):
            return self._empty_manifest()
        return self.parser.read(self.path("manifest"))

    def write_json(self, key: str, document: Dict[str, Any]) -> str:
        return self.parser.write(self.path(key), document)

    def record_stage(self, stage: str, outputs: List[str], config: Optional[Dict[str, Any]] = None,
                     inputs: Optional[List[str]] = None, seed: Optional[int] = None,
                     elapsed_ms: int = 0, verdict: str = "OK", detail: Optional[Dict[str, Any]] = None):
        """Record a finished stage: output hashes, input hashes, config, seed and wall-clock"""
        manifest = self.load_manifest()
        entry = {
            "outputs": {self._relative(p): {"path": p, "sha256": HelperFunctions.sha256_file(p)} for p in outputs},
            "inputs": {p: HelperFunctions.sha256_file(p) for p in (inputs or []) if os.path.exists(p)},
            "config": config or {},
            "seed": seed,
            "elapsed_ms": elapsed_ms,
            "finished_at": self._now(),
            "tool_version": Config.TOOL_VERSION,
        }
        manifest.setdefault("stages", {})[stage] = entry
        self.parser.write(self.path("manifest"), manifest)
        self.events.log_event(stage, verdict, {"outputs": sorted(entry["outputs"]), "elapsed_ms": elapsed_ms, **(detail or {})})
        cli_logger.log_stage(stage, True, elapsed_ms, sorted(entry["outputs"]))
        return entry

    def record_failure(self, stage: str, error: Exception, elapsed_ms: int = 0):
        """Append a FAIL event; the manifest keeps the last successful entry"""
        self.events.log_event(stage, "FAIL", {"error": str(error), "type": type(error).__name__, "elapsed_ms": elapsed_ms})
        cli_logger.log_stage(stage, False, elapsed_ms)

    def _relative(self, path: str) -> str:
        try:
            return os.path.relpath(path, self.directory)
        except ValueError:
            return path

    def check_hashes(self) -> List[Dict[str, Any]]:
        """Compare every recorded output hash with the file on disk"""
        results = []
        for stage, entry in sorted(self.load_manifest().get("stages", {}).items()):
            for name, record in sorted(entry.get("outputs", {}).items()):
                path = os.path.join(self.directory, name)
                if not os.path.exists(path):
                    results.append({"stage": stage, "file": name, "status": "missing"})
                    continue
                actual = HelperFunctions.sha256_file(path)
                status = "ok" if actual == record["sha256"] else "mismatch"
                results.append({"stage": stage, "file": name, "status": status,
                                "expected": record["sha256"], "actual": actual})
        return results

    def verify_hashes(self):
        """Raise ManifestError on the first missing or modified artifact"""
        for result in self.check_hashes():
            if result["status"] != "ok":
                raise ManifestError(f"{result['file']} ({result['stage']}): {result['status']}")

    @staticmethod
    def recorded_hash(path: str) -> Optional[str]:
        """Hash last recorded for ``path`` by the manifest in its own directory, if any"""
        directory = os.path.dirname(os.path.abspath(path))
        manifest_path = os.path.join(directory, Config.file_name("manifest"))
        if not os.path.exists(manifest_path):
            return None
        name = os.path.basename(path)
        latest = None
        for entry in JSONParser().read(manifest_path).get("stages", {}).values():
            record = entry.get("outputs", {}).get(name)
            if record and (latest is None or entry.get("finished_at", "") >= latest[0]):
                latest = (entry.get("finished_at", ""), record["sha256"])
        return latest[1] if latest else None

    def verify_inputs(self, stage: str, paths: List[str]):
        """Raise ManifestError when a stage input no longer matches the hash its producer recorded"""
        for path in paths:
            expected = self.recorded_hash(path)
            if expected is None or not os.path.exists(path):
                continue
            actual = HelperFunctions.sha256_file(path)
            if actual != expected:
                error = ManifestError(f"{path} changed since it was recorded (expected sha256 {expected[:12]}, got {actual[:12]})")
                self.record_failure(stage, error)
                raise error

    def get_summary(self) -> Dict[str, Any]:
        """Stage names, timings and output counts"""
        stages = self.load_manifest().get("stages", {})
        return {
            "stages": sorted(stages),
            "total_elapsed_ms": sum(entry.get("elapsed_ms", 0) for entry in stages.values()),
            "outputs": sum(len(entry.get("outputs", {})) for entry in stages.values()),
        }

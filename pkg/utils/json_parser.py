# utils/json_parser.py
import json
import math
import os
from typing import Any, Dict, Optional

from .logger import Logger


class JSONParser:
    """Read and write versioned JSON documents with exact float round-trip"""

    def __init__(self, schema_version: Optional[int] = None):
        if schema_version is None:
            from config import Config
            schema_version = Config.SCHEMA_VERSION
        self.schema_version = schema_version
        self.logger = Logger("ntd.json")

    def dumps(self, document: Dict[str, Any]) -> str:
        """Serialize a document; floats use shortest round-trip repr"""
        payload = {"schema_version": self.schema_version}
        payload.update({k: v for k, v in document.items() if k != "schema_version"})
        self._reject_non_finite(payload)
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, path: str, document: Dict[str, Any]) -> str:
        """Write a document to disk and return the path"""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.dumps(document))
        return path

    def loads(self, text: str, source: str = "<string>") -> Dict[str, Any]:
        """Parse a document and check its schema version"""
        try:
            parsed = json.loads(text)
        except json.JSONDecodeError as e:
            self.logger.error("JSON Parsing Failed", {"source": source, "error": str(e)})
            raise ValueError(f"{source}: invalid JSON: {e}") from e

        if not isinstance(parsed, dict):
            raise ValueError(f"{source}: expected a JSON object")

        version = parsed.get("schema_version")
        if version is None:
            self.logger.warning("Document has no schema_version", {"source": source})
        elif version > self.schema_version:
            raise ValueError(
                f"{source}: schema_version {version} is newer than supported {self.schema_version}"
            )
        return parsed

    def read(self, path: str) -> Dict[str, Any]:
        """Read a document from disk"""
        with open(path, "r", encoding="utf-8") as f:
            return self.loads(f.read(), source=path)

    def _reject_non_finite(self, value: Any, where: str = "$"):
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"non-finite float at {where}")
        elif isinstance(value, dict):
            for key, item in value.items():
                self._reject_non_finite(item, f"{where}.{key}")
        elif isinstance(value, (list, tuple)):
            for i, item in enumerate(value):
                self._reject_non_finite(item, f"{where}[{i}]")

# utils/json_logger.py
import json
import os
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional


class RunEventLogger:
    """Append-only events.jsonl of stage outcomes in a run directory"""

    def __init__(self, log_file: str = "events.jsonl"):
        self.log_file = log_file
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if not os.path.exists(log_file):
            open(log_file, "w").close()

    def log_event(self, stage: str, verdict: str, detail: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Append one {ts, stage, verdict, detail} line"""
        entry = {
            "ts": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
            "stage": stage,
            "verdict": verdict,
            "detail": detail or {},
        }
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, default=str, sort_keys=True) + "\n")
        return entry

    def get_recent_events(self, limit: int = 10) -> List[Dict[str, Any]]:
        """Last ``limit`` events, oldest first"""
        return self._read_all()[-limit:]

    def get_events_by_verdict(self, verdict: str) -> List[Dict[str, Any]]:
        return [e for e in self._read_all() if e.get("verdict") == verdict]

    def _read_all(self) -> List[Dict[str, Any]]:
        if not os.path.exists(self.log_file):
            return []
        events = []
        with open(self.log_file, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append(json.loads(line))
                except json.JSONDecodeError:
                    # a partially written last line is skipped
                    continue
        return events

"""Append-only persistence for operator sessions.

Every mutation is one JSON line in ``events.jsonl``; a ``sessions.json``
snapshot is rewritten on finish.  Replaying the event log reconstructs
every session summary exactly (see ``replay_events``), which is the
audit path the comparison reports rely on.
"""
from __future__ import annotations

import json
import threading
import time
from pathlib import Path

from ..env import DecisionEvent, Event


class EventLog:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "events.jsonl"
        self.snapshot_path = self.root / "sessions.json"
        self._write_lock = threading.Lock()

    def append(self, doc: dict) -> None:
        doc = {"ts": time.time(), **doc}
        line = json.dumps(doc)
        with self._write_lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def write_snapshot(self, doc: dict) -> None:
        with self._write_lock:
            self.snapshot_path.write_text(json.dumps(doc, indent=2))


def replay_events(events: list[dict]) -> dict:
    """Rebuild per-session scored scenario event lists from raw log lines.

    Returns {session_id: {"role": ..., "finished": ..., "scenarios":
    [[DecisionEvent, ...], ...]}} with tutorial scenarios excluded.
    """
    sessions: dict[str, dict] = {}
    for doc in events:
        kind = doc.get("type")
        sid = doc.get("session_id")
        if kind == "session_created":
            sessions[sid] = {"role": doc["role"], "finished": False,
                             "scenarios": {}}
        elif kind == "step" and not doc.get("is_training"):
            ev = DecisionEvent(
                level=doc["level"],
                event=Event(doc["event"]),
                action_slot=doc["action_slot"],
                reward=doc["reward"],
                record_id=doc["record_id"],
                ground_truth=doc["ground_truth"],
            )
            sessions[sid]["scenarios"].setdefault(doc["scenario_index"], []).append(ev)
        elif kind == "session_finished":
            sessions[sid]["finished"] = True
    for info in sessions.values():
        info["scenarios"] = [info["scenarios"][k] for k in sorted(info["scenarios"])]
    return sessions

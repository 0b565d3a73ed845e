"""Append-only JSONL persistence of interaction logs.

One JSON object per line, UTF-8. Records from the simulator and the live
service share this format; the estimation pipeline consumes it through
``load_dataset``. Field names and types are frozen in docs/log_schema.md and
stamped with ``schema_version``. Floats are serialized with shortest
round-trip ``repr``, so write -> read is bit-exact.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .counterfactual import LoggedInteraction

SCHEMA_VERSION = 1
PROPENSITY_REL_TOL = 1e-12


class LogStoreError(ValueError):
    pass


@dataclass(frozen=True)
class LogRecord:
    session_id: str
    event_index: int
    context: tuple[str, ...]
    words: tuple[str, ...]
    word_props: tuple[float, ...]
    propensity: float
    reward: float
    policy_tag: str
    timestamp: float
    doc_id: str | None = None
    mid_word: bool = False
    schema_version: int = field(default=SCHEMA_VERSION)


def validate_record(rec: LogRecord) -> None:
    if len(rec.words) < 1:
        raise LogStoreError("record has no suggested words")
    if len(rec.word_props) != len(rec.words):
        raise LogStoreError("word_props length does not match words")
    if any(p <= 0.0 for p in rec.word_props) or rec.propensity <= 0.0:
        raise LogStoreError("propensities must be positive")
    prod = float(np.prod(rec.word_props))
    if abs(prod - rec.propensity) > PROPENSITY_REL_TOL * max(abs(prod), abs(rec.propensity)):
        raise LogStoreError(
            f"propensity {rec.propensity} is not the product of word_props ({prod})"
        )
    if rec.reward < 0.0:
        raise LogStoreError(f"reward must be non-negative, got {rec.reward}")
    if rec.event_index < 0:
        raise LogStoreError("event_index must be non-negative")


def _record_to_json(rec: LogRecord) -> str:
    d = asdict(rec)
    d["context"] = list(rec.context)
    d["words"] = list(rec.words)
    d["word_props"] = list(rec.word_props)
    return json.dumps(d, ensure_ascii=False, separators=(",", ":"))


def _record_from_dict(d: dict) -> LogRecord:
    return LogRecord(
        session_id=d["session_id"],
        event_index=int(d["event_index"]),
        context=tuple(d["context"]),
        words=tuple(d["words"]),
        word_props=tuple(float(p) for p in d["word_props"]),
        propensity=float(d["propensity"]),
        reward=float(d["reward"]),
        policy_tag=d["policy_tag"],
        timestamp=float(d["timestamp"]),
        doc_id=d.get("doc_id"),
        mid_word=bool(d.get("mid_word", False)),
        schema_version=int(d.get("schema_version", SCHEMA_VERSION)),
    )


class LogStore:
    """Serializing writer over a single JSONL file.

    Appends are validated, written under a lock, and fsynced before the call
    returns, so an acknowledged record is durable and no partial line becomes
    visible. Concurrent sessions multiplex through one store instance.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._last_index: dict[str, int] = {}
        if self.path.exists():
            for rec in self.read_all():
                self._last_index[rec.session_id] = max(
                    self._last_index.get(rec.session_id, -1), rec.event_index
                )

    def append(self, rec: LogRecord) -> None:
        validate_record(rec)
        line = _record_to_json(rec) + "\n"
        with self._lock:
            last = self._last_index.get(rec.session_id, -1)
            if rec.event_index <= last:
                raise LogStoreError(
                    f"event_index {rec.event_index} not increasing for session "
                    f"{rec.session_id} (last {last})"
                )
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            self._last_index[rec.session_id] = rec.event_index

    def next_index(self, session_id: str) -> int:
        with self._lock:
            return self._last_index.get(session_id, -1) + 1

    def read_all(self) -> list[LogRecord]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(_record_from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise LogStoreError(f"{self.path}:{lineno}: malformed record: {exc}")
        return out


def write_records(path: str | Path, records: list[LogRecord]) -> None:
    """Bulk append without per-record fsync (for simulation output)."""
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            validate_record(rec)
            fh.write(_record_to_json(rec) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def load_dataset(
    path: str | Path,
    policy_tag: str | None = None,
    session_id: str | None = None,
    since: float | None = None,
    strict: bool = True,
) -> list[LoggedInteraction]:
    """Materialize estimation tuples from a JSONL log file.

    In strict mode a malformed line raises with its line number; in lenient
    mode malformed lines are skipped and the count logged. Filters are
    conjunctive. Each record's group is its source document when known, else
    its session.
    """
    path = Path(path)
    out: list[LoggedInteraction] = []
    skipped = 0
    if not path.exists():
        return out
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = _record_from_dict(json.loads(line))
                validate_record(rec)
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                if strict:
                    raise LogStoreError(f"{path}:{lineno}: malformed record: {exc}")
                skipped += 1
                continue
            if policy_tag is not None and rec.policy_tag != policy_tag:
                continue
            if session_id is not None and rec.session_id != session_id:
                continue
            if since is not None and rec.timestamp < since:
                continue
            out.append(
                LoggedInteraction(
                    context=rec.context,
                    words=rec.words,
                    reward=rec.reward,
                    propensity=rec.propensity,
                    per_word_probs=rec.word_props,
                    group=rec.doc_id if rec.doc_id is not None else rec.session_id,
                )
            )
    if not strict and skipped:
        logging.getLogger(__name__).warning("%s: skipped %d malformed records", path, skipped)
    return out

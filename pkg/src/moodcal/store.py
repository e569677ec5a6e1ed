"""Event-sourced application state.

Every mutation is validated, serialized into a log-entry payload, and
then folded into the current state by ``apply_entry``, the same pure
function replay uses.  Live state and replayed state are therefore
equal by construction: both are produced from identical payload
documents, floats round-trip through JSON exactly, and timestamps are
quantized to whole microseconds before they ever reach a payload.

Persistence is an append-only JSONL journal plus a periodic snapshot
sidecar.  The journal is never truncated; snapshots only shorten the
fold on reload.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np

from .behavior import classify_events, load_activity_log, load_model_bundle
from .domain import (
    NEUTRAL_EMOTION,
    NEUTRAL_VAD,
    EmotionSource,
    EmotionState,
    EventSpec,
    Horizon,
    emotion_from_doc,
    emotion_to_doc,
    event_from_doc,
    event_to_doc,
    horizon_from_doc,
    horizon_to_doc,
    quantize_ts,
)
from .ecg import detect_r_peaks, load_recording, normalize, peaks_to_hr
from .errors import (
    CorruptLog,
    ModelMissing,
    NoEvents,
    NotFound,
    ValidationFailed,
)
from .scheduling import (
    ConstraintThresholds,
    ObjectiveWeights,
    Problem,
    Schedule,
    schedule_from_doc,
    schedule_to_doc,
    solve,
    thresholds_from_doc,
    thresholds_to_doc,
    weights_from_doc,
    weights_to_doc,
)
from .seqnet import forward, load_model

ENTRY_KINDS = ("event_added", "event_removed", "emotion_set",
               "schedule_solved", "config_changed")

VAD_DIMENSIONS = ("valence", "arousal", "dominance")


@dataclass(frozen=True)
class SchedulingConfig:
    weights: ObjectiveWeights = ObjectiveWeights()
    thresholds: ConstraintThresholds = ConstraintThresholds()
    horizon: Horizon = Horizon()


DEFAULT_SCHEDULING_CONFIG = SchedulingConfig()


def config_to_doc(c: SchedulingConfig) -> dict[str, Any]:
    return {"weights": weights_to_doc(c.weights),
            "thresholds": thresholds_to_doc(c.thresholds),
            "horizon": horizon_to_doc(c.horizon)}


def config_from_doc(doc: dict[str, Any]) -> SchedulingConfig:
    return SchedulingConfig(weights=weights_from_doc(doc["weights"]),
                            thresholds=thresholds_from_doc(doc["thresholds"]),
                            horizon=horizon_from_doc(doc["horizon"]))


@dataclass(frozen=True)
class AppState:
    events: tuple[EventSpec, ...] = ()
    emotion: EmotionState = NEUTRAL_EMOTION
    schedule: Schedule | None = None
    config: SchedulingConfig = DEFAULT_SCHEDULING_CONFIG
    next_event_seq: int = 1  # generated-id counter


DEFAULT_APP_STATE = AppState()


def state_to_doc(state: AppState) -> dict[str, Any]:
    return {
        "events": [event_to_doc(e) for e in state.events],
        "emotion": emotion_to_doc(state.emotion),
        "schedule": schedule_to_doc(state.schedule) if state.schedule else None,
        "config": config_to_doc(state.config),
        "next_event_seq": state.next_event_seq,
    }


def state_from_doc(doc: dict[str, Any]) -> AppState:
    return AppState(
        events=tuple(event_from_doc(e) for e in doc["events"]),
        emotion=emotion_from_doc(doc["emotion"]),
        schedule=schedule_from_doc(doc["schedule"]) if doc.get("schedule") else None,
        config=config_from_doc(doc["config"]),
        next_event_seq=int(doc["next_event_seq"]),
    )


# ── log entries and the state fold ──────────────────────────────────

@dataclass(frozen=True)
class LogEntry:
    seq: int
    kind: str
    at: float  # quantized epoch seconds
    payload: dict[str, Any]

    def to_json_line(self) -> str:
        return json.dumps({"seq": self.seq, "kind": self.kind, "at": self.at,
                           "payload": self.payload}, sort_keys=True)

    @staticmethod
    def from_json_line(line: str) -> "LogEntry":
        doc = json.loads(line)
        return LogEntry(seq=int(doc["seq"]), kind=str(doc["kind"]),
                        at=float(doc["at"]), payload=dict(doc["payload"]))


def apply_entry(state: AppState, entry: LogEntry) -> AppState:
    """Fold one entry into the state.  Pure and total over well-formed
    entries; both the live path and replay go through here."""
    payload = entry.payload
    if entry.kind == "event_added":
        event = event_from_doc(payload["event"])
        return replace(state, events=state.events + (event,),
                       next_event_seq=int(payload["next_event_seq"]))
    if entry.kind == "event_removed":
        wanted = payload["id"]
        if all(e.id != wanted for e in state.events):
            raise CorruptLog("removal of an event the log never added",
                            {"seq": entry.seq, "id": wanted})
        return replace(state, events=tuple(e for e in state.events if e.id != wanted))
    if entry.kind == "emotion_set":
        return replace(state, emotion=emotion_from_doc(payload["emotion"]))
    if entry.kind == "schedule_solved":
        return replace(state, schedule=schedule_from_doc(payload["schedule"]))
    if entry.kind == "config_changed":
        return replace(state, config=config_from_doc(payload["config"]))
    raise CorruptLog("unknown entry kind", {"seq": entry.seq, "kind": entry.kind})


def _parse_entries(lines: Iterable[str], first_seq: int) -> list[LogEntry]:
    entries: list[LogEntry] = []
    expected = first_seq
    for line in lines:
        try:
            entry = LogEntry.from_json_line(line)
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptLog("unparsable log line",
                            {"expected_seq": expected, "reason": str(exc)}) from exc
        if entry.seq != expected:
            raise CorruptLog("sequence gap",
                            {"expected_seq": expected, "got": entry.seq})
        entries.append(entry)
        expected += 1
    return entries


def replay(lines: Iterable[str], start: AppState = DEFAULT_APP_STATE,
           first_seq: int = 1) -> AppState:
    """Fold a whole journal back into a state; raises CorruptLog with
    the expected sequence number on any gap or unparsable line."""
    state = start
    for entry in _parse_entries(lines, first_seq):
        state = apply_entry(state, entry)
    return state


# ── journal file ────────────────────────────────────────────────────

class Journal:
    """Append-only JSONL log with a snapshot sidecar written every
    ``snapshot_every`` entries.  The log itself is never rewritten;
    the snapshot only lets ``load`` skip part of the fold."""

    def __init__(self, path, snapshot_every: int = 50):
        if snapshot_every < 1:
            raise ValidationFailed("snapshot interval must be positive",
                                   {"snapshot_every": snapshot_every})
        self.path = Path(path)
        self.snapshot_path = Path(str(path) + ".snapshot")
        self.snapshot_every = snapshot_every

    def append(self, entry: LogEntry, state_after: AppState) -> None:
        with open(self.path, "a") as fh:
            fh.write(entry.to_json_line() + "\n")
        if entry.seq % self.snapshot_every == 0:
            self._write_snapshot(entry.seq, state_after)

    def _write_snapshot(self, seq: int, state: AppState) -> None:
        tmp = Path(str(self.snapshot_path) + ".tmp")
        tmp.write_text(json.dumps({"seq": seq, "state": state_to_doc(state)},
                                  sort_keys=True))
        os.replace(tmp, self.snapshot_path)

    def _read_snapshot(self) -> tuple[int, AppState] | None:
        if not self.snapshot_path.exists():
            return None
        try:
            doc = json.loads(self.snapshot_path.read_text())
            return int(doc["seq"]), state_from_doc(doc["state"])
        except (ValueError, KeyError, TypeError):
            return None  # damaged snapshot: the log is the authority

    def load(self) -> tuple[AppState, int]:
        """Returns (state, next sequence number)."""
        if not self.path.exists():
            return DEFAULT_APP_STATE, 1
        lines = [ln for ln in self.path.read_text().splitlines() if ln]
        entries = _parse_entries(lines, 1)
        last_seq = entries[-1].seq if entries else 0
        snapshot = self._read_snapshot()
        if snapshot is not None:
            snap_seq, snap_state = snapshot
            if snap_seq > last_seq:
                raise CorruptLog("journal ends before its own snapshot",
                                {"expected_seq": snap_seq, "got": last_seq})
            state = snap_state
            tail = entries[snap_seq:]
        else:
            state = DEFAULT_APP_STATE
            tail = entries
        for entry in tail:
            state = apply_entry(state, entry)
        return state, last_seq + 1


# ── the store ───────────────────────────────────────────────────────

class CalendarStore:
    """Mutations are serialized under one lock and committed through
    the apply_entry fold; ``state`` reads are plain reference reads of
    an immutable snapshot, so readers never see a torn update."""

    def __init__(self, journal: Journal | None = None,
                 now_fn: Callable[[], float] = time.time):
        self._journal = journal
        self._now = now_fn
        self._lock = threading.Lock()
        if journal is not None:
            self._state, self._next_seq = journal.load()
        else:
            self._state, self._next_seq = DEFAULT_APP_STATE, 1

    @property
    def state(self) -> AppState:
        return self._state

    @property
    def next_seq(self) -> int:
        return self._next_seq

    def now(self) -> float:
        return quantize_ts(self._now())

    def _commit(self, kind: str, payload: dict[str, Any]) -> AppState:
        # caller holds the lock
        entry = LogEntry(seq=self._next_seq, kind=kind, at=self.now(),
                         payload=payload)
        new_state = apply_entry(self._state, entry)
        if self._journal is not None:
            self._journal.append(entry, new_state)
        self._state = new_state
        self._next_seq += 1
        return new_state

    def add_event(self, doc: dict[str, Any]) -> str:
        with self._lock:
            doc = dict(doc)
            counter = self._state.next_event_seq
            if not doc.get("id"):
                taken = {e.id for e in self._state.events}
                while f"e{counter}" in taken:
                    counter += 1
                doc["id"] = f"e{counter}"
                counter += 1
            event = event_from_doc(doc)
            if any(e.id == event.id for e in self._state.events):
                raise ValidationFailed("duplicate event id", {"id": event.id})
            self._commit("event_added", {"event": event_to_doc(event),
                                         "next_event_seq": counter})
            return event.id

    def remove_event(self, event_id: str) -> None:
        with self._lock:
            if all(e.id != event_id for e in self._state.events):
                raise NotFound("no such event", {"id": event_id})
            self._commit("event_removed", {"id": event_id})

    def set_emotion(self, emotion: EmotionState) -> EmotionState:
        with self._lock:
            self._commit("emotion_set", {"emotion": emotion_to_doc(emotion)})
            return self._state.emotion

    def set_config(self, config: SchedulingConfig) -> None:
        with self._lock:
            self._commit("config_changed", {"config": config_to_doc(config)})

    def solve(self) -> Schedule:
        """Solve against the current state; a failed solve leaves both
        the state and the journal untouched."""
        with self._lock:
            state = self._state
            if not state.events:
                raise NoEvents("nothing to schedule")
            problem = Problem(events=state.events, horizon=state.config.horizon,
                              emotion=state.emotion, weights=state.config.weights,
                              thresholds=state.config.thresholds)
            schedule = solve(problem)
            self._commit("schedule_solved", {"schedule": schedule_to_doc(schedule)})
            return self._state.schedule


# ── emotion ingestion routes ────────────────────────────────────────

def emotion_from_hr_file(hr_path, model_dir, at: float) -> EmotionState:
    """Heart-rate route: detect beats, normalize the bpm series, and
    run one trained sequence model per VAD dimension; a low/high
    verdict maps to 0.25/0.75."""
    if not model_dir:
        raise ModelMissing("no model directory configured")
    model_dir = Path(model_dir)
    models = {}
    for dim in VAD_DIMENSIONS:
        path = model_dir / f"{dim}.model"
        if not path.exists():
            raise ModelMissing(f"no trained {dim} model",
                               {"path": str(path)})
        models[dim] = load_model(path)
    rec = load_recording(hr_path)
    peaks = detect_r_peaks(rec, channel=1)
    hr = peaks_to_hr(peaks, rec.sample_rate_hz)
    series = normalize(hr.bpm)
    verdicts = {}
    for dim, model in models.items():
        width = model.window_size
        if not width:
            raise ValidationFailed(f"{dim} model carries no window size")
        if len(series) >= width:
            window = series[-width:]
        else:
            window = np.concatenate([series, np.zeros(width - len(series))])
        probs = forward(model, window)
        verdicts[dim] = 0.75 if int(np.argmax(probs)) == 1 else 0.25
    return EmotionState(verdicts["valence"], verdicts["arousal"],
                        verdicts["dominance"], at=at,
                        source=EmotionSource.BIOMETRIC)


def emotion_from_activity_log(log_path, bundle_path,
                              class_vad: dict[int, tuple[float, float, float]],
                              at: float) -> EmotionState:
    """Behavioral route: classify the log's majority mood and map it
    to VAD through the configured table (neutral when unmapped)."""
    if not bundle_path or not Path(bundle_path).exists():
        raise ModelMissing("no behavior model bundle configured",
                           {"path": str(bundle_path) if bundle_path else None})
    bundle = load_model_bundle(bundle_path)
    events = load_activity_log(log_path)
    mood = classify_events(events, bundle)
    valence, arousal, dominance = class_vad.get(mood, NEUTRAL_VAD)
    return EmotionState(valence, arousal, dominance, at=at,
                        source=EmotionSource.BEHAVIORAL)

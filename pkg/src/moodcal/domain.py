"""Shared vocabulary for the emotion-aware day planner.

Value types used by every subsystem: the valence/arousal/dominance
(VAD) emotion vector, event specs and their slot placements, and the
single-day horizon.  Everything here is an immutable value, safe to
copy between threads.  Serialization is flat key/value documents
(JSON objects one level deep); timestamps travel as ISO-8601 strings
and wall-clock fields as ``HH:MM``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any

from .errors import ValidationFailed

Doc = dict[str, Any]

NEUTRAL_VAD = (0.5, 0.5, 0.5)


class EmotionSource(str, Enum):
    BIOMETRIC = "biometric"
    BEHAVIORAL = "behavioral"
    MANUAL = "manual"


# ── timestamps ──────────────────────────────────────────────────────

def quantize_ts(t: float) -> float:
    """Clamp seconds-since-epoch to whole microseconds.

    Documents carry ISO-8601 strings with microsecond precision, so a
    state built from live values and one rebuilt from its serialized
    form must agree bit for bit.
    """
    return round(t * 1e6) / 1e6


def ts_to_iso(t: float) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).isoformat()


def iso_to_ts(s: str) -> float:
    try:
        return datetime.fromisoformat(s).timestamp()
    except ValueError as exc:
        raise ValidationFailed(f"bad timestamp {s!r}", {"value": s}) from exc


def parse_wall_clock(s: str) -> int:
    """``"HH:MM"`` to minutes since midnight."""
    try:
        hh, mm = s.split(":")
        minutes = int(hh) * 60 + int(mm)
    except (ValueError, AttributeError) as exc:
        raise ValidationFailed(f"bad wall-clock time {s!r}", {"value": s}) from exc
    if not 0 <= minutes < 24 * 60:
        raise ValidationFailed(f"wall-clock time out of day range: {s!r}", {"value": s})
    return minutes


def format_wall_clock(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


# ── emotion ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EmotionState:
    """VAD vector with components in [0, 1] plus its origin."""

    valence: float
    arousal: float
    dominance: float
    at: float = 0.0  # seconds since epoch
    source: EmotionSource = EmotionSource.MANUAL

    def __post_init__(self):
        for name in ("valence", "arousal", "dominance"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationFailed(f"{name} must be in [0, 1]", {name: v})
        if not (math.isfinite(self.at) and self.at >= 0.0):
            raise ValidationFailed("timestamp must be finite and non-negative", {"at": self.at})
        if not isinstance(self.source, EmotionSource):
            object.__setattr__(self, "source", EmotionSource(self.source))


NEUTRAL_EMOTION = EmotionState(*NEUTRAL_VAD)


def readiness(e: EmotionState) -> float:
    """Scheduling readiness: high valence, low arousal and high
    dominance all push it towards 1."""
    return (e.valence + (1.0 - e.arousal) + e.dominance) / 3.0


# ── events and the day grid ─────────────────────────────────────────

@dataclass(frozen=True)
class Horizon:
    """One day sliced into equal slots.

    ``day_start``/``day_end`` are minutes since midnight; the span
    must divide evenly into ``slot_minutes`` slots.
    """

    day_start: int = 9 * 60
    day_end: int = 18 * 60
    slot_minutes: int = 30

    def __post_init__(self):
        if not (isinstance(self.slot_minutes, int) and self.slot_minutes >= 1):
            raise ValidationFailed("slot_minutes must be a positive integer",
                                   {"slot_minutes": self.slot_minutes})
        if not (0 <= self.day_start < self.day_end <= 24 * 60):
            raise ValidationFailed("horizon must fit within one day",
                                   {"day_start": self.day_start, "day_end": self.day_end})
        if (self.day_end - self.day_start) % self.slot_minutes != 0:
            raise ValidationFailed("day span must divide evenly into slots",
                                   {"span_min": self.day_end - self.day_start,
                                    "slot_minutes": self.slot_minutes})

    def slot_clock(self, slot: int) -> str:
        """Wall-clock label of a slot boundary."""
        return format_wall_clock(self.day_start + slot * self.slot_minutes)


def slot_count(h: Horizon) -> int:
    return (h.day_end - h.day_start) // h.slot_minutes


@dataclass(frozen=True)
class EventSpec:
    """A calendar item to be placed.

    ``earliest``/``latest`` are optional bounds on the start slot.
    """

    id: str
    name: str
    duration_min: int
    priority: float = 0.5
    multitask: bool = False
    cognitive_load: float = 0.5
    sensitive: bool = False
    earliest: int | None = None
    latest: int | None = None

    def __post_init__(self):
        if not (isinstance(self.id, str) and self.id):
            raise ValidationFailed("event id must be a non-empty string", {"id": self.id})
        if not (isinstance(self.duration_min, int) and self.duration_min >= 1):
            raise ValidationFailed("duration_min must be a positive integer",
                                   {"id": self.id, "duration_min": self.duration_min})
        for name in ("priority", "cognitive_load"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationFailed(f"{name} must be in [0, 1]", {"id": self.id, name: v})
        for name in ("earliest", "latest"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, int) and v >= 0):
                raise ValidationFailed(f"{name} must be a non-negative slot index",
                                       {"id": self.id, name: v})
        if self.earliest is not None and self.latest is not None and self.earliest > self.latest:
            raise ValidationFailed("earliest start bound exceeds latest",
                                   {"id": self.id, "earliest": self.earliest, "latest": self.latest})


def duration_slots(e: EventSpec, slot_minutes: int) -> int:
    # ceil without floats: durations never shrink when they straddle a boundary
    return -(-e.duration_min // slot_minutes)


@dataclass(frozen=True)
class ScheduledEvent:
    """An event pinned to a start slot; ``end_slot`` is derived."""

    event: EventSpec
    start_slot: int
    end_slot: int

    def __post_init__(self):
        if not (isinstance(self.start_slot, int) and self.start_slot >= 0):
            raise ValidationFailed("start_slot must be a non-negative integer",
                                   {"id": self.event.id, "start_slot": self.start_slot})
        if self.end_slot <= self.start_slot:
            raise ValidationFailed("placement must span at least one slot",
                                   {"id": self.event.id, "start_slot": self.start_slot,
                                    "end_slot": self.end_slot})


def place(e: EventSpec, start_slot: int, h: Horizon) -> ScheduledEvent:
    """Pin an event to a start slot on the horizon's grid."""
    end = start_slot + duration_slots(e, h.slot_minutes)
    se = ScheduledEvent(event=e, start_slot=start_slot, end_slot=end)
    if end > slot_count(h):
        raise ValidationFailed("placement runs past the end of the day",
                               {"id": e.id, "start_slot": start_slot, "end_slot": end,
                                "slot_count": slot_count(h)})
    return se


# ── flat documents ──────────────────────────────────────────────────

def emotion_to_doc(e: EmotionState) -> Doc:
    return {
        "valence": e.valence,
        "arousal": e.arousal,
        "dominance": e.dominance,
        "at": ts_to_iso(e.at),
        "source": e.source.value,
    }


def emotion_from_doc(doc: Doc) -> EmotionState:
    try:
        return EmotionState(
            valence=float(doc["valence"]),
            arousal=float(doc["arousal"]),
            dominance=float(doc["dominance"]),
            at=iso_to_ts(doc["at"]) if "at" in doc else 0.0,
            source=EmotionSource(doc.get("source", "manual")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad emotion document: {exc}", {"doc": doc}) from exc


def event_to_doc(e: EventSpec) -> Doc:
    doc: Doc = {
        "id": e.id,
        "name": e.name,
        "duration_min": e.duration_min,
        "priority": e.priority,
        "multitask": e.multitask,
        "cognitive_load": e.cognitive_load,
        "sensitive": e.sensitive,
    }
    if e.earliest is not None:
        doc["earliest"] = e.earliest
    if e.latest is not None:
        doc["latest"] = e.latest
    return doc


def event_from_doc(doc: Doc) -> EventSpec:
    try:
        return EventSpec(
            id=str(doc["id"]),
            name=str(doc.get("name", doc["id"])),
            duration_min=int(doc["duration_min"]),
            priority=float(doc.get("priority", 0.5)),
            multitask=bool(doc.get("multitask", False)),
            cognitive_load=float(doc.get("cognitive_load", 0.5)),
            sensitive=bool(doc.get("sensitive", False)),
            earliest=None if doc.get("earliest") is None else int(doc["earliest"]),
            latest=None if doc.get("latest") is None else int(doc["latest"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad event document: {exc}", {"doc": doc}) from exc


def placement_to_doc(se: ScheduledEvent) -> Doc:
    doc = event_to_doc(se.event)
    doc["start_slot"] = se.start_slot
    doc["end_slot"] = se.end_slot
    return doc


def placement_from_doc(doc: Doc) -> ScheduledEvent:
    fields = dict(doc)
    try:
        start = int(fields.pop("start_slot"))
        end = int(fields.pop("end_slot"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad placement document: {exc}", {"doc": doc}) from exc
    return ScheduledEvent(event=event_from_doc(fields), start_slot=start, end_slot=end)


def horizon_to_doc(h: Horizon) -> Doc:
    return {
        "day_start": format_wall_clock(h.day_start),
        "day_end": format_wall_clock(h.day_end),
        "slot_minutes": h.slot_minutes,
    }


def horizon_from_doc(doc: Doc) -> Horizon:
    try:
        return Horizon(
            day_start=parse_wall_clock(doc.get("day_start", "09:00")),
            day_end=parse_wall_clock(doc.get("day_end", "18:00")),
            slot_minutes=int(doc.get("slot_minutes", 30)),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad horizon document: {exc}", {"doc": doc}) from exc

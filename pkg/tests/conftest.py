"""Shared test helpers: seeded random problem instances.

The generator is tuned so exhaustive verification stays cheap: small
grids, short durations, and coarse priority ties only on small
instances (many equal-priority multitask events would blow up the
enumeration space).
"""

from __future__ import annotations

import numpy as np

from moodcal.domain import (
    EmotionSource,
    EmotionState,
    EventSpec,
    Horizon,
    quantize_ts,
)
from moodcal.errors import Infeasible, NoEvents, NotFound, ValidationFailed
from moodcal.scheduling import ConstraintThresholds, ObjectiveWeights, Problem
from moodcal.store import CalendarStore, SchedulingConfig


def _on_segment(a: np.ndarray, b: np.ndarray, p: np.ndarray, tol: float) -> bool:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a)) <= tol
    u = float((p - a) @ ab) / denom
    if u < -1e-12 or u > 1.0 + 1e-12:
        return False
    return float(np.linalg.norm(a + u * ab - p)) <= tol


def synthetic_on_segment(originals: np.ndarray, p: np.ndarray,
                         tol: float = 1e-9, restrict: int = 25) -> bool:
    """True when p lies on the segment between some pair of original
    rows.  Pairs among the nearest `restrict` originals are searched
    first; the exhaustive scan is the fallback."""
    d = np.linalg.norm(originals - p, axis=1)
    near = np.argsort(d, kind="stable")[:restrict]
    for ai in range(len(near)):
        for bi in range(ai + 1, len(near)):
            if _on_segment(originals[near[ai]], originals[near[bi]], p, tol):
                return True
    for i in range(len(originals)):
        for j in range(i + 1, len(originals)):
            if _on_segment(originals[i], originals[j], p, tol):
                return True
    return False


def random_store_op(store: CalendarStore, rng: np.random.Generator) -> None:
    """One random API call; domain rejections the API is allowed to
    produce are swallowed, everything else propagates."""
    roll = rng.random()
    n_events = len(store.state.events)
    if roll < 0.35 and n_events < 6 or n_events == 0:
        doc = {
            "name": f"task {int(rng.integers(100))}",
            "duration_min": int(rng.choice([30, 60])),
            "priority": round(float(rng.random()), 6),
            "cognitive_load": round(float(rng.random()), 6),
            "multitask": bool(rng.random() < 0.2),
            "sensitive": bool(rng.random() < 0.15),
        }
        if rng.random() < 0.25:
            doc["id"] = f"x{int(rng.integers(4))}"  # collisions on purpose
        try:
            store.add_event(doc)
        except ValidationFailed:
            pass
    elif roll < 0.55:
        ids = [e.id for e in store.state.events] + ["ghost"]
        try:
            store.remove_event(str(rng.choice(ids)))
        except NotFound:
            pass
    elif roll < 0.75:
        store.set_emotion(EmotionState(
            round(float(rng.random()), 6), round(float(rng.random()), 6),
            round(float(rng.random()), 6),
            at=quantize_ts(float(rng.random()) * 1e9),
            source=EmotionSource.MANUAL))
    elif roll < 0.9:
        try:
            store.solve()
        except (Infeasible, NoEvents):
            pass
    else:
        store.set_config(SchedulingConfig(
            thresholds=ConstraintThresholds(
                t_stress=float(rng.choice([0.5, 0.7, 0.9])))))


def random_problem(rng: np.random.Generator, max_events: int = 6,
                   max_slots: int = 16) -> Problem:
    slot_minutes = 30
    n_slots = int(rng.integers(4, max_slots + 1))
    horizon = Horizon(day_start=9 * 60, day_end=9 * 60 + slot_minutes * n_slots,
                      slot_minutes=slot_minutes)
    n = int(rng.integers(1, max_events + 1))
    coarse_priorities = n <= 4 and rng.random() < 0.4
    events = []
    for i in range(n):
        dur = int(rng.integers(1, 4))
        earliest = latest = None
        if rng.random() < 0.25:
            earliest = int(rng.integers(0, n_slots))
        if rng.random() < 0.15:
            latest = int(rng.integers(earliest or 0, n_slots))
        events.append(EventSpec(
            id=f"e{i:02d}",
            name=f"event {i}",
            duration_min=dur * slot_minutes,
            priority=float(rng.choice([0.2, 0.5, 0.8])) if coarse_priorities
            else round(float(rng.random()), 6),
            multitask=bool(rng.random() < 0.2),
            cognitive_load=round(float(rng.random()), 6),
            sensitive=bool(rng.random() < 0.12),
            earliest=earliest,
            latest=latest,
        ))
    emotion = EmotionState(round(float(rng.random()), 6), round(float(rng.random()), 6),
                           round(float(rng.random()), 6))
    weights = ObjectiveWeights(
        alpha_temporal=round(float(rng.uniform(0.05, 2.0)), 6),
        alpha_cognitive=round(float(rng.uniform(0.05, 2.0)), 6),
        alpha_emotional=round(float(rng.uniform(0.05, 2.0)), 6),
    )
    thresholds = ConstraintThresholds(
        t_stress=float(rng.choice([0.5, 0.7, 0.9])),
        c_high=0.7, c_low=0.3,
        break_slots=int(rng.choice([1, 2])),
    )
    return Problem(events=tuple(events), horizon=horizon, emotion=emotion,
                   weights=weights, thresholds=thresholds)

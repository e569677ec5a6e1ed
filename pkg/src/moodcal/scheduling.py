"""Emotion-extended constraint scheduler.

Events get start slots on the day grid subject to four hard rules:

* exclusivity: two events may overlap only if both are multitask;
* precedence: a strictly higher-priority event never starts later;
* pacing: when arousal is at or above the stress threshold, a
  high-load event must be followed by a low-demand event or a break;
* sensitivity: while the user is distressed (high arousal, low
  valence), sensitive events cannot be placed at all.

Among feasible assignments the solver minimises a weighted sum of
idle time, cognitive-load clustering and emotional strain, plus any
pluggable extra terms.  ``solve`` runs branch-and-bound backtracking
with forward checking; ``brute_force_solve`` is its exhaustive twin,
kept deliberately independent so the two can cross-check each other.
Both break objective ties the same way: the assignment whose
lexicographically smallest event id starts earlier wins, then the
next id, and so on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .domain import (
    EmotionState,
    EventSpec,
    Horizon,
    ScheduledEvent,
    duration_slots,
    place,
    readiness,
    slot_count,
)
from .errors import EmptySchedule, Infeasible, InstanceTooLarge, ValidationFailed

BREAKDOWN_TOLERANCE = 1e-12

Scorer = Callable[[tuple[ScheduledEvent, ...], "Problem"], float]


@dataclass(frozen=True)
class ExtraObjective:
    """Pluggable objective term: ``scorer(placements, problem) -> value``."""

    name: str
    weight: float
    scorer: Scorer


@dataclass(frozen=True)
class ObjectiveWeights:
    alpha_temporal: float = 1.0
    alpha_cognitive: float = 1.0
    alpha_emotional: float = 1.0
    extras: tuple[ExtraObjective, ...] = ()

    def __post_init__(self):
        weights = [self.alpha_temporal, self.alpha_cognitive, self.alpha_emotional]
        weights += [ex.weight for ex in self.extras]
        if any(w < 0 for w in weights):
            raise ValidationFailed("objective weights must be non-negative")
        if sum(weights) <= 0:
            raise ValidationFailed("objective weights must sum to a positive value")
        names = [ex.name for ex in self.extras]
        if len(set(names)) != len(names) or set(names) & {"temporal", "cognitive", "emotional"}:
            raise ValidationFailed("extra objective names must be unique and not shadow built-ins",
                                   {"names": names})


@dataclass(frozen=True)
class ConstraintThresholds:
    t_stress: float = 0.7
    c_high: float = 0.7
    c_low: float = 0.3
    break_slots: int = 1

    def __post_init__(self):
        for name in ("t_stress", "c_high", "c_low"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationFailed(f"{name} must be in [0, 1]", {name: v})
        if not self.c_low < self.c_high:
            raise ValidationFailed("c_low must be strictly below c_high",
                                   {"c_low": self.c_low, "c_high": self.c_high})
        if not (isinstance(self.break_slots, int) and self.break_slots >= 1):
            raise ValidationFailed("break_slots must be a positive integer",
                                   {"break_slots": self.break_slots})


@dataclass(frozen=True)
class Problem:
    events: tuple[EventSpec, ...]
    horizon: Horizon = Horizon()
    emotion: EmotionState = EmotionState(0.5, 0.5, 0.5)
    weights: ObjectiveWeights = ObjectiveWeights()
    thresholds: ConstraintThresholds = ConstraintThresholds()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise ValidationFailed("a problem needs at least one event")
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationFailed("event ids must be unique", {"duplicates": dupes})


@dataclass(frozen=True)
class Violation:
    constraint: str  # "exclusivity" | "precedence" | "pacing" | "sensitivity"
    event_ids: tuple[str, ...]


@dataclass(frozen=True)
class Schedule:
    """Solver output: placements plus the objective and its weighted
    per-term breakdown (terms sum to the objective within 1e-12)."""

    placements: tuple[ScheduledEvent, ...]
    objective: float
    breakdown: dict[str, float]

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(self.placements))
        gap = abs(self.objective - sum(self.breakdown.values()))
        if gap > BREAKDOWN_TOLERANCE:
            raise ValidationFailed("objective must equal the breakdown sum",
                                   {"objective": self.objective, "gap": gap})


# ── pairwise constraints ────────────────────────────────────────────

def check_exclusivity(a: ScheduledEvent, b: ScheduledEvent) -> bool:
    """Overlap is allowed only between two multitask events."""
    if a.event.multitask and b.event.multitask:
        return True
    return a.end_slot <= b.start_slot or b.end_slot <= a.start_slot


def check_precedence(a: ScheduledEvent, b: ScheduledEvent) -> bool:
    """A strictly higher-priority event must not start later."""
    if a.event.priority > b.event.priority:
        return a.start_slot <= b.start_slot
    return True


# ── whole-schedule constraints ──────────────────────────────────────

def _distressed(e: EmotionState, th: ConstraintThresholds) -> bool:
    return e.arousal >= th.t_stress and e.valence < 0.5


def pacing_violations(placements: Sequence[ScheduledEvent], emotion: EmotionState,
                      th: ConstraintThresholds) -> list[Violation]:
    """Under stress, a high-load event needs a low-demand follow-up or
    a break of at least ``break_slots`` before the next event starts."""
    if emotion.arousal < th.t_stress:
        return []
    out: list[Violation] = []
    for high in placements:
        if high.event.cognitive_load < th.c_high:
            continue
        followers = [p for p in placements if p is not high and p.start_slot >= high.end_slot]
        if not followers:
            continue
        nxt = min(followers, key=lambda p: (p.start_slot, p.event.id))
        if nxt.event.cognitive_load <= th.c_low:
            continue
        if nxt.start_slot >= high.end_slot + th.break_slots:
            continue
        out.append(Violation("pacing", (high.event.id, nxt.event.id)))
    return out


def sensitivity_violations(placements: Sequence[ScheduledEvent], emotion: EmotionState,
                           th: ConstraintThresholds) -> list[Violation]:
    """While distressed, every sensitive event is a violation."""
    if not _distressed(emotion, th):
        return []
    return [Violation("sensitivity", (p.event.id,))
            for p in placements if p.event.sensitive]


def all_violations(placements: Sequence[ScheduledEvent], problem: Problem) -> list[Violation]:
    """Every hard-constraint violation in a complete assignment."""
    out: list[Violation] = []
    ordered = sorted(placements, key=lambda p: p.event.id)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if not check_exclusivity(a, b):
                out.append(Violation("exclusivity", (a.event.id, b.event.id)))
            if not check_precedence(a, b):
                out.append(Violation("precedence", (a.event.id, b.event.id)))
            if not check_precedence(b, a):
                out.append(Violation("precedence", (b.event.id, a.event.id)))
    out.extend(pacing_violations(placements, problem.emotion, problem.thresholds))
    out.extend(sensitivity_violations(placements, problem.emotion, problem.thresholds))
    return out


# ── objective ───────────────────────────────────────────────────────

def _canonical(placements: Sequence[ScheduledEvent]) -> tuple[ScheduledEvent, ...]:
    return tuple(sorted(placements, key=lambda p: (p.start_slot, p.event.id)))


def objective_terms(placements: Sequence[ScheduledEvent], problem: Problem) -> dict[str, float]:
    """Raw (unweighted) objective terms for a non-empty assignment."""
    if isinstance(placements, Schedule):
        placements = placements.placements
    if not placements:
        raise EmptySchedule("cannot score an empty schedule")
    ordered = _canonical(placements)
    n_slots = slot_count(problem.horizon)

    first = min(p.start_slot for p in ordered)
    last = max(p.end_slot for p in ordered)
    covered = [False] * n_slots
    for p in ordered:
        for s in range(p.start_slot, p.end_slot):
            covered[s] = True
    idle = sum(1 for s in range(first, last) if not covered[s])
    f_temporal = idle / n_slots

    if len(ordered) > 1:
        pairs = [a.event.cognitive_load * b.event.cognitive_load
                 for a, b in zip(ordered, ordered[1:])]
        f_cognitive = sum(pairs) / len(pairs)
    else:
        f_cognitive = 0.0

    ready = readiness(problem.emotion)
    strains = [max(0.0, p.event.cognitive_load - ready) for p in ordered]
    f_emotional = sum(strains) / len(strains)

    terms = {"temporal": f_temporal, "cognitive": f_cognitive, "emotional": f_emotional}
    for ex in problem.weights.extras:
        terms[ex.name] = ex.scorer(ordered, problem)
    return terms


def evaluate_objective(placements: Sequence[ScheduledEvent] | Schedule,
                       problem: Problem) -> tuple[float, dict[str, float]]:
    """Weighted objective and its per-term breakdown.

    The breakdown holds weighted contributions, so its values sum to
    the objective.  Identical placements always produce bit-identical
    floats: terms are accumulated in one fixed order.
    """
    terms = objective_terms(placements, problem)
    w = problem.weights
    breakdown = {
        "temporal": w.alpha_temporal * terms["temporal"],
        "cognitive": w.alpha_cognitive * terms["cognitive"],
        "emotional": w.alpha_emotional * terms["emotional"],
    }
    objective = breakdown["temporal"] + breakdown["cognitive"] + breakdown["emotional"]
    for ex in w.extras:
        contribution = ex.weight * terms[ex.name]
        breakdown[ex.name] = contribution
        objective += contribution
    return objective, breakdown


# ── solvers ─────────────────────────────────────────────────────────

def _tie_key(placements: Sequence[ScheduledEvent]) -> tuple[int, ...]:
    """Start slots listed by ascending event id; smaller wins ties."""
    return tuple(p.start_slot for p in sorted(placements, key=lambda q: q.event.id))


def _start_domain(e: EventSpec, h: Horizon) -> list[int]:
    n = slot_count(h)
    dur = duration_slots(e, h.slot_minutes)
    lo = e.earliest if e.earliest is not None else 0
    hi = e.latest if e.latest is not None else n
    return [s for s in range(max(0, lo), min(hi, n - dur) + 1)]


def _pair_ok(a: ScheduledEvent, b: ScheduledEvent) -> bool:
    return check_exclusivity(a, b) and check_precedence(a, b) and check_precedence(b, a)


def _feasibility_prechecks(problem: Problem) -> dict[str, list[int]]:
    """Shared validation; returns per-event start domains or raises."""
    n_slots = slot_count(problem.horizon)
    need = sum(duration_slots(e, problem.horizon.slot_minutes)
               for e in problem.events if not e.multitask)
    if need > n_slots:
        raise Infeasible("total non-multitask duration exceeds the horizon",
                         {"required_slots": need, "slot_count": n_slots})
    if _distressed(problem.emotion, problem.thresholds):
        blocked = sorted(e.id for e in problem.events if e.sensitive)
        if blocked:
            raise Infeasible("sensitive events cannot be scheduled while distressed",
                             {"event_ids": blocked})
    domains: dict[str, list[int]] = {}
    for e in problem.events:
        dom = _start_domain(e, problem.horizon)
        if not dom:
            raise Infeasible("event cannot fit inside the horizon",
                             {"event_id": e.id, "slot_count": n_slots})
        domains[e.id] = dom
    return domains


@dataclass
class _Incumbent:
    objective: float = 0.0
    tie_key: tuple[int, ...] = ()
    placements: tuple[ScheduledEvent, ...] = ()
    breakdown: dict[str, float] = field(default_factory=dict)
    found: bool = False

    def offer(self, placements: tuple[ScheduledEvent, ...], problem: Problem) -> None:
        objective, breakdown = evaluate_objective(placements, problem)
        key = _tie_key(placements)
        if (not self.found or objective < self.objective
                or (objective == self.objective and key < self.tie_key)):
            self.objective, self.tie_key = objective, key
            self.placements, self.breakdown = placements, breakdown
            self.found = True

    def to_schedule(self) -> Schedule:
        return Schedule(placements=_canonical(self.placements),
                        objective=self.objective, breakdown=dict(self.breakdown))


def solve(problem: Problem) -> Schedule:
    """Branch-and-bound backtracking with forward checking on the
    pairwise constraints; pacing and sensitivity are enforced on
    complete assignments (pacing is not monotone under extension)."""
    domains = _feasibility_prechecks(problem)
    order = sorted(problem.events, key=lambda e: (-e.priority, e.id))
    horizon = problem.horizon
    best = _Incumbent()

    def extend(idx: int, placed: list[ScheduledEvent], doms: dict[str, list[int]]) -> None:
        if idx == len(order):
            placements = tuple(placed)
            if pacing_violations(placements, problem.emotion, problem.thresholds):
                return
            best.offer(placements, problem)
            return
        ev = order[idx]
        rest = order[idx + 1:]
        for s in doms[ev.id]:
            pl = place(ev, s, horizon)
            narrowed: dict[str, list[int]] = {}
            dead = False
            for fut in rest:
                keep = [t for t in doms[fut.id] if _pair_ok(pl, place(fut, t, horizon))]
                if not keep:
                    dead = True
                    break
                narrowed[fut.id] = keep
            if dead:
                continue
            placed.append(pl)
            extend(idx + 1, placed, {**doms, **narrowed})
            placed.pop()

    extend(0, [], domains)
    if not best.found:
        raise Infeasible("no feasible assignment",
                         {"event_ids": sorted(e.id for e in problem.events)})
    return best.to_schedule()


def brute_force_solve(problem: Problem, max_events: int = 7, max_slots: int = 20) -> Schedule:
    """Exhaustive oracle: enumerates every slot assignment, filters by
    the hard constraints and applies the same tie-breaking as
    ``solve``.  Guarded, because enumeration explodes quickly."""
    n_slots = slot_count(problem.horizon)
    if len(problem.events) > max_events or n_slots > max_slots:
        raise InstanceTooLarge("instance exceeds brute-force guard",
                               {"events": len(problem.events), "slot_count": n_slots,
                                "max_events": max_events, "max_slots": max_slots})
    domains = _feasibility_prechecks(problem)
    order = sorted(problem.events, key=lambda e: e.id)
    horizon = problem.horizon
    best = _Incumbent()

    def enumerate_from(idx: int, placed: list[ScheduledEvent]) -> None:
        if idx == len(order):
            placements = tuple(placed)
            if pacing_violations(placements, problem.emotion, problem.thresholds):
                return
            if sensitivity_violations(placements, problem.emotion, problem.thresholds):
                return
            best.offer(placements, problem)
            return
        ev = order[idx]
        for s in domains[ev.id]:
            pl = place(ev, s, horizon)
            # pairwise rules are monotone, so pruning here drops only
            # assignments that could never become feasible
            if all(_pair_ok(pl, q) for q in placed):
                placed.append(pl)
                enumerate_from(idx + 1, placed)
                placed.pop()

    enumerate_from(0, [])
    if not best.found:
        raise Infeasible("no feasible assignment",
                         {"event_ids": sorted(e.id for e in problem.events)})
    return best.to_schedule()


# ── documents ───────────────────────────────────────────────────────

def weights_to_doc(w: ObjectiveWeights) -> dict:
    return {"alpha_temporal": w.alpha_temporal, "alpha_cognitive": w.alpha_cognitive,
            "alpha_emotional": w.alpha_emotional}


def weights_from_doc(doc: dict) -> ObjectiveWeights:
    try:
        return ObjectiveWeights(
            alpha_temporal=float(doc.get("alpha_temporal", 1.0)),
            alpha_cognitive=float(doc.get("alpha_cognitive", 1.0)),
            alpha_emotional=float(doc.get("alpha_emotional", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad weights document: {exc}", {"doc": doc}) from exc


def thresholds_to_doc(th: ConstraintThresholds) -> dict:
    return {"t_stress": th.t_stress, "c_high": th.c_high, "c_low": th.c_low,
            "break_slots": th.break_slots}


def thresholds_from_doc(doc: dict) -> ConstraintThresholds:
    try:
        return ConstraintThresholds(
            t_stress=float(doc.get("t_stress", 0.7)),
            c_high=float(doc.get("c_high", 0.7)),
            c_low=float(doc.get("c_low", 0.3)),
            break_slots=int(doc.get("break_slots", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad thresholds document: {exc}", {"doc": doc}) from exc


def schedule_to_doc(s: Schedule) -> dict:
    from .domain import placement_to_doc
    doc: dict = {"objective": s.objective}
    for name, value in s.breakdown.items():
        doc[f"breakdown_{name}"] = value
    doc["placements"] = [placement_to_doc(p) for p in s.placements]
    return doc


def schedule_from_doc(doc: dict) -> Schedule:
    from .domain import placement_from_doc
    try:
        placements = tuple(placement_from_doc(d) for d in doc["placements"])
        breakdown = {k[len("breakdown_"):]: float(v)
                     for k, v in doc.items() if k.startswith("breakdown_")}
        return Schedule(placements=placements, objective=float(doc["objective"]),
                        breakdown=breakdown)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailed(f"bad schedule document: {exc}", {"doc": doc}) from exc

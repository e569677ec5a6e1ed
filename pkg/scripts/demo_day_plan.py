"""Plan one working day under a calm and a stressed mood, side by side.

Shows how the pacing and sensitivity constraints reshape a schedule
when arousal crosses the stress threshold.  Run from the repo root:

    python3 scripts/demo_day_plan.py
    python3 scripts/demo_day_plan.py --arousal 0.9 --valence 0.3
"""

from __future__ import annotations

import argparse

from moodcal.domain import (
    EmotionState,
    EventSpec,
    Horizon,
    duration_slots,
    format_wall_clock,
)
from moodcal.errors import Infeasible
from moodcal.scheduling import Problem, solve

EVENTS = (
    EventSpec(id="review", name="code review", duration_min=60,
              priority=0.9, cognitive_load=0.8),
    EventSpec(id="plan", name="quarter planning", duration_min=90,
              priority=0.8, cognitive_load=0.9, sensitive=True),
    EventSpec(id="mail", name="inbox sweep", duration_min=30,
              priority=0.3, cognitive_load=0.2),
    EventSpec(id="walk", name="walk outside", duration_min=30,
              priority=0.2, cognitive_load=0.1),
    EventSpec(id="sync", name="team sync", duration_min=30,
              priority=0.6, cognitive_load=0.5),
)


def show(tag: str, emotion: EmotionState, horizon: Horizon) -> None:
    problem = Problem(events=EVENTS, horizon=horizon, emotion=emotion)
    print(f"--- {tag} (valence {emotion.valence:.1f}, "
          f"arousal {emotion.arousal:.1f}) ---")
    try:
        schedule = solve(problem)
    except Infeasible as exc:
        print(f"infeasible: {exc}")
        if "sensitive" in str(exc):
            print("(drop or defuse the sensitive event to get a plan)")
        print()
        return
    for p in sorted(schedule.placements, key=lambda p: (p.start_slot, p.event.id)):
        start = horizon.day_start + p.start_slot * horizon.slot_minutes
        end = start + duration_slots(p.event, horizon.slot_minutes) * horizon.slot_minutes
        print(f"  {format_wall_clock(start)}-{format_wall_clock(end)}  "
              f"{p.event.name}")
    print(f"  objective {schedule.objective:.4f}  "
          + "  ".join(f"{k} {v:.4f}" for k, v in sorted(schedule.breakdown.items())))
    print()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--valence", type=float, default=0.3)
    ap.add_argument("--arousal", type=float, default=0.85)
    ap.add_argument("--dominance", type=float, default=0.4)
    args = ap.parse_args()

    horizon = Horizon()
    show("calm afternoon", EmotionState(0.7, 0.3, 0.6), horizon)
    show("stressed", EmotionState(args.valence, args.arousal, args.dominance),
         horizon)
    # same stress level but positive valence: sensitive events stay allowed
    show("keyed up but upbeat", EmotionState(0.8, args.arousal, 0.6), horizon)


if __name__ == "__main__":
    main()

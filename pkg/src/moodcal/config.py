"""Flat key=value service configuration.

One setting per line, ``#`` comments and blank lines ignored.  Keys
cover the objective weights, constraint thresholds, day horizon, and
the inference model locations:

    alpha_temporal=1.0
    t_stress=0.7
    day_start=09:00
    day_end=18:00
    slot_minutes=30
    model_dir=models/
    behavior_model=bundle.json
    class_vad_3=0.2,0.8,0.4
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .domain import Horizon, parse_wall_clock
from .errors import ValidationFailed
from .scheduling import ConstraintThresholds, ObjectiveWeights
from .store import SchedulingConfig

_WEIGHT_KEYS = ("alpha_temporal", "alpha_cognitive", "alpha_emotional")
_THRESHOLD_KEYS = ("t_stress", "c_high", "c_low", "break_slots")
_HORIZON_KEYS = ("day_start", "day_end", "slot_minutes")
_PATH_KEYS = ("model_dir", "behavior_model")


@dataclass(frozen=True)
class ServiceConfig:
    scheduling: SchedulingConfig = SchedulingConfig()
    model_dir: str | None = None
    behavior_model: str | None = None
    class_vad: dict[int, tuple[float, float, float]] = field(default_factory=dict)


DEFAULT_SERVICE_CONFIG = ServiceConfig()


def _parse_vad(value: str, key: str) -> tuple[float, float, float]:
    parts = value.split(",")
    if len(parts) != 3:
        raise ValidationFailed("class VAD needs three comma-separated values",
                               {"key": key, "value": value})
    return tuple(float(p) for p in parts)


def parse_config_text(text: str) -> ServiceConfig:
    weights = {}
    thresholds = {}
    horizon = {}
    paths: dict[str, str] = {}
    class_vad: dict[int, tuple[float, float, float]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationFailed("expected key=value",
                                   {"line": lineno, "text": line})
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in _WEIGHT_KEYS:
                weights[key] = float(value)
            elif key == "break_slots":
                thresholds[key] = int(value)
            elif key in _THRESHOLD_KEYS:
                thresholds[key] = float(value)
            elif key in ("day_start", "day_end"):
                horizon[key] = parse_wall_clock(value)
            elif key == "slot_minutes":
                horizon[key] = int(value)
            elif key in _PATH_KEYS:
                paths[key] = value
            elif key.startswith("class_vad_"):
                class_vad[int(key[len("class_vad_"):])] = _parse_vad(value, key)
            else:
                raise ValidationFailed("unknown configuration key",
                                       {"line": lineno, "key": key})
        except ValueError as exc:
            raise ValidationFailed("unparsable configuration value",
                                   {"line": lineno, "key": key,
                                    "reason": str(exc)}) from exc
    scheduling = SchedulingConfig(
        weights=replace(ObjectiveWeights(), **weights),
        thresholds=replace(ConstraintThresholds(), **thresholds),
        horizon=replace(Horizon(), **horizon),
    )
    return ServiceConfig(scheduling=scheduling,
                         model_dir=paths.get("model_dir"),
                         behavior_model=paths.get("behavior_model"),
                         class_vad=class_vad)


def load_config(path) -> ServiceConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationFailed("unreadable configuration file",
                               {"path": str(path), "reason": str(exc)}) from exc
    return parse_config_text(text)

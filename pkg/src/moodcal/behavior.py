"""Computer-activity emotion classification.

Interaction logs (mouse moves, clicks, key presses) arrive as rows
tagged with twelve mood-intensity scores.  The pipeline here splits a
log into six per-kind feature tables, labels each row by its dominant
mood, rebalances rare moods with SMOTE, and trains the classical
classifiers from :mod:`.classifiers` on each table.  A synthetic-log
generator plants a known feature-to-mood mapping so the whole chain
can be scored against ground truth.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .classifiers import (
    LabeledTable,
    evaluate,
    model_from_doc,
    model_to_doc,
    split_indices,
    subset,
    train_bayes,
    train_forest,
    train_linear,
    train_tree,
)
from .errors import ClassTooSmall, EmptyTable, MalformedEvent, ValidationFailed

N_CLASSES = 12

MOUSE_MOVE = "MouseMovement"
MOUSE_CLICK = "MouseClick"
MOUSE_UP = "MouseButtonUp"
MOUSE_DOWN = "MouseButtonDown"
KEY_PRESSED = "KeyPressed"
KEY_RELEASED = "KeyReleased"

KINDS = (MOUSE_MOVE, MOUSE_CLICK, MOUSE_UP, MOUSE_DOWN, KEY_PRESSED, KEY_RELEASED)
BUTTON_KINDS = (MOUSE_CLICK, MOUSE_UP, MOUSE_DOWN)
KEY_KINDS = (KEY_PRESSED, KEY_RELEASED)

FEATURES_BY_KIND = {
    MOUSE_MOVE: ("x", "y"),
    MOUSE_CLICK: ("button", "x", "y"),
    MOUSE_UP: ("button", "x", "y"),
    MOUSE_DOWN: ("button", "x", "y"),
    KEY_PRESSED: ("alt", "control", "shift", "meta", "key_id", "repeat"),
    KEY_RELEASED: ("alt", "control", "shift", "meta", "key_id", "repeat"),
}

METHODS = ("tree", "forest", "logistic", "bayes")

# Rebalancing targets: the two high-volume kinds get deep tables, the
# rest a lighter quota.
DEFAULT_TARGETS = {
    MOUSE_MOVE: 5000,
    KEY_RELEASED: 5000,
    MOUSE_CLICK: 500,
    MOUSE_UP: 500,
    MOUSE_DOWN: 500,
    KEY_PRESSED: 500,
}


@dataclass(frozen=True)
class ActivityEvent:
    """One interaction-log row.  Field presence depends on ``kind``;
    ``validate_event`` enforces that, construction only checks the
    kind itself and the intensity vector."""

    kind: str
    intensities: tuple[float, ...]
    x: int | None = None
    y: int | None = None
    button: int | None = None
    alt: bool | None = None
    control: bool | None = None
    shift: bool | None = None
    meta: bool | None = None
    key: str | None = None
    repeat: bool | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedEvent("unknown event kind", {"kind": self.kind})
        vals = tuple(float(v) for v in self.intensities)
        if len(vals) != N_CLASSES:
            raise MalformedEvent("intensities must have exactly 12 entries",
                                 {"got": len(vals)})
        if any(not 0.0 <= v <= 100.0 for v in vals):
            raise MalformedEvent("intensities must lie in [0, 100]")
        object.__setattr__(self, "intensities", vals)


def validate_event(e: ActivityEvent) -> None:
    """Raise MalformedEvent when fields required by the kind are absent."""
    if e.kind == MOUSE_MOVE:
        required = ("x", "y")
    elif e.kind in BUTTON_KINDS:
        required = ("button", "x", "y")
    else:
        required = ("alt", "control", "shift", "meta", "key", "repeat")
    missing = [name for name in required if getattr(e, name) is None]
    if missing:
        raise MalformedEvent(f"{e.kind} event is missing required fields",
                             {"missing": missing})


def label_row(e: ActivityEvent) -> int:
    """Dominant mood: argmax over the 12 intensities, ties to the
    lowest index (an all-zero vector therefore labels as class 0)."""
    best = 0
    for i in range(1, N_CLASSES):
        if e.intensities[i] > e.intensities[best]:
            best = i
    return best


@dataclass(frozen=True)
class PartitionResult:
    tables: dict[str, LabeledTable]
    key_ids: dict[str, int]  # key text -> integer id, first-seen order


def _event_features(e: ActivityEvent, key_ids: dict[str, int]) -> list[float]:
    if e.kind == MOUSE_MOVE:
        return [float(e.x), float(e.y)]
    if e.kind in BUTTON_KINDS:
        return [float(e.button), float(e.x), float(e.y)]
    if e.key not in key_ids:
        key_ids[e.key] = len(key_ids)
    return [float(e.alt), float(e.control), float(e.shift), float(e.meta),
            float(key_ids[e.key]), float(e.repeat)]


def partition(events: Sequence[ActivityEvent],
              key_ids: dict[str, int] | None = None) -> PartitionResult:
    """Split a log into the six per-kind tables.

    Key text is mapped to integer ids in first-seen order across both
    key kinds; pass a persisted ``key_ids`` mapping to reuse a
    training-time table (unseen keys extend the copy)."""
    if not events:
        raise ValidationFailed("no events to partition")
    ids = dict(key_ids) if key_ids else {}
    rows: dict[str, list[list[float]]] = {k: [] for k in KINDS}
    labels: dict[str, list[int]] = {k: [] for k in KINDS}
    for e in events:
        validate_event(e)
        rows[e.kind].append(_event_features(e, ids))
        labels[e.kind].append(label_row(e))
    tables = {}
    for kind in KINDS:
        names = FEATURES_BY_KIND[kind]
        matrix = (np.asarray(rows[kind], dtype=np.float64)
                  if rows[kind] else np.empty((0, len(names))))
        tables[kind] = LabeledTable(rows=matrix,
                                    labels=np.asarray(labels[kind], dtype=np.int64),
                                    feature_names=names)
    return PartitionResult(tables=tables, key_ids=ids)


# ── SMOTE rebalancing ───────────────────────────────────────────────

def smote(table: LabeledTable, target_per_class: int, k: int = 5,
          seed: int = 0) -> LabeledTable:
    """Top up every class below the target with synthetic rows
    interpolated toward one of the k nearest same-class neighbours:
    x_new = x + u * (x_nn - x), u uniform in [0, 1].  Classes at or
    above the target stay untouched; originals are preserved verbatim
    and synthetics are appended, classes in ascending order."""
    if len(table) == 0:
        raise EmptyTable("cannot rebalance an empty table")
    if target_per_class < 1:
        raise ValidationFailed("target per class must be positive",
                               {"target": target_per_class})
    if k < 1:
        raise ValidationFailed("k must be at least 1", {"k": k})
    counts = np.bincount(table.labels, minlength=N_CLASSES)
    present = np.flatnonzero(counts)
    small = [int(c) for c in present if counts[c] < 2]
    if small:
        raise ClassTooSmall("every present class needs at least two rows",
                            {"classes": small})
    rng = np.random.default_rng(seed)
    new_rows: list[np.ndarray] = []
    new_labels: list[int] = []
    for c in present:  # ascending class order fixes the rng draw order
        need = target_per_class - int(counts[c])
        if need <= 0:
            continue
        own = table.rows[table.labels == c]
        k_eff = min(k, len(own) - 1)
        neighbour_cache: dict[int, np.ndarray] = {}
        for _ in range(need):
            base = int(rng.integers(len(own)))
            if base not in neighbour_cache:
                d = np.linalg.norm(own - own[base], axis=1)
                order = np.argsort(d, kind="stable")
                neighbour_cache[base] = order[order != base][:k_eff]
            nb = own[neighbour_cache[base][int(rng.integers(k_eff))]]
            u = rng.random()
            new_rows.append(own[base] + u * (nb - own[base]))
            new_labels.append(int(c))
    if not new_rows:
        return table
    rows = np.concatenate([table.rows, np.stack(new_rows)])
    labels = np.concatenate([table.labels, np.asarray(new_labels, dtype=np.int64)])
    return LabeledTable(rows=rows, labels=labels, feature_names=table.feature_names)


# ── synthetic log generator ─────────────────────────────────────────

SCREEN_W = 1920
SCREEN_H = 1080
GRID_COLS = 4
GRID_ROWS = 3
_CELL_W = SCREEN_W // GRID_COLS
_CELL_H = SCREEN_H // GRID_ROWS
_KEY_ALPHABET = "abcdefghijklmnopqrstuvwxyz"

# events per mood per session
_MOVES_PER_MOOD = 3


def _mood_cell(mood: int) -> tuple[int, int]:
    return mood % GRID_COLS, mood // GRID_COLS


def _planted_intensities(mood: int, rng: np.random.Generator) -> tuple[float, ...]:
    vals = rng.uniform(0.0, 40.0, N_CLASSES)
    vals[mood] = rng.uniform(60.0, 100.0)
    return tuple(float(v) for v in vals)


def generate_activity_log(sessions: int, seed: int = 0) -> list[ActivityEvent]:
    """Synthetic log with a planted feature-to-mood mapping.

    Each mood owns one cell of a 4 x 3 screen grid (cursor positions
    land inside it), a button id (mood mod 3), a modifier pattern (the
    mood's low bits), and two dedicated letter keys.  The mood's own
    intensity is drawn from [60, 100] and the others from [0, 40], so
    the planted label always wins the argmax."""
    if sessions < 1:
        raise ValidationFailed("sessions must be positive", {"sessions": sessions})
    rng = np.random.default_rng(seed)
    events: list[ActivityEvent] = []
    for _ in range(sessions):
        batch: list[ActivityEvent] = []
        for mood in range(N_CLASSES):
            col, row = _mood_cell(mood)
            xs = rng.integers(col * _CELL_W, (col + 1) * _CELL_W, _MOVES_PER_MOOD + 3)
            ys = rng.integers(row * _CELL_H, (row + 1) * _CELL_H, _MOVES_PER_MOOD + 3)
            for i in range(_MOVES_PER_MOOD):
                batch.append(ActivityEvent(kind=MOUSE_MOVE, x=int(xs[i]), y=int(ys[i]),
                                           intensities=_planted_intensities(mood, rng)))
            for i, kind in enumerate(BUTTON_KINDS):
                batch.append(ActivityEvent(kind=kind, button=mood % 3,
                                           x=int(xs[_MOVES_PER_MOOD + i]),
                                           y=int(ys[_MOVES_PER_MOOD + i]),
                                           intensities=_planted_intensities(mood, rng)))
            for kind in KEY_KINDS:
                key = _KEY_ALPHABET[2 * mood + int(rng.integers(2))]
                batch.append(ActivityEvent(
                    kind=kind, key=key,
                    alt=bool(mood & 1), control=bool(mood & 2),
                    shift=bool(mood & 4), meta=bool(mood & 8),
                    repeat=False,
                    intensities=_planted_intensities(mood, rng)))
        perm = rng.permutation(len(batch))
        events.extend(batch[i] for i in perm)
    return events


# ── log file format ─────────────────────────────────────────────────

_CSV_FIELDS = ("kind", "x", "y", "button", "alt", "control", "shift", "meta",
               "key", "repeat") + tuple(f"intensity_{i}" for i in range(N_CLASSES))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_activity_log(path, events: Iterable[ActivityEvent]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for e in events:
            row = [_cell(getattr(e, name)) for name in _CSV_FIELDS[:10]]
            row.extend(_cell(v) for v in e.intensities)
            writer.writerow(row)


def _parse_bool(text: str, path, line: int) -> bool:
    if text == "TRUE":
        return True
    if text == "FALSE":
        return False
    raise MalformedEvent("boolean cells must be TRUE or FALSE",
                         {"path": str(path), "line": line, "got": text})


def load_activity_log(path) -> list[ActivityEvent]:
    path = Path(path)
    events: list[ActivityEvent] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != _CSV_FIELDS:
            raise MalformedEvent("unexpected activity-log header", {"path": str(path)})
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(_CSV_FIELDS):
                raise MalformedEvent("wrong cell count",
                                     {"path": str(path), "line": line})
            named = dict(zip(_CSV_FIELDS, row))
            try:
                event = ActivityEvent(
                    kind=named["kind"],
                    x=int(named["x"]) if named["x"] else None,
                    y=int(named["y"]) if named["y"] else None,
                    button=int(named["button"]) if named["button"] else None,
                    alt=_parse_bool(named["alt"], path, line) if named["alt"] else None,
                    control=_parse_bool(named["control"], path, line) if named["control"] else None,
                    shift=_parse_bool(named["shift"], path, line) if named["shift"] else None,
                    meta=_parse_bool(named["meta"], path, line) if named["meta"] else None,
                    key=named["key"] or None,
                    repeat=_parse_bool(named["repeat"], path, line) if named["repeat"] else None,
                    intensities=tuple(float(named[f"intensity_{i}"])
                                      for i in range(N_CLASSES)),
                )
            except ValueError as exc:
                raise MalformedEvent("unparsable cell",
                                     {"path": str(path), "line": line,
                                      "reason": str(exc)}) from exc
            validate_event(event)
            events.append(event)
    if not events:
        raise ValidationFailed("activity log holds no events", {"path": str(path)})
    return events


# ── training, evaluation grid, persisted bundles ────────────────────

def train_method(table: LabeledTable, method: str, seed: int = 0):
    """Train one model family with its default hyperparameters."""
    if method == "tree":
        return train_tree(table, max_depth=12, min_leaf=1, seed=seed)
    if method == "forest":
        return train_forest(table, n_trees=15, max_depth=12, seed=seed)
    if method == "logistic":
        return train_linear(table, epochs=300, lr=0.1, seed=seed)
    if method == "bayes":
        return train_bayes(table)
    raise ValidationFailed("unknown method", {"method": method, "known": list(METHODS)})


def _prepared_table(tables: dict[str, LabeledTable], kind: str,
                    targets: dict[str, int], k: int, seed: int) -> LabeledTable | None:
    table = tables[kind]
    if len(table) == 0 or len(np.unique(table.labels)) < 2:
        return None
    return smote(table, targets.get(kind, 500), k=k, seed=seed)


def accuracy_grid(events: Sequence[ActivityEvent],
                  methods: Sequence[str] = METHODS,
                  split: float = 0.8, seed: int = 0,
                  targets: dict[str, int] | None = None,
                  k: int = 5) -> dict[str, dict[str, float | None]]:
    """Held-out accuracy for every method on every sub-dataset.

    Each kind's table is rebalanced once, split once, and shared by
    all methods; cells are None where a kind has no usable data."""
    targets = dict(DEFAULT_TARGETS if targets is None else targets)
    part = partition(events)
    prepared = {kind: _prepared_table(part.tables, kind, targets, k, seed)
                for kind in KINDS}
    grid: dict[str, dict[str, float | None]] = {}
    for method in methods:
        grid[method] = {}
        for kind in KINDS:
            table = prepared[kind]
            if table is None:
                grid[method][kind] = None
                continue
            train_idx, _ = split_indices(len(table), split, seed)
            model = train_method(subset(table, train_idx), method, seed=seed)
            grid[method][kind] = evaluate(model, table, split=split, seed=seed).overall
    return grid


def format_grid(grid: dict[str, dict[str, float | None]]) -> str:
    """Render the method x sub-dataset grid as an aligned text table
    with percentage cells."""
    methods = list(grid)
    width = max(len(k) for k in KINDS) + 2
    name_w = max(len("method"), max(len(m) for m in methods)) + 2
    lines = ["method".ljust(name_w) + "".join(k.rjust(width) for k in KINDS)]
    for method in methods:
        cells = []
        for kind in KINDS:
            value = grid[method][kind]
            cells.append(("-" if value is None else f"{100.0 * value:.2f}%").rjust(width))
        lines.append(method.ljust(name_w) + "".join(cells))
    return "\n".join(lines)


def train_bundle(events: Sequence[ActivityEvent], method: str = "tree",
                 split: float = 0.8, seed: int = 0,
                 targets: dict[str, int] | None = None,
                 k: int = 5) -> dict[str, Any]:
    """Train one model per usable kind and pack everything needed for
    later inference (including the key-id table) into a JSON-safe doc."""
    targets = dict(DEFAULT_TARGETS if targets is None else targets)
    part = partition(events)
    models: dict[str, Any] = {}
    for kind in KINDS:
        table = _prepared_table(part.tables, kind, targets, k, seed)
        if table is None:
            continue
        train_idx, _ = split_indices(len(table), split, seed)
        models[kind] = model_to_doc(train_method(subset(table, train_idx), method, seed=seed))
    if not models:
        raise ValidationFailed("no sub-dataset had enough data to train on")
    return {"method": method, "split": split, "seed": seed,
            "key_ids": dict(part.key_ids), "models": models}


def save_model_bundle(path, bundle: dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(bundle, indent=1) + "\n")


def load_model_bundle(path) -> dict[str, Any]:
    path = Path(path)
    try:
        bundle = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationFailed("unreadable model bundle",
                               {"path": str(path), "reason": str(exc)}) from exc
    for field_name in ("method", "key_ids", "models"):
        if field_name not in bundle:
            raise ValidationFailed("model bundle is missing a field",
                                   {"path": str(path), "field": field_name})
    return bundle


def classify_events(events: Sequence[ActivityEvent], bundle: dict[str, Any]) -> int:
    """Majority class over per-event predictions from the bundle's
    models; ties go to the lowest class index."""
    part = partition(events, key_ids={k: int(v) for k, v in bundle["key_ids"].items()})
    votes = np.zeros(N_CLASSES, dtype=np.int64)
    for kind, doc in bundle["models"].items():
        table = part.tables.get(kind)
        if table is None or len(table) == 0:
            continue
        model = model_from_doc(doc)
        for c in model.predict(table.rows):
            if 0 <= c < N_CLASSES:
                votes[c] += 1
    if votes.sum() == 0:
        raise ValidationFailed("no events matched the bundled models")
    return int(np.argmax(votes))

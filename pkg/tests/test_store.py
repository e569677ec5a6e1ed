"""Event-sourced store: fold, journal, replay equality, routing."""

from __future__ import annotations

import json
import threading

import numpy as np
import pytest

from conftest import random_store_op
from moodcal.behavior import generate_activity_log, save_activity_log, save_model_bundle, train_bundle
from moodcal.domain import EmotionSource, EmotionState, Horizon, quantize_ts
from moodcal.ecg import generate_synthetic_ecg, save_recording
from moodcal.errors import (
    CorruptLog,
    Infeasible,
    ModelMissing,
    NoEvents,
    NotFound,
    ValidationFailed,
)
from moodcal.scheduling import ConstraintThresholds
from moodcal.seqnet import init_model, save_model
from moodcal.store import (
    DEFAULT_APP_STATE,
    CalendarStore,
    Journal,
    LogEntry,
    SchedulingConfig,
    apply_entry,
    emotion_from_activity_log,
    emotion_from_hr_file,
    replay,
    state_from_doc,
    state_to_doc,
)

EVENT = {"id": "a", "name": "deep work", "duration_min": 60}


def entry(seq, kind, payload):
    return LogEntry(seq=seq, kind=kind, at=0.0, payload=payload)


def added(seq, doc, counter=1):
    return entry(seq, "event_added", {"event": {"priority": 0.5, **doc},
                                      "next_event_seq": counter})


# ── apply_entry and replay ──────────────────────────────────────────

def test_apply_add_then_remove():
    state = apply_entry(DEFAULT_APP_STATE, added(1, EVENT))
    assert [e.id for e in state.events] == ["a"]
    state = apply_entry(state, entry(2, "event_removed", {"id": "a"}))
    assert state.events == ()


def test_apply_remove_of_unknown_id_is_corrupt():
    with pytest.raises(CorruptLog):
        apply_entry(DEFAULT_APP_STATE, entry(1, "event_removed", {"id": "nope"}))


def test_apply_unknown_kind_is_corrupt():
    with pytest.raises(CorruptLog):
        apply_entry(DEFAULT_APP_STATE, entry(1, "event_renamed", {}))


def test_replay_empty_log_is_default_state():
    assert replay([]) == DEFAULT_APP_STATE


def test_replay_add_remove_add_keeps_one_event():
    lines = [
        added(1, {"id": "a", "duration_min": 30}).to_json_line(),
        entry(2, "event_removed", {"id": "a"}).to_json_line(),
        added(3, {"id": "b", "duration_min": 30}, counter=2).to_json_line(),
    ]
    state = replay(lines)
    assert [e.id for e in state.events] == ["b"]
    assert state.next_event_seq == 2


def test_replay_reports_gap_seq():
    lines = [added(1, EVENT).to_json_line(), added(3, EVENT).to_json_line()]
    with pytest.raises(CorruptLog) as err:
        replay(lines)
    assert err.value.details["expected_seq"] == 2


def test_replay_reports_truncated_line_seq():
    good = added(1, EVENT).to_json_line()
    with pytest.raises(CorruptLog) as err:
        replay([good, good[: len(good) // 2]])
    assert err.value.details["expected_seq"] == 2


def test_state_doc_round_trip():
    store = CalendarStore()
    store.add_event(dict(EVENT))
    store.set_emotion(EmotionState(0.9, 0.2, 0.8, at=quantize_ts(123.456789),
                                   source=EmotionSource.MANUAL))
    store.solve()
    state = store.state
    assert state_from_doc(json.loads(json.dumps(state_to_doc(state)))) == state


# ── store mutations ─────────────────────────────────────────────────

def test_generated_ids_count_up():
    store = CalendarStore()
    assert store.add_event({"name": "a", "duration_min": 30}) == "e1"
    assert store.add_event({"name": "b", "duration_min": 30}) == "e2"


def test_generated_id_skips_client_claimed_name():
    store = CalendarStore()
    store.add_event({"id": "e1", "name": "mine", "duration_min": 30})
    assert store.add_event({"name": "auto", "duration_min": 30}) == "e2"
    store.add_event({"id": "e3", "duration_min": 30})
    assert store.add_event({"name": "auto2", "duration_min": 30}) == "e4"


def test_duplicate_client_id_rejected():
    store = CalendarStore()
    store.add_event(dict(EVENT))
    with pytest.raises(ValidationFailed):
        store.add_event(dict(EVENT))
    assert len(store.state.events) == 1


def test_invalid_event_rejected_without_log_entry(tmp_path):
    store = CalendarStore(journal=Journal(tmp_path / "j.log"))
    with pytest.raises(ValidationFailed):
        store.add_event({"id": "z", "duration_min": 0})
    assert not (tmp_path / "j.log").exists()
    assert store.state == DEFAULT_APP_STATE


def test_remove_twice_is_not_found():
    store = CalendarStore()
    store.add_event(dict(EVENT))
    store.remove_event("a")
    with pytest.raises(NotFound):
        store.remove_event("a")


def test_solve_requires_events_and_persists_schedule():
    store = CalendarStore()
    with pytest.raises(NoEvents):
        store.solve()
    store.add_event({"id": "a", "duration_min": 60})
    store.add_event({"id": "b", "duration_min": 30})
    schedule = store.solve()
    assert store.state.schedule == schedule
    assert {p.event.id for p in schedule.placements} == {"a", "b"}


def test_failed_solve_changes_nothing(tmp_path):
    journal = Journal(tmp_path / "j.log")
    store = CalendarStore(journal=journal)
    # 10 h of work in a 9 h day
    store.add_event({"id": "big", "duration_min": 600})
    before = store.state
    lines_before = (tmp_path / "j.log").read_text().count("\n")
    with pytest.raises(Infeasible):
        store.solve()
    assert store.state is before
    assert (tmp_path / "j.log").read_text().count("\n") == lines_before


def test_solve_twice_identical():
    store = CalendarStore()
    store.add_event({"id": "a", "duration_min": 60, "priority": 0.9})
    store.add_event({"id": "b", "duration_min": 60, "priority": 0.1})
    assert store.solve() == store.solve()


def test_set_config_applies():
    store = CalendarStore()
    cfg = SchedulingConfig(thresholds=ConstraintThresholds(t_stress=0.5))
    store.set_config(cfg)
    assert store.state.config == cfg


def test_every_successful_mutation_appends_one_entry(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path))
    store.add_event({"id": "a", "duration_min": 30})
    store.set_emotion(EmotionState(0.5, 0.5, 0.5))
    store.solve()
    store.remove_event("a")
    assert len(path.read_text().splitlines()) == 4


# ── journal files ───────────────────────────────────────────────────

def run_ops(store, n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        random_store_op(store, rng)


def test_journal_reload_equals_live(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path))
    run_ops(store, 40, seed=0)
    reloaded = CalendarStore(journal=Journal(path))
    assert reloaded.state == store.state
    assert reloaded.next_seq == store.next_seq


def test_snapshot_written_and_log_untruncated(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path, snapshot_every=5))
    for i in range(12):
        store.add_event({"name": f"t{i}", "duration_min": 30, "multitask": True})
    assert (tmp_path / "j.log.snapshot").exists()
    lines = path.read_text().splitlines()
    assert len(lines) == 12  # snapshots never eat log lines
    snap = json.loads((tmp_path / "j.log.snapshot").read_text())
    assert snap["seq"] == 10
    reloaded = CalendarStore(journal=Journal(path, snapshot_every=5))
    assert reloaded.state == store.state
    # snapshot state equals folding the log prefix
    assert state_from_doc(snap["state"]) == replay(lines[:10])


def test_snapshot_only_load_path_matches_full_fold(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path, snapshot_every=3))
    run_ops(store, 25, seed=4)
    assert replay(path.read_text().splitlines()) == store.state
    assert CalendarStore(journal=Journal(path)).state == store.state


def test_damaged_snapshot_is_ignored(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path, snapshot_every=2))
    for i in range(4):
        store.add_event({"name": f"t{i}", "duration_min": 30})
    (tmp_path / "j.log.snapshot").write_text("{ not json")
    assert CalendarStore(journal=Journal(path)).state == store.state


def test_log_shorter_than_snapshot_is_corrupt(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path, snapshot_every=2))
    for i in range(4):
        store.add_event({"name": f"t{i}", "duration_min": 30})
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:1]) + "\n")
    with pytest.raises(CorruptLog):
        Journal(path).load()


def test_replay_equals_live_over_random_sequences(tmp_path):
    for seed in range(30):
        path = tmp_path / f"j{seed}.log"
        store = CalendarStore(journal=Journal(path))
        rng = np.random.default_rng(seed)
        for _ in range(int(rng.integers(3, 15))):
            random_store_op(store, rng)
        if path.exists():
            assert replay(path.read_text().splitlines()) == store.state


def test_concurrent_mutations_keep_log_contiguous(tmp_path):
    path = tmp_path / "j.log"
    store = CalendarStore(journal=Journal(path))
    errors = []

    def hammer(seed):
        try:
            run_ops(store, 25, seed)
        except Exception as exc:  # noqa: BLE001 - fail the test with context
            errors.append(exc)

    threads = [threading.Thread(target=hammer, args=(s,)) for s in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    lines = path.read_text().splitlines()
    seqs = [json.loads(ln)["seq"] for ln in lines]
    assert seqs == list(range(1, len(lines) + 1))
    assert replay(lines) == store.state


# ── emotion ingestion routes ────────────────────────────────────────

def biased_model(high: bool, window: int = 6):
    """Zero-weight net with a bias on one output: a constant verdict."""
    model = init_model("gru", input_size=1, hidden_size=2, dropout_rate=0.0)
    for key in model.weights:
        model.weights[key] = np.zeros_like(model.weights[key])
    model.weights["b_out"][1 if high else 0] = 10.0
    model.window_size = window
    return model


@pytest.fixture()
def hr_file(tmp_path):
    rec, _ = generate_synthetic_ecg([70.0] * 20, seed=0)
    path = tmp_path / "rest.ecg"
    save_recording(path, rec)
    return path


def test_hr_route_needs_all_three_models(tmp_path, hr_file):
    with pytest.raises(ModelMissing):
        emotion_from_hr_file(hr_file, None, at=0.0)
    model_dir = tmp_path / "models"
    model_dir.mkdir()
    save_model(model_dir / "valence.model", biased_model(True))
    save_model(model_dir / "arousal.model", biased_model(True))
    with pytest.raises(ModelMissing) as err:
        emotion_from_hr_file(hr_file, model_dir, at=0.0)
    assert "dominance" in err.value.details["path"]


def test_hr_route_maps_verdicts_to_quarters(tmp_path, hr_file):
    model_dir = tmp_path / "models"
    model_dir.mkdir()
    save_model(model_dir / "valence.model", biased_model(True))
    save_model(model_dir / "arousal.model", biased_model(False))
    save_model(model_dir / "dominance.model", biased_model(True))
    emotion = emotion_from_hr_file(hr_file, model_dir, at=5.0)
    assert (emotion.valence, emotion.arousal, emotion.dominance) == (0.75, 0.25, 0.75)
    assert emotion.source is EmotionSource.BIOMETRIC
    assert emotion.at == 5.0


def test_hr_route_all_high_gives_three_quarters(tmp_path, hr_file):
    model_dir = tmp_path / "models"
    model_dir.mkdir()
    for dim in ("valence", "arousal", "dominance"):
        save_model(model_dir / f"{dim}.model", biased_model(True))
    emotion = emotion_from_hr_file(hr_file, model_dir, at=0.0)
    assert (emotion.valence, emotion.arousal, emotion.dominance) == (0.75, 0.75, 0.75)


SMALL_TARGETS = {k: 30 for k in ("MouseMovement", "MouseClick", "MouseButtonUp",
                                 "MouseButtonDown", "KeyPressed", "KeyReleased")}


def test_activity_route_classifies_and_maps(tmp_path):
    bundle = train_bundle(generate_activity_log(sessions=3, seed=0),
                          method="tree", targets=SMALL_TARGETS)
    bundle_path = tmp_path / "bundle.json"
    save_model_bundle(bundle_path, bundle)
    mood7 = [e for e in generate_activity_log(sessions=1, seed=5)
             if np.argmax(e.intensities) == 7]
    log_path = tmp_path / "var.csv"
    save_activity_log(log_path, mood7)
    table = {7: (0.2, 0.9, 0.3)}
    emotion = emotion_from_activity_log(log_path, bundle_path, table, at=1.0)
    assert (emotion.valence, emotion.arousal, emotion.dominance) == (0.2, 0.9, 0.3)
    assert emotion.source is EmotionSource.BEHAVIORAL
    # unmapped class falls back to neutral
    neutral = emotion_from_activity_log(log_path, bundle_path, {}, at=1.0)
    assert (neutral.valence, neutral.arousal, neutral.dominance) == (0.5, 0.5, 0.5)


def test_activity_route_without_bundle_is_model_missing(tmp_path):
    log_path = tmp_path / "log.csv"
    save_activity_log(log_path, generate_activity_log(sessions=1, seed=0))
    with pytest.raises(ModelMissing):
        emotion_from_activity_log(log_path, None, {}, at=0.0)
    with pytest.raises(ModelMissing):
        emotion_from_activity_log(log_path, tmp_path / "gone.json", {}, at=0.0)

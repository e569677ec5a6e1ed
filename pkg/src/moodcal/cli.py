"""Unified command-line interface.

Subcommands: serve, solve, detect-hr, train-seq, classify-activity,
gen-ecg, gen-activity.  Global flags: --config (flat key=value file)
and --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .behavior import (
    METHODS,
    accuracy_grid,
    format_grid,
    generate_activity_log,
    load_activity_log,
    save_activity_log,
    save_model_bundle,
    train_bundle,
)
from .config import DEFAULT_SERVICE_CONFIG, ServiceConfig, load_config
from .domain import (
    NEUTRAL_EMOTION,
    emotion_from_doc,
    event_from_doc,
    format_wall_clock,
    horizon_from_doc,
)
from .ecg import (
    DEFAULT_SAMPLE_RATE,
    binarize_rating,
    detect_r_peaks,
    generate_synthetic_ecg,
    load_recording,
    make_windows,
    peaks_to_hr,
    save_recording,
)
from .errors import MoodcalError, ValidationFailed
from .scheduling import (
    Problem,
    solve as solve_problem,
    thresholds_from_doc,
    weights_from_doc,
)
from .seqnet import TrainConfig, WindowedDataset, save_model, train
from .store import VAD_DIMENSIONS, CalendarStore, Journal


def parse_bpm_profile(text: str, seconds: int | None = None) -> list[float]:
    """Profile DSL: comma-separated VALUE or VALUExSECONDS terms, e.g.
    "75" (with --seconds), "60x30,90x30", "50x10,120x5,50x10"."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValidationFailed("empty bpm profile", {"profile": text})
    profile: list[float] = []
    for part in parts:
        try:
            if "x" in part:
                value, _, span = part.partition("x")
                profile.extend([float(value)] * int(span))
            else:
                profile.append(float(part))
        except ValueError as exc:
            raise ValidationFailed("unparsable profile term",
                                   {"term": part, "reason": str(exc)}) from exc
    if seconds is not None:
        if len(parts) == 1 and "x" not in parts[0]:
            profile = [profile[0]] * seconds
        elif len(profile) != seconds:
            raise ValidationFailed("profile length disagrees with --seconds",
                                   {"profile_seconds": len(profile),
                                    "seconds": seconds})
    return profile


def _training_rows(rec, dim_index: int, window: int):
    """Windows over the clip-normalized bpm series.  Scaling after
    windowing equals windowing the normalized series: min-max is the
    same elementwise transform either way."""
    hr = peaks_to_hr(detect_r_peaks(rec, channel=1), rec.sample_rate_hz)
    dataset = make_windows(hr, binarize_rating(rec.ratings[dim_index]), window)
    series = np.asarray(hr.bpm)
    lo, hi = series.min(), series.max()
    if hi == lo:
        return np.zeros_like(dataset.windows), dataset.labels
    return (dataset.windows - lo) / (hi - lo), dataset.labels


def _dataset_from_dir(data_dir: Path, dim_index: int, window: int) -> WindowedDataset:
    files = sorted(data_dir.glob("*.ecg"))
    if not files:
        raise ValidationFailed("no .ecg recordings found", {"dir": str(data_dir)})
    all_rows, all_labels = [], []
    for path in files:
        rec = load_recording(path)
        if rec.ratings is None:
            raise ValidationFailed("recording carries no ratings",
                                   {"path": str(path)})
        rows, labels = _training_rows(rec, dim_index, window)
        all_rows.append(rows)
        all_labels.append(labels)
    return WindowedDataset(windows=np.concatenate(all_rows),
                           labels=np.concatenate(all_labels),
                           window_size=window)


def _synthetic_dataset(dim_index: int, window: int, seed: int) -> WindowedDataset:
    """Planted fallback corpus: calm clips near 65 bpm rated low,
    agitated clips near 95 bpm rated high."""
    all_rows, all_labels = [], []
    for clip in range(6):
        for base, rating in ((65.0, 2), (95.0, 5)):
            t = np.arange(40)
            profile = base + 4.0 * np.sin(2.0 * np.pi * t / 20.0) + clip
            ratings = tuple(rating if i == dim_index else 3 for i in range(3))
            rec, _ = generate_synthetic_ecg(profile, noise_snr_db=20.0,
                                            seed=seed + 31 * clip + rating,
                                            ratings=ratings)
            rows, labels = _training_rows(rec, dim_index, window)
            all_rows.append(rows)
            all_labels.append(labels)
    return WindowedDataset(windows=np.concatenate(all_rows),
                           labels=np.concatenate(all_labels),
                           window_size=window)


def _load_problem(path: Path, config: ServiceConfig) -> Problem:
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationFailed("unreadable problem file",
                               {"path": str(path), "reason": str(exc)}) from exc
    if "events" not in doc:
        raise ValidationFailed("problem file needs an events list",
                               {"path": str(path)})
    scheduling = config.scheduling
    return Problem(
        events=tuple(event_from_doc(e) for e in doc["events"]),
        horizon=(horizon_from_doc(doc["horizon"]) if "horizon" in doc
                 else scheduling.horizon),
        emotion=(emotion_from_doc(doc["emotion"]) if "emotion" in doc
                 else NEUTRAL_EMOTION),
        weights=(weights_from_doc(doc["weights"]) if "weights" in doc
                 else scheduling.weights),
        thresholds=(thresholds_from_doc(doc["thresholds"]) if "thresholds" in doc
                    else scheduling.thresholds),
    )


# ── subcommand bodies ───────────────────────────────────────────────

def _cmd_serve(args, config: ServiceConfig) -> int:
    import uvicorn

    from .service import create_app

    journal = Journal(args.log) if args.log else None
    store = CalendarStore(journal=journal)
    app = create_app(store, config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_solve(args, config: ServiceConfig) -> int:
    problem = _load_problem(Path(args.problem), config)
    schedule = solve_problem(problem)
    h = problem.horizon
    print(f"objective {schedule.objective:.6f}")
    for name, value in schedule.breakdown.items():
        print(f"  {name:<12} {value:.6f}")
    for p in sorted(schedule.placements, key=lambda p: (p.start_slot, p.event.id)):
        start = format_wall_clock(h.day_start + p.start_slot * h.slot_minutes)
        end = format_wall_clock(h.day_start + p.end_slot * h.slot_minutes)
        print(f"{start}-{end}  {p.event.id}  {p.event.name}")
    return 0


def _cmd_detect_hr(args, _config: ServiceConfig) -> int:
    rec = load_recording(args.file)
    peaks = detect_r_peaks(rec, channel=args.channel)
    hr = peaks_to_hr(peaks, rec.sample_rate_hz)
    print(f"peaks {len(peaks)}")
    print(f"mean bpm {float(np.mean(hr.bpm)):.2f}")
    print("bpm " + " ".join(f"{b:.2f}" for b in hr.bpm))
    return 0


def _cmd_train_seq(args, _config: ServiceConfig) -> int:
    dim_index = VAD_DIMENSIONS.index(args.dim)
    if args.data:
        dataset = _dataset_from_dir(Path(args.data), dim_index, args.window)
    else:
        dataset = _synthetic_dataset(dim_index, args.window, args.seed)
    cfg = TrainConfig(epochs=args.epochs, hidden_size=args.hidden, seed=args.seed)
    model, curves = train(dataset, args.kind, cfg)
    last = curves[-1]
    print(f"windows {len(dataset)}  epochs {len(curves)}")
    print(f"final train_loss {last.train_loss:.4f}  test_loss {last.test_loss:.4f}"
          f"  test_accuracy {last.test_accuracy:.4f}")
    out = Path(args.out if args.out else f"{args.dim}.model")
    save_model(out, model)
    print(f"saved {out}")
    return 0


def _cmd_classify_activity(args, _config: ServiceConfig) -> int:
    events = load_activity_log(args.log)
    methods = (args.model,) if args.model else METHODS
    grid = accuracy_grid(events, methods=methods, seed=args.seed)
    print(format_grid(grid))
    if args.save:
        bundle = train_bundle(events, method=args.model or "tree", seed=args.seed)
        save_model_bundle(args.save, bundle)
        print(f"saved {args.save}")
    return 0


def _cmd_gen_ecg(args, _config: ServiceConfig) -> int:
    profile = parse_bpm_profile(args.bpm, args.seconds)
    ratings = None
    if args.ratings:
        parts = args.ratings.split(",")
        if len(parts) != 3:
            raise ValidationFailed("ratings must be three comma-separated integers",
                                   {"ratings": args.ratings})
        ratings = tuple(int(p) for p in parts)
    rec, peaks = generate_synthetic_ecg(profile, sample_rate_hz=args.rate,
                                        noise_snr_db=args.snr, seed=args.seed,
                                        ratings=ratings)
    save_recording(args.out, rec)
    print(f"wrote {args.out}: {rec.samples.shape[0]} samples at "
          f"{rec.sample_rate_hz:g} Hz, {len(peaks)} beats")
    return 0


def _cmd_gen_activity(args, _config: ServiceConfig) -> int:
    events = generate_activity_log(sessions=args.sessions, seed=args.seed)
    save_activity_log(args.out, events)
    print(f"wrote {args.out}: {len(events)} events across {args.sessions} sessions")
    return 0


# ── argument wiring ─────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moodcal",
        description="emotion-aware day scheduling and signal tooling")
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for generators and training")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--log", help="journal file for durable state")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("solve", help="schedule a problem file")
    p.add_argument("problem", help="JSON problem document")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("detect-hr", help="R-peak detection on a recording")
    p.add_argument("file")
    p.add_argument("--channel", type=int, choices=(1, 2), default=1)
    p.set_defaults(fn=_cmd_detect_hr)

    p = sub.add_parser("train-seq", help="train a sequence classifier")
    p.add_argument("--dim", required=True, choices=VAD_DIMENSIONS)
    p.add_argument("--kind", required=True, choices=("lstm", "gru"))
    p.add_argument("--data", help="directory of rated .ecg recordings")
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--out", help="model file (default <dim>.model)")
    p.set_defaults(fn=_cmd_train_seq)

    p = sub.add_parser("classify-activity",
                       help="score classifiers on an activity log")
    p.add_argument("log")
    p.add_argument("--model", choices=METHODS)
    p.add_argument("--save", help="persist a model bundle for the service")
    p.set_defaults(fn=_cmd_classify_activity)

    p = sub.add_parser("gen-ecg", help="write a synthetic recording")
    p.add_argument("--bpm", required=True,
                   help='profile, e.g. "75" or "60x30,90x30"')
    p.add_argument("--seconds", type=int)
    p.add_argument("--rate", type=float, default=DEFAULT_SAMPLE_RATE)
    p.add_argument("--snr", type=float, default=None,
                   help="white-noise SNR in dB (omit for clean)")
    p.add_argument("--ratings", help='self-report triple, e.g. "4,2,3"')
    p.add_argument("--out", default="recording.ecg")
    p.set_defaults(fn=_cmd_gen_ecg)

    p = sub.add_parser("gen-activity", help="write a synthetic activity log")
    p.add_argument("--sessions", type=int, required=True)
    p.add_argument("--out", default="activity.csv")
    p.set_defaults(fn=_cmd_gen_activity)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else DEFAULT_SERVICE_CONFIG
        return args.fn(args, config)
    except MoodcalError as exc:
        detail = f" {exc.details}" if exc.details else ""
        print(f"error [{exc.code}]: {exc}{detail}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [IOError]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main(argv=sys.argv[1:]))

"""Recurrent low/high classifiers written directly on numpy.

One scalar input per step, a single LSTM or GRU layer unrolled from a
zero state, inverted dropout on the final hidden state (training
only), and a two-logit softmax head.  Gradients are exact
backpropagation through time; they are verified against central
finite differences in the test-suite, so every formula here has an
independent check.  No autograd, no framework.

All randomness flows through one generator seeded from the training
config: same seed, same dataset, bit-identical run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ecg import WindowedDataset
from .errors import (
    EmptyInput,
    ShapeMismatch,
    SingleClassDataset,
    ValidationFailed,
)

LSTM_GATES = ("forget", "input", "output", "cand")
GRU_GATES = ("update", "reset", "cand")
N_CLASSES = 2  # (low, high)


@dataclass(eq=False)
class RecurrentModel:
    kind: str  # "lstm" | "gru"
    input_size: int
    hidden_size: int
    dropout_rate: float
    weights: dict[str, np.ndarray]
    window_size: int | None = None  # training metadata, used at inference

    @property
    def param_count(self) -> int:
        return sum(w.size for w in self.weights.values())


def _gates(kind: str) -> tuple[str, ...]:
    if kind == "lstm":
        return LSTM_GATES
    if kind == "gru":
        return GRU_GATES
    raise ValidationFailed("kind must be 'lstm' or 'gru'", {"kind": kind})


def init_model(kind: str, input_size: int = 1, hidden_size: int = 32,
               dropout_rate: float = 0.5,
               rng: np.random.Generator | None = None, seed: int = 0) -> RecurrentModel:
    """All weights uniform in ±1/sqrt(hidden_size), drawn in a fixed
    order so the same seed always builds the same model."""
    gates = _gates(kind)
    if hidden_size < 1 or input_size < 1:
        raise ValidationFailed("model sizes must be positive",
                               {"input_size": input_size, "hidden_size": hidden_size})
    if not 0.0 <= dropout_rate < 1.0:
        raise ValidationFailed("dropout rate must lie in [0, 1)",
                               {"dropout_rate": dropout_rate})
    if rng is None:
        rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(hidden_size)
    weights: dict[str, np.ndarray] = {}
    for gate in gates:
        weights[f"W_{gate}"] = rng.uniform(-bound, bound, (hidden_size, hidden_size + input_size))
        weights[f"b_{gate}"] = rng.uniform(-bound, bound, hidden_size)
    weights["W_out"] = rng.uniform(-bound, bound, (N_CLASSES, hidden_size))
    weights["b_out"] = rng.uniform(-bound, bound, N_CLASSES)
    return RecurrentModel(kind=kind, input_size=input_size, hidden_size=hidden_size,
                          dropout_rate=dropout_rate, weights=weights)


# ── step equations ──────────────────────────────────────────────────

def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lstm_step(w: dict, x: np.ndarray, h: np.ndarray, c: np.ndarray):
    za = np.concatenate([h, x], axis=1)
    f = _sigmoid(za @ w["W_forget"].T + w["b_forget"])
    i = _sigmoid(za @ w["W_input"].T + w["b_input"])
    o = _sigmoid(za @ w["W_output"].T + w["b_output"])
    g = np.tanh(za @ w["W_cand"].T + w["b_cand"])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new, (za, f, i, o, g, c, c_new)


def _gru_step(w: dict, x: np.ndarray, h: np.ndarray):
    za = np.concatenate([h, x], axis=1)
    z = _sigmoid(za @ w["W_update"].T + w["b_update"])
    r = _sigmoid(za @ w["W_reset"].T + w["b_reset"])
    zg = np.concatenate([r * h, x], axis=1)
    g = np.tanh(zg @ w["W_cand"].T + w["b_cand"])
    h_new = (1.0 - z) * h + z * g
    return h_new, (za, zg, z, r, g, h)


def lstm_step(model: RecurrentModel, x_t, h_prev, c_prev):
    """Single-sample LSTM step; returns (h, c)."""
    x = np.asarray(x_t, dtype=np.float64).reshape(1, -1)
    h = np.asarray(h_prev, dtype=np.float64).reshape(1, -1)
    c = np.asarray(c_prev, dtype=np.float64).reshape(1, -1)
    h_new, c_new, _ = _lstm_step(model.weights, x, h, c)
    return h_new[0], c_new[0]


def gru_step(model: RecurrentModel, x_t, h_prev):
    """Single-sample GRU step; returns h."""
    x = np.asarray(x_t, dtype=np.float64).reshape(1, -1)
    h = np.asarray(h_prev, dtype=np.float64).reshape(1, -1)
    h_new, _ = _gru_step(model.weights, x, h)
    return h_new[0]


# ── forward / loss ──────────────────────────────────────────────────

def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward_batch(model: RecurrentModel, X: np.ndarray,
                   dropout_mask: np.ndarray | None = None):
    B, W = X.shape
    H = model.hidden_size
    w = model.weights
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    caches = []
    for t in range(W):
        x = X[:, t].reshape(B, model.input_size)
        if model.kind == "lstm":
            h, c, cache = _lstm_step(w, x, h, c)
        else:
            h, cache = _gru_step(w, x, h)
        caches.append(cache)
    h_final = h if dropout_mask is None else h * dropout_mask
    logits = h_final @ w["W_out"].T + w["b_out"]
    probs = _softmax(logits)
    return probs, (caches, h, h_final)


def _as_batch(windows) -> np.ndarray:
    X = np.asarray(windows, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ShapeMismatch("windows must be a (batch, steps) matrix",
                            {"shape": list(X.shape)})
    return X


def forward(model: RecurrentModel, window, training: bool = False,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Probability pair (low, high) for one window."""
    X = _as_batch(window)
    if X.shape[0] != 1:
        raise ShapeMismatch("forward takes a single window", {"shape": list(X.shape)})
    mask = None
    if training and model.dropout_rate > 0.0:
        if rng is None:
            raise ValidationFailed("training-mode forward needs an rng for dropout")
        mask = _dropout_mask(model, 1, rng)
    probs, _ = _forward_batch(model, X, mask)
    return probs[0]


def _dropout_mask(model: RecurrentModel, batch: int, rng: np.random.Generator) -> np.ndarray:
    keep = 1.0 - model.dropout_rate
    return (rng.random((batch, model.hidden_size)) < keep) / keep


def cross_entropy(p, y) -> float:
    """One-hot cross entropy with probabilities clamped at 1e-12."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeMismatch("probability and one-hot vectors must align",
                            {"p": list(p.shape), "y": list(y.shape)})
    return float(-(y * np.log(np.clip(p, 1e-12, None))).sum())


def accuracy(preds, labels) -> float:
    preds = list(preds)
    labels = list(labels)
    if not preds or not labels:
        raise EmptyInput("accuracy over an empty collection is undefined")
    if len(preds) != len(labels):
        raise ShapeMismatch("predictions and labels must align",
                            {"preds": len(preds), "labels": len(labels)})
    correct = sum(1 for a, b in zip(preds, labels) if a == b)
    return correct / len(labels)


def batch_loss(model: RecurrentModel, windows, labels,
               dropout_mask: np.ndarray | None = None) -> float:
    """Mean cross entropy over a batch (inference mode unless a
    dropout mask is supplied)."""
    X = _as_batch(windows)
    y = np.asarray(labels, dtype=np.int64)
    probs, _ = _forward_batch(model, X, dropout_mask)
    picked = np.clip(probs[np.arange(len(y)), y], 1e-12, None)
    return float(-np.log(picked).mean())


# ── backward ────────────────────────────────────────────────────────

def backward(model: RecurrentModel, windows, labels,
             dropout_mask: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Exact BPTT gradients of the mean cross entropy for every
    parameter tensor; keys mirror ``model.weights``."""
    X = _as_batch(windows)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeMismatch("windows and labels must align",
                            {"windows": X.shape[0], "labels": y.shape[0]})
    B = X.shape[0]
    H = model.hidden_size
    w = model.weights
    probs, (caches, h_last, h_final) = _forward_batch(model, X, dropout_mask)

    grads = {k: np.zeros_like(v) for k, v in w.items()}
    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    dlogits /= B
    grads["W_out"] = dlogits.T @ h_final
    grads["b_out"] = dlogits.sum(axis=0)
    dh = dlogits @ w["W_out"]
    if dropout_mask is not None:
        dh = dh * dropout_mask

    if model.kind == "lstm":
        dc = np.zeros((B, H))
        for cache in reversed(caches):
            za, f, i, o, g, c_prev, c_new = cache
            tanh_c = np.tanh(c_new)
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c ** 2)
            df = dc * c_prev
            di = dc * g
            dg = dc * i
            dc = dc * f  # flows to the previous step
            pre = {
                "forget": df * f * (1.0 - f),
                "input": di * i * (1.0 - i),
                "output": do * o * (1.0 - o),
                "cand": dg * (1.0 - g ** 2),
            }
            dza = np.zeros_like(za)
            for gate, delta in pre.items():
                grads[f"W_{gate}"] += delta.T @ za
                grads[f"b_{gate}"] += delta.sum(axis=0)
                dza += delta @ w[f"W_{gate}"]
            dh = dza[:, :H]
    else:
        for cache in reversed(caches):
            za, zg, z, r, g, h_prev = cache
            dz = dh * (g - h_prev)
            dg = dh * z
            dh_prev = dh * (1.0 - z)
            dg_pre = dg * (1.0 - g ** 2)
            grads["W_cand"] += dg_pre.T @ zg
            grads["b_cand"] += dg_pre.sum(axis=0)
            dzg = dg_pre @ w["W_cand"]
            drh = dzg[:, :H]
            dr = drh * h_prev
            dh_prev = dh_prev + drh * r
            dz_pre = dz * z * (1.0 - z)
            dr_pre = dr * r * (1.0 - r)
            grads["W_update"] += dz_pre.T @ za
            grads["b_update"] += dz_pre.sum(axis=0)
            grads["W_reset"] += dr_pre.T @ za
            grads["b_reset"] += dr_pre.sum(axis=0)
            dza = dz_pre @ w["W_update"] + dr_pre @ w["W_reset"]
            dh = dh_prev + dza[:, :H]
    return grads


# ── training ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 0.05
    seed: int = 0
    split: float = 0.8  # training fraction
    hidden_size: int = 32
    dropout_rate: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.split < 1.0:
            raise ValidationFailed("split must lie strictly between 0 and 1",
                                   {"split": self.split})
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationFailed("epochs and batch_size must be positive")
        if self.learning_rate < 0.0:
            raise ValidationFailed("learning rate must be non-negative")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    test_loss: float
    test_accuracy: float


def train(dataset: WindowedDataset, kind: str,
          cfg: TrainConfig = TrainConfig()) -> tuple[RecurrentModel, list[EpochStats]]:
    """Plain gradient descent on shuffled minibatches; per-epoch
    curves are evaluated in inference mode (no dropout) on both the
    training and held-out sides of a seeded split."""
    X = np.asarray(dataset.windows, dtype=np.float64)
    y = np.asarray(dataset.labels, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise SingleClassDataset("training needs both classes present")
    rng = np.random.default_rng(cfg.seed)
    model = init_model(kind, input_size=1, hidden_size=cfg.hidden_size,
                       dropout_rate=cfg.dropout_rate, rng=rng)
    model.window_size = dataset.window_size

    perm = rng.permutation(len(y))
    n_train = int(cfg.split * len(y))
    if n_train < 1 or n_train == len(y):
        raise ValidationFailed("dataset too small for the requested split",
                               {"size": len(y), "split": cfg.split})
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]

    curves: list[EpochStats] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        for lo in range(0, n_train, cfg.batch_size):
            pick = order[lo:lo + cfg.batch_size]
            mask = (_dropout_mask(model, len(pick), rng)
                    if cfg.dropout_rate > 0.0 else None)
            grads = backward(model, X_train[pick], y_train[pick], mask)
            for key in model.weights:
                model.weights[key] -= cfg.learning_rate * grads[key]
        test_probs, _ = _forward_batch(model, X_test)
        test_pred = test_probs.argmax(axis=1)
        curves.append(EpochStats(
            epoch=epoch,
            train_loss=batch_loss(model, X_train, y_train),
            test_loss=batch_loss(model, X_test, y_test),
            test_accuracy=float((test_pred == y_test).mean()),
        ))
    return model, curves


# ── model files ─────────────────────────────────────────────────────

def save_model(path, model: RecurrentModel) -> None:
    """Flat text: scalar fields, then one named tensor per line."""
    lines = [
        f"kind {model.kind}",
        f"input_size {model.input_size}",
        f"hidden_size {model.hidden_size}",
        f"dropout_rate {model.dropout_rate!r}",
        f"window_size {'' if model.window_size is None else model.window_size}".rstrip(),
    ]
    for name, tensor in model.weights.items():
        dims = " ".join(str(d) for d in tensor.shape)
        values = " ".join(repr(float(v)) for v in tensor.ravel())
        lines.append(f"tensor {name} {len(tensor.shape)} {dims} {values}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> RecurrentModel:
    try:
        lines = Path(path).read_text().strip().splitlines()
        fields: dict[str, str] = {}
        weights: dict[str, np.ndarray] = {}
        for line in lines:
            parts = line.split()
            if parts[0] == "tensor":
                name, ndim = parts[1], int(parts[2])
                shape = tuple(int(d) for d in parts[3:3 + ndim])
                values = np.asarray([float(v) for v in parts[3 + ndim:]])
                weights[name] = values.reshape(shape)
            else:
                fields[parts[0]] = parts[1] if len(parts) > 1 else ""
        model = RecurrentModel(
            kind=fields["kind"],
            input_size=int(fields["input_size"]),
            hidden_size=int(fields["hidden_size"]),
            dropout_rate=float(fields["dropout_rate"]),
            weights=weights,
            window_size=int(fields["window_size"]) if fields.get("window_size") else None,
        )
    except (OSError, KeyError, IndexError, ValueError) as exc:
        raise ValidationFailed(f"bad model file: {exc}", {"path": str(path)}) from exc
    expected = {f"W_{g}" for g in _gates(model.kind)} | {f"b_{g}" for g in _gates(model.kind)}
    expected |= {"W_out", "b_out"}
    if set(model.weights) != expected:
        raise ValidationFailed("model file is missing tensors",
                               {"missing": sorted(expected - set(model.weights))})
    return model

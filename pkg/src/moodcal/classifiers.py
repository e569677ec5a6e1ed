"""Classical classifiers over labeled feature tables.

Four model families behind one tiny protocol (``predict(rows)``):
a greedy Gini decision tree, a bootstrap forest of such trees,
multinomial logistic regression, and Gaussian naive Bayes.  Split
search is vectorised per node; determinism rules are explicit
everywhere ties can occur: lowest feature index, then lowest
threshold for splits, lowest class id for votes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import EmptyTable, SingleClassDataset, ValidationFailed


@dataclass(frozen=True, eq=False)
class LabeledTable:
    rows: np.ndarray  # (N, F) float64
    labels: np.ndarray  # (N,) int64
    feature_names: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if rows.ndim != 2:
            raise ValidationFailed("rows must be a 2-D matrix", {"shape": list(rows.shape)})
        if rows.shape[0] != labels.shape[0]:
            raise ValidationFailed("rows and labels must align",
                                   {"rows": rows.shape[0], "labels": labels.shape[0]})
        if rows.shape[1] != len(self.feature_names):
            raise ValidationFailed("feature names must match the row width",
                                   {"width": rows.shape[1], "names": len(self.feature_names)})
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.rows.shape[0])


def gini(counts) -> float:
    """Impurity of a class-count vector; 0.5 for a 50/50 pair."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def split_indices(n: int, split: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle; first ``split`` fraction trains, rest tests.
    Trainers and ``evaluate`` share this so the two sides never mix."""
    if not 0.0 < split < 1.0:
        raise ValidationFailed("split must lie strictly between 0 and 1", {"split": split})
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(split * n)
    if n_train < 1 or n_train == n:
        raise ValidationFailed("table too small for the requested split",
                               {"size": n, "split": split})
    return perm[:n_train], perm[n_train:]


def _check_trainable(table: LabeledTable) -> None:
    if len(table) == 0:
        raise EmptyTable("cannot train on an empty table")
    if len(np.unique(table.labels)) < 2:
        raise SingleClassDataset("training needs at least two classes")


# ── decision tree ───────────────────────────────────────────────────

@dataclass
class TreeNode:
    counts: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int,
                feature_ids, min_leaf: int):
    """Least weighted Gini over every boundary between distinct
    values; ties go to the lowest feature index, then the lowest
    threshold.  Returns (feature, threshold) or None."""
    n = len(y)
    best: tuple[float, int, float] | None = None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    for f in sorted(feature_ids):
        vals = X[:, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        prefix = np.cumsum(onehot[order], axis=0)
        cuts = np.flatnonzero(sv[1:] > sv[:-1])
        if cuts.size == 0:
            continue
        left_n = (cuts + 1).astype(np.float64)
        right_n = n - left_n
        valid = (left_n >= min_leaf) & (right_n >= min_leaf)
        if not valid.any():
            continue
        lc = prefix[cuts]
        rc = prefix[-1] - lc
        gini_left = 1.0 - ((lc / left_n[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((rc / right_n[:, None]) ** 2).sum(axis=1)
        weighted = (left_n * gini_left + right_n * gini_right) / n
        weighted[~valid] = np.inf
        j = int(np.argmin(weighted))  # first minimum: lowest threshold
        if best is None or weighted[j] < best[0]:
            threshold = (sv[cuts[j]] + sv[cuts[j] + 1]) / 2.0
            if threshold >= sv[cuts[j] + 1]:  # adjacent floats collapse the midpoint
                threshold = float(sv[cuts[j]])
            best = (float(weighted[j]), f, float(threshold))
    if best is None:
        return None
    return best[1], best[2]


def _grow(X: np.ndarray, y: np.ndarray, n_classes: int, depth: int, max_depth: int,
          min_leaf: int, rng: np.random.Generator | None, n_sub: int | None) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    node = TreeNode(counts=counts)
    if depth >= max_depth or counts.max() == len(y) or len(y) < 2 * min_leaf:
        return node
    if n_sub is None or n_sub >= X.shape[1]:
        feature_ids = range(X.shape[1])
    else:
        feature_ids = rng.choice(X.shape[1], size=n_sub, replace=False)
    found = _best_split(X, y, n_classes, feature_ids, min_leaf)
    if found is None:
        return node
    node.feature, node.threshold = found
    mask = X[:, node.feature] <= node.threshold
    node.left = _grow(X[mask], y[mask], n_classes, depth + 1, max_depth, min_leaf, rng, n_sub)
    node.right = _grow(X[~mask], y[~mask], n_classes, depth + 1, max_depth, min_leaf, rng, n_sub)
    return node


@dataclass(eq=False)
class TreeModel:
    root: TreeNode
    n_classes: int
    feature_names: tuple[str, ...]

    def predict(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        for i, x in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = int(np.argmax(node.counts))  # ties: lowest class id
        return out


def train_tree(table: LabeledTable, max_depth: int = 12, min_leaf: int = 1,
               seed: int = 0) -> TreeModel:
    """Greedy Gini tree.  Impure nodes keep splitting while any
    boundary exists, so parity-style datasets still separate."""
    _check_trainable(table)
    n_classes = int(table.labels.max()) + 1
    root = _grow(table.rows, table.labels, n_classes, 0, max_depth, min_leaf,
                 None, None)
    return TreeModel(root=root, n_classes=n_classes, feature_names=table.feature_names)


# ── random forest ───────────────────────────────────────────────────

@dataclass(eq=False)
class ForestModel:
    trees: list[TreeModel]
    n_classes: int
    feature_subsample: int | None

    def predict(self, rows) -> np.ndarray:
        votes = np.stack([t.predict(rows) for t in self.trees])
        out = np.empty(votes.shape[1], dtype=np.int64)
        for i in range(votes.shape[1]):
            tally = np.bincount(votes[:, i], minlength=self.n_classes)
            out[i] = int(np.argmax(tally))  # ties: lowest class id
        return out


def train_forest(table: LabeledTable, n_trees: int = 15, max_depth: int = 12,
                 min_leaf: int = 1, seed: int = 0, bootstrap: bool = True,
                 feature_subsample: int | str | None = "sqrt") -> ForestModel:
    """Bootstrap aggregation with per-split feature subsampling
    (square root of the feature count by default).  With one tree, no
    bootstrap and no subsampling this degenerates to ``train_tree``."""
    _check_trainable(table)
    if n_trees < 1:
        raise ValidationFailed("forest needs at least one tree", {"n_trees": n_trees})
    n_classes = int(table.labels.max()) + 1
    n_features = table.rows.shape[1]
    if feature_subsample == "sqrt":
        n_sub = max(1, int(np.sqrt(n_features)))
    elif feature_subsample is None:
        n_sub = None
    else:
        n_sub = max(1, int(feature_subsample))
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        if bootstrap:
            idx = rng.integers(0, len(table), len(table))
            X, y = table.rows[idx], table.labels[idx]
        else:
            X, y = table.rows, table.labels
        root = _grow(X, y, n_classes, 0, max_depth, min_leaf, rng, n_sub)
        trees.append(TreeModel(root=root, n_classes=n_classes,
                               feature_names=table.feature_names))
    return ForestModel(trees=trees, n_classes=n_classes, feature_subsample=n_sub)


# ── multinomial logistic regression ─────────────────────────────────

@dataclass(eq=False)
class LinearModel:
    weights: np.ndarray  # (C, F)
    bias: np.ndarray  # (C,)
    n_classes: int

    def decision(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=np.float64)
        return X @ self.weights.T + self.bias

    def predict_proba(self, rows) -> np.ndarray:
        z = self.decision(rows)
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, rows) -> np.ndarray:
        return np.argmax(self.decision(rows), axis=1)


def train_linear(table: LabeledTable, epochs: int = 300, lr: float = 0.1,
                 seed: int = 0) -> LinearModel:
    """Full-batch softmax regression from zero weights; the optimiser
    is deterministic, the seed is accepted for interface parity."""
    _check_trainable(table)
    del seed
    n_classes = int(table.labels.max()) + 1
    X, y = table.rows, table.labels
    n, f = X.shape
    W = np.zeros((n_classes, f))
    b = np.zeros(n_classes)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    model = LinearModel(weights=W, bias=b, n_classes=n_classes)
    for _ in range(epochs):
        residual = model.predict_proba(X) - onehot
        W -= lr * (residual.T @ X) / n
        b -= lr * residual.mean(axis=0)
    return model


# ── Gaussian naive Bayes ────────────────────────────────────────────

VARIANCE_FLOOR = 1e-9


@dataclass(eq=False)
class BayesModel:
    class_ids: np.ndarray  # present classes, ascending
    means: np.ndarray  # (C, F)
    variances: np.ndarray  # (C, F), floored
    log_priors: np.ndarray  # (C,)

    def predict(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=np.float64)
        scores = np.empty((len(X), len(self.class_ids)))
        for k in range(len(self.class_ids)):
            diff = X - self.means[k]
            scores[:, k] = self.log_priors[k] - 0.5 * (
                np.log(2.0 * np.pi * self.variances[k]) + diff ** 2 / self.variances[k]
            ).sum(axis=1)
        return self.class_ids[np.argmax(scores, axis=1)]


def train_bayes(table: LabeledTable) -> BayesModel:
    _check_trainable(table)
    class_ids = np.unique(table.labels)
    means, variances, priors = [], [], []
    for c in class_ids:
        rows = table.rows[table.labels == c]
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), VARIANCE_FLOOR))
        priors.append(len(rows) / len(table))
    return BayesModel(class_ids=class_ids, means=np.stack(means),
                      variances=np.stack(variances), log_priors=np.log(priors))


# ── evaluation ──────────────────────────────────────────────────────

@dataclass(frozen=True)
class EvalReport:
    overall: float
    per_class: dict[int, tuple[int, int]]  # class -> (correct, total)
    n_train: int
    n_test: int

    def class_accuracy(self, c: int) -> float:
        correct, total = self.per_class[c]
        return correct / total


def evaluate(model, table: LabeledTable, split: float = 0.8, seed: int = 0) -> EvalReport:
    """Accuracy (correct over total) on the held-out side of the
    seeded split; pair with a model trained on the other side."""
    if len(table) == 0:
        raise EmptyTable("cannot evaluate on an empty table")
    train_idx, test_idx = split_indices(len(table), split, seed)
    preds = np.asarray(model.predict(table.rows[test_idx]))
    truth = table.labels[test_idx]
    per_class: dict[int, tuple[int, int]] = {}
    for c in np.unique(truth):
        mask = truth == c
        per_class[int(c)] = (int((preds[mask] == c).sum()), int(mask.sum()))
    return EvalReport(overall=float((preds == truth).mean()), per_class=per_class,
                      n_train=len(train_idx), n_test=len(test_idx))


def subset(table: LabeledTable, idx) -> LabeledTable:
    return LabeledTable(rows=table.rows[idx], labels=table.labels[idx],
                        feature_names=table.feature_names)


# ── model documents (service bundle persistence) ────────────────────

def _tree_to_nodes(root: TreeNode) -> list[dict[str, Any]]:
    nodes: list[dict[str, Any]] = []

    def walk(node: TreeNode) -> int:
        slot = len(nodes)
        nodes.append({})
        left = walk(node.left) if node.left else -1
        right = walk(node.right) if node.right else -1
        nodes[slot] = {"feature": node.feature, "threshold": node.threshold,
                       "left": left, "right": right,
                       "counts": [int(c) for c in node.counts]}
        return slot

    walk(root)
    return nodes


def _tree_from_nodes(nodes: list[dict[str, Any]]) -> TreeNode:
    def build(slot: int) -> TreeNode:
        raw = nodes[slot]
        node = TreeNode(counts=np.asarray(raw["counts"], dtype=np.int64),
                        feature=int(raw["feature"]), threshold=float(raw["threshold"]))
        if raw["left"] >= 0:
            node.left = build(raw["left"])
            node.right = build(raw["right"])
        return node

    return build(0)


def model_to_doc(model) -> dict[str, Any]:
    if isinstance(model, TreeModel):
        return {"family": "tree", "n_classes": model.n_classes,
                "feature_names": list(model.feature_names),
                "nodes": _tree_to_nodes(model.root)}
    if isinstance(model, ForestModel):
        return {"family": "forest", "n_classes": model.n_classes,
                "feature_subsample": model.feature_subsample,
                "trees": [model_to_doc(t) for t in model.trees]}
    if isinstance(model, LinearModel):
        return {"family": "logistic", "n_classes": model.n_classes,
                "weights": model.weights.tolist(), "bias": model.bias.tolist()}
    if isinstance(model, BayesModel):
        return {"family": "bayes", "class_ids": model.class_ids.tolist(),
                "means": model.means.tolist(), "variances": model.variances.tolist(),
                "log_priors": model.log_priors.tolist()}
    raise ValidationFailed("unknown model type", {"type": type(model).__name__})


def model_from_doc(doc: dict[str, Any]):
    family = doc.get("family")
    if family == "tree":
        return TreeModel(root=_tree_from_nodes(doc["nodes"]),
                         n_classes=int(doc["n_classes"]),
                         feature_names=tuple(doc["feature_names"]))
    if family == "forest":
        return ForestModel(trees=[model_from_doc(t) for t in doc["trees"]],
                           n_classes=int(doc["n_classes"]),
                           feature_subsample=doc.get("feature_subsample"))
    if family == "logistic":
        return LinearModel(weights=np.asarray(doc["weights"], dtype=np.float64),
                           bias=np.asarray(doc["bias"], dtype=np.float64),
                           n_classes=int(doc["n_classes"]))
    if family == "bayes":
        return BayesModel(class_ids=np.asarray(doc["class_ids"], dtype=np.int64),
                          means=np.asarray(doc["means"], dtype=np.float64),
                          variances=np.asarray(doc["variances"], dtype=np.float64),
                          log_priors=np.asarray(doc["log_priors"], dtype=np.float64))
    raise ValidationFailed("unknown model family", {"family": family})

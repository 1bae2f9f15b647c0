"""CART decision trees and a bagged random forest, built from scratch.

Trees are grown by exhaustive threshold search over a per-node random
feature subset, splitting on the largest Gini impurity decrease.  Split
thresholds sit at midpoints between consecutive distinct sorted values;
rows with value <= threshold go left.  All tie-breaks are pinned (lowest
feature index, then lowest threshold; vote and leaf ties go to the lowest
class index) so training is bit-reproducible.

Randomness derives from per-tree SplitMix64 streams keyed on (seed, tree
index): bootstrap indices are drawn first, then one feature subset per
internal node in depth-first pre-order, left subtree before right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateData,
    DimensionMismatch,
    EmptyNode,
    InsufficientClassSamples,
    ModelFormatError,
)
from .features import Dataset
from .rng import Stream, derive_seed, stream

_TAG_TREE = 11
_TAG_GRID = 12

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 400
    max_features: int = 12      # clamped to the actual feature count at use
    min_samples_split: int = 2
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be None or >= 0")


@dataclass(frozen=True)
class TreeNode:
    feature: int                 # -1 for leaves
    threshold: float
    left: int
    right: int
    klass: int
    counts: tuple[int, ...]
    gain: float

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class DecisionTree:
    feature: np.ndarray     # int32, -1 marks a leaf
    threshold: np.ndarray   # float64
    left: np.ndarray        # int32
    right: np.ndarray       # int32
    klass: np.ndarray       # int32 predicted class per node
    counts: np.ndarray      # (n_nodes, n_classes) int64 training counts
    gain: np.ndarray        # float64 impurity decrease of internal nodes
    n_features: int

    def __len__(self) -> int:
        return len(self.feature)

    def node(self, i: int) -> TreeNode:
        return TreeNode(int(self.feature[i]), float(self.threshold[i]),
                        int(self.left[i]), int(self.right[i]), int(self.klass[i]),
                        tuple(int(c) for c in self.counts[i]), float(self.gain[i]))


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple[DecisionTree, ...]
    params: ForestParams
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    oob_info: dict | None = None


def gini(counts) -> float:
    """Gini impurity 1 - sum (c_k / total)^2 of per-class counts."""
    arr = np.asarray(counts, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("counts must be nonnegative")
    total = arr.sum()
    if total <= 0:
        raise EmptyNode("gini of an empty node is undefined")
    p = arr / total
    return float(1.0 - np.sum(p * p))


def best_split(x: np.ndarray, y: np.ndarray, features, n_classes: int
               ) -> tuple[int, float, float] | None:
    """Best (feature, threshold, impurity decrease) over candidate splits.

    Candidates are midpoints between consecutive distinct sorted values of
    each listed feature.  Returns None when no split has a positive gain.
    Ties break toward the lowest feature index, then the lowest threshold.
    """
    n = len(y)
    features = sorted(int(f) for f in features)
    if n < 2 or not features:
        return None
    cols = np.asarray(features, dtype=np.int64)
    xs = x[:, cols]
    order = np.argsort(xs, axis=0, kind="stable")
    sv = np.take_along_axis(xs, order, axis=0)
    sy = y[order]
    onehot = (sy[:, :, None] == np.arange(n_classes)[None, None, :]).astype(np.float64)
    left = np.cumsum(onehot, axis=0)[:-1]            # (n-1, k, c)
    total = np.sum(onehot, axis=0)                   # (k, c)
    right = total[None, :, :] - left
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    pl = left / nl[:, :, None]
    pr = right / nr[:, :, None]
    g_left = 1.0 - np.sum(pl * pl, axis=2)
    g_right = 1.0 - np.sum(pr * pr, axis=2)
    class_counts = total[0]
    g_parent = 1.0 - np.sum((class_counts / n) ** 2)
    gains = g_parent - (nl / n) * g_left - (nr / n) * g_right
    distinct = sv[1:] > sv[:-1]
    gains = np.where(distinct, gains, -np.inf)
    best = float(gains.max()) if gains.size else -np.inf
    if not best > 0.0:
        return None
    hits = np.argwhere(gains == best)
    i, j = hits[np.lexsort((hits[:, 0], hits[:, 1]))][0]
    threshold = (sv[i, j] + sv[i + 1, j]) / 2.0
    return int(cols[j]), float(threshold), best


class _TreeBuilder:
    def __init__(self, n_classes: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.klass: list[int] = []
        self.counts: list[np.ndarray] = []
        self.gain: list[float] = []
        self.n_classes = n_classes

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.klass.append(0)
        self.counts.append(np.zeros(self.n_classes, dtype=np.int64))
        self.gain.append(0.0)
        return len(self.feature) - 1

    def finish(self, n_features: int) -> DecisionTree:
        return DecisionTree(
            np.array(self.feature, dtype=np.int32),
            np.array(self.threshold, dtype=np.float64),
            np.array(self.left, dtype=np.int32),
            np.array(self.right, dtype=np.int32),
            np.array(self.klass, dtype=np.int32),
            np.vstack(self.counts),
            np.array(self.gain, dtype=np.float64),
            n_features,
        )


def grow_tree(x: np.ndarray, y: np.ndarray, params: ForestParams, rng: Stream,
              n_classes: int, rows: np.ndarray | None = None) -> DecisionTree:
    """Grow one CART tree on the given rows (all rows when omitted).

    Stops at pure nodes, nodes below min_samples_split, the depth cap, or
    when no candidate split has positive gain.  The feature subset of each
    internal node is a fresh draw from `rng`, taken in depth-first
    pre-order with the left subtree completed before the right, which makes
    tree structure a pure function of (data, params, stream state).
    """
    if rows is None:
        rows = np.arange(len(y), dtype=np.int64)
    if len(rows) < 1:
        raise ValueError("need at least one sample")
    n_features = x.shape[1]
    k = min(params.max_features, n_features)
    builder = _TreeBuilder(n_classes)

    # explicit stack keeps pre-order RNG semantics without deep recursion
    root_slot = builder.add()
    stack: list[tuple[np.ndarray, int, int]] = [(rows, 0, root_slot)]
    while stack:
        node_rows, depth, slot = stack.pop()
        counts = np.bincount(y[node_rows], minlength=n_classes).astype(np.int64)
        builder.counts[slot] = counts
        builder.klass[slot] = int(np.argmax(counts))
        if (counts > 0).sum() <= 1 or len(node_rows) < params.min_samples_split \
                or (params.max_depth is not None and depth >= params.max_depth):
            continue
        subset = rng.subset(n_features, k)
        found = best_split(x[node_rows], y[node_rows], subset, n_classes)
        if found is None:
            continue
        f_idx, threshold, node_gain = found
        mask = x[node_rows, f_idx] <= threshold
        left_rows = node_rows[mask]
        right_rows = node_rows[~mask]
        if len(left_rows) == 0 or len(right_rows) == 0:
            # threshold degenerated to one side (adjacent floats); keep the leaf
            continue
        builder.feature[slot] = f_idx
        builder.threshold[slot] = threshold
        builder.gain[slot] = node_gain
        left_slot = builder.add()
        right_slot = builder.add()
        builder.left[slot] = left_slot
        builder.right[slot] = right_slot
        # push right first so the left subtree is processed (and draws) first
        stack.append((right_rows, depth + 1, right_slot))
        stack.append((left_rows, depth + 1, left_slot))
    return builder.finish(n_features)


def train_forest(data: Dataset, params: ForestParams) -> RandomForestModel:
    """Bagged forest: tree i trains on a bootstrap resample drawn from
    stream(seed, tree_index)."""
    if len(data) == 0:
        raise DegenerateData("empty dataset")
    x = data.matrix()
    y = data.labels()
    n_classes = len(data.class_names)
    if len(np.unique(y)) < 2:
        raise DegenerateData("training data holds a single class")
    n = len(y)
    trees = []
    for i in range(params.n_estimators):
        rng = stream(params.seed, _TAG_TREE, i)
        if params.bootstrap:
            rows = rng.integers(n, n)
        else:
            rows = np.arange(n, dtype=np.int64)
        trees.append(grow_tree(x, y, params, rng, n_classes, rows))
    return RandomForestModel(tuple(trees), params, tuple(data.feature_names),
                             tuple(data.class_names))


def _tree_predict_many(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    idx = np.zeros(len(x), dtype=np.int64)
    rows = np.arange(len(x))
    while True:
        feats = tree.feature[idx]
        active = feats >= 0
        if not active.any():
            return tree.klass[idx]
        go_left = np.zeros(len(x), dtype=bool)
        act_rows = rows[active]
        go_left[act_rows] = x[act_rows, feats[active]] <= tree.threshold[idx[active]]
        nxt = np.where(go_left, tree.left[idx], tree.right[idx])
        idx = np.where(active, nxt, idx)


def forest_predict_many(model: RandomForestModel, x: np.ndarray) -> np.ndarray:
    """Majority vote over trees for every row; ties go to the lowest class."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.trees[0].n_features:
        raise DimensionMismatch(
            f"rows have {x.shape[-1]} features, model expects {model.trees[0].n_features}")
    votes = np.zeros((len(x), len(model.class_names)), dtype=np.int64)
    rows = np.arange(len(x))
    for tree in model.trees:
        votes[rows, _tree_predict_many(tree, x)] += 1
    return np.argmax(votes, axis=1)


def forest_predict(model: RandomForestModel, row) -> int:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or len(row) != model.trees[0].n_features:
        raise DimensionMismatch(
            f"row has {row.shape[-1]} features, model expects {model.trees[0].n_features}")
    return int(forest_predict_many(model, row[None, :])[0])


def feature_importances(model: RandomForestModel) -> np.ndarray:
    """Mean decrease in impurity, normalized to sum to 1.

    Each internal node contributes (node samples / root samples) * gain to
    its split feature; per-tree vectors are normalized before averaging so
    every tree with a split carries equal weight, and splitless trees
    contribute zeros.
    """
    n_features = model.trees[0].n_features
    acc = np.zeros(n_features)
    for tree in model.trees:
        imp = np.zeros(n_features)
        root_n = tree.counts[0].sum()
        internal = tree.feature >= 0
        if internal.any():
            weights = tree.counts[internal].sum(axis=1) / root_n * tree.gain[internal]
            np.add.at(imp, tree.feature[internal], weights)
            imp /= imp.sum()
        acc += imp
    acc /= len(model.trees)
    total = acc.sum()
    if total > 0:
        acc /= total
    return acc


@dataclass(frozen=True)
class CvCell:
    params: ForestParams
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float


def grid_search(data: Dataset, grid: dict[str, list], k: int, seed: int,
                base_params: ForestParams = ForestParams()
                ) -> tuple[ForestParams, list[CvCell]]:
    """Stratified k-fold CV over n_estimators x max_features cells.

    Returns the winning parameters (highest mean accuracy; ties prefer
    fewer trees, then fewer features) plus the full table.  Per-cell,
    per-fold forests use seeds derived from (seed, cell, fold).
    """
    from .evaluation import stratified_k_fold  # local import avoids a cycle

    if k < 2:
        raise ValueError("need at least 2 folds")
    y = data.labels()
    counts = np.bincount(y, minlength=len(data.class_names))
    for name, c in zip(data.class_names, counts):
        if 0 < c < k:
            raise InsufficientClassSamples(f"class {name} has {c} rows, need >= {k}")
    folds = stratified_k_fold(data, k, seed)
    n_estimators_list = grid.get("n_estimators", [base_params.n_estimators])
    max_features_list = grid.get("max_features", [base_params.max_features])
    cells = [(ne, mf) for ne in n_estimators_list for mf in max_features_list]
    table: list[CvCell] = []
    for cell_idx, (ne, mf) in enumerate(cells):
        fold_acc = []
        for fold_idx, test_rows in enumerate(folds):
            test_set = set(test_rows)
            train_rows = [i for i in range(len(data)) if i not in test_set]
            train = Dataset(tuple(data.rows[i] for i in train_rows),
                            data.feature_names, data.class_names)
            params = replace(base_params, n_estimators=ne, max_features=mf,
                             seed=derive_seed(seed, _TAG_GRID, cell_idx, fold_idx))
            model = train_forest(train, params)
            test_x = np.vstack([data.rows[i].values for i in test_rows])
            test_y = y[list(test_rows)]
            pred = forest_predict_many(model, test_x)
            fold_acc.append(float(np.mean(pred == test_y)))
        table.append(CvCell(replace(base_params, n_estimators=ne, max_features=mf,
                                    seed=seed),
                            tuple(fold_acc), float(np.mean(fold_acc))))
    winner = min(table, key=lambda c: (-c.mean_accuracy, c.params.n_estimators,
                                       c.params.max_features))
    return winner.params, table


# --- persistence ---

def save_model(model: RandomForestModel) -> bytes:
    """Versioned JSON; load(save(m)) reproduces the model exactly."""
    trees = []
    for tree in model.trees:
        nodes = []
        for i in range(len(tree)):
            if tree.feature[i] >= 0:
                nodes.append({"f": int(tree.feature[i]), "t": float(tree.threshold[i]),
                              "l": int(tree.left[i]), "r": int(tree.right[i]),
                              "g": float(tree.gain[i]), "c": int(tree.klass[i]),
                              "n": [int(v) for v in tree.counts[i]]})
            else:
                nodes.append({"c": int(tree.klass[i]),
                              "n": [int(v) for v in tree.counts[i]]})
        trees.append(nodes)
    doc = {
        "format": "vowel-dialect-forest",
        "version": MODEL_FORMAT_VERSION,
        "params": {
            "n_estimators": model.params.n_estimators,
            "max_features": model.params.max_features,
            "min_samples_split": model.params.min_samples_split,
            "max_depth": model.params.max_depth,
            "bootstrap": model.params.bootstrap,
            "seed": model.params.seed,
        },
        "feature_names": list(model.feature_names),
        "class_names": list(model.class_names),
        "oob_info": model.oob_info,
        "trees": trees,
    }
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def load_model(raw: bytes) -> RandomForestModel:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"unreadable model file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != "vowel-dialect-forest":
        raise ModelFormatError("not a forest model file")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {doc.get('version')!r}, "
            f"expected {MODEL_FORMAT_VERSION}")
    try:
        params = ForestParams(**doc["params"])
        feature_names = tuple(doc["feature_names"])
        class_names = tuple(doc["class_names"])
        n_classes = len(class_names)
        trees = []
        for nodes in doc["trees"]:
            builder = _TreeBuilder(n_classes)
            for node in nodes:
                i = builder.add()
                builder.klass[i] = int(node["c"])
                builder.counts[i] = np.array(node["n"], dtype=np.int64)
                if "f" in node:
                    builder.feature[i] = int(node["f"])
                    builder.threshold[i] = float(node["t"])
                    builder.left[i] = int(node["l"])
                    builder.right[i] = int(node["r"])
                    builder.gain[i] = float(node["g"])
            if not builder.feature:
                raise ModelFormatError("empty tree")
            trees.append(builder.finish(len(feature_names)))
        if len(trees) != params.n_estimators:
            raise ModelFormatError("tree count does not match n_estimators")
        return RandomForestModel(tuple(trees), params, feature_names, class_names,
                                 doc.get("oob_info"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc

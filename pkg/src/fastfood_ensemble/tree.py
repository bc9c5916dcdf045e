"""CART decision trees with Gini impurity.

Greedy binary splits on axis-aligned thresholds; candidate thresholds are
midpoints of consecutive distinct sorted feature values. Growth stops at
``max_depth``, pure nodes, or when ``min_samples_leaf`` admits no split.
Ties between equally good splits resolve to the lowest feature index,
then the lowest threshold, so fitting is deterministic and invariant to
row order.

Trees are stored as flat parallel node arrays (feature, threshold, left,
right, per-node class counts) which serialize directly into model files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError, ParameterError

LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 10
    min_samples_leaf: int = 1
    min_impurity_decrease: float = 0.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ParameterError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ParameterError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )
        if self.min_impurity_decrease < 0:
            raise ParameterError("min_impurity_decrease must be >= 0")


@dataclass(frozen=True)
class DecisionTree:
    """Flat-array binary tree. ``feature[i] == LEAF`` marks leaves."""

    feature: np.ndarray  # (n_nodes,) int32, LEAF for leaves
    threshold: np.ndarray  # (n_nodes,) float64, 0.0 at leaves
    left: np.ndarray  # (n_nodes,) int32 child index, LEAF at leaves
    right: np.ndarray  # (n_nodes,) int32
    class_counts: np.ndarray  # (n_nodes, n_classes) int64
    n_classes: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max(initial=0))


def gini_impurity(counts: np.ndarray) -> float:
    """Gini impurity 1 - sum(p_k^2) of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def _best_split(X, y, n_classes, min_samples_leaf):
    """Best (feature, threshold, decrease) at a node, or None.

    Scans every midpoint of consecutive distinct sorted values in every
    feature at once; decrease is Gini(parent) minus the sample-weighted
    child Gini. Ties go to the lowest feature index, then lowest
    threshold.
    """
    n, n_feat = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    sx = np.take_along_axis(X, order, axis=0)
    onehot = np.zeros((n, n_classes), dtype=np.int32)
    onehot[np.arange(n), y] = 1
    cum = np.cumsum(onehot[order], axis=0)  # (n, n_feat, n_classes)
    total = cum[-1, 0, :].astype(np.float64)
    parent = gini_impurity(total)

    lc = cum[:-1].astype(np.float64)  # cut after sorted position i
    ln = np.arange(1, n, dtype=np.float64)[:, np.newaxis]
    rn = n - ln
    valid = (sx[1:] > sx[:-1]) & (ln >= min_samples_leaf) & (rn >= min_samples_leaf)
    if not valid.any():
        return None
    rc = total[np.newaxis, np.newaxis, :] - lc
    gl = 1.0 - np.sum((lc / ln[:, :, np.newaxis]) ** 2, axis=2)
    gr = 1.0 - np.sum((rc / rn[:, :, np.newaxis]) ** 2, axis=2)
    decrease = parent - (ln * gl + rn * gr) / n
    decrease = np.where(valid, decrease, -np.inf)

    best = decrease.max()
    feats = np.nonzero((decrease == best).any(axis=0))[0]
    f = int(feats[0])
    i = int(np.nonzero(decrease[:, f] == best)[0][0])
    threshold = 0.5 * (sx[i, f] + sx[i + 1, f])
    return f, float(threshold), float(best)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams = TreeParams(),
    n_classes: int | None = None,
) -> DecisionTree:
    """Grow a CART tree on (X, y); labels are ints in 0..n_classes-1."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("training data must be a non-empty n x D matrix")
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X.shape[0],):
        raise DimensionError("label vector length must match row count")
    if y.min() < 0:
        raise InputError("labels must be non-negative class indices")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    elif y.max() >= n_classes:
        raise InputError("label outside 0..n_classes-1")

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(node_counts):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(node_counts)
        return len(feature) - 1

    root_idx = np.arange(X.shape[0])
    root = new_node(np.bincount(y, minlength=n_classes))
    stack = [(root, root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        node_counts = np.bincount(yn, minlength=n_classes)
        if depth >= params.max_depth or np.count_nonzero(node_counts) <= 1:
            continue
        found = _best_split(X[idx], yn, n_classes, params.min_samples_leaf)
        if found is None:
            continue
        f, thr, decrease = found
        if decrease < params.min_impurity_decrease:
            continue
        go_left = X[idx, f] <= thr
        li = new_node(np.bincount(yn[go_left], minlength=n_classes))
        ri = new_node(np.bincount(yn[~go_left], minlength=n_classes))
        feature[node] = f
        threshold[node] = thr
        left[node] = li
        right[node] = ri
        # push right first so nodes are numbered in depth-first left order
        stack.append((ri, idx[~go_left], depth + 1))
        stack.append((li, idx[go_left], depth + 1))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        class_counts=np.asarray(counts, dtype=np.int64),
        n_classes=n_classes,
    )


def tree_apply(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    """Leaf index for each row of X (go left iff value <= threshold)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        internal = tree.feature[node] != LEAF
        if not internal.any():
            return node
        sel = rows[internal]
        cur = node[sel]
        go_left = X[sel, tree.feature[cur]] <= tree.threshold[cur]
        node[sel] = np.where(go_left, tree.left[cur], tree.right[cur])


def tree_predict_proba(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    """Class-probability vector(s): leaf class counts normalised to sum 1."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    X = np.atleast_2d(arr)
    if X.shape[1] != 0 and tree.feature.max(initial=LEAF) >= X.shape[1]:
        raise DimensionError("input has fewer features than the tree splits on")
    leaves = tree_apply(tree, X)
    c = tree.class_counts[leaves].astype(np.float64)
    probs = c / c.sum(axis=1, keepdims=True)
    return probs[0] if single else probs


def tree_predict(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    """Predicted class index(es); argmax with ties to the lowest index."""
    p = tree_predict_proba(tree, x)
    return np.argmax(p, axis=-1)

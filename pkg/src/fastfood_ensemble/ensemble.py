"""Random-subspace ensemble: N trees, one per Fastfood projection.

Each member owns a derived seed from which its projection block (and, for
the rbf-cos mode, its phase vector) is regenerated on demand; blocks are
never stored, so model files stay a few kilobytes regardless of feature
width. Member outputs are class-probability vectors fused by weighted
average; weights come from validation accuracy when a validation set is
supplied, else they are uniform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataio import FeatureMatrix
from .errors import (
    ConsistencyError,
    DimensionError,
    FormatError,
    InputError,
    ParameterError,
)
from .fastfood import (
    FastfoodBlock,
    NonlinearityMode,
    S_MODES,
    apply_nonlinearity,
    project,
    sample_block,
    sample_phases,
)
from .rng import derive_seed
from .tree import DecisionTree, TreeParams, fit_tree, tree_predict_proba

MODEL_FORMAT = "dfem"
MODEL_VERSION = 1

WEIGHTINGS = ("validation-accuracy", "uniform")
NONLINEARITIES = ("identity", "rbf-cos")

# substream indices under a member seed
_SUB_BLOCK = 0
_SUB_PHASES = 1


@dataclass(frozen=True)
class EnsembleConfig:
    n_members: int
    d_out: int
    sigma: float = 1.0
    nonlinearity: str = "identity"
    tree: TreeParams = TreeParams()
    weighting: str = "validation-accuracy"
    s_mode: str = "chi"

    def __post_init__(self):
        if self.n_members < 1:
            raise ParameterError(f"n_members must be >= 1, got {self.n_members}")
        if self.d_out < 1:
            raise ParameterError(f"d_out must be >= 1, got {self.d_out}")
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.nonlinearity not in NONLINEARITIES:
            raise ParameterError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.weighting not in WEIGHTINGS:
            raise ParameterError(f"unknown weighting {self.weighting!r}")
        if self.s_mode not in S_MODES:
            raise ParameterError(f"unknown s_mode {self.s_mode!r}")


@dataclass(frozen=True)
class EnsembleMember:
    seed: int
    tree: DecisionTree
    weight: float


@dataclass(frozen=True)
class EnsembleModel:
    config: EnsembleConfig
    master_seed: int
    m_in: int
    class_labels: tuple[str, ...]
    members: tuple[EnsembleMember, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.members) != self.config.n_members:
            raise ConsistencyError("member count differs from config")
        total = sum(m.weight for m in self.members)
        if abs(total - 1.0) > 1e-9:
            raise ConsistencyError(f"member weights sum to {total}, not 1")

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def member_block(self, i: int) -> FastfoodBlock:
        """Regenerate member i's projection block from its seed."""
        c = self.config
        return sample_block(
            derive_seed(self.members[i].seed, _SUB_BLOCK),
            self.m_in, c.d_out, c.sigma, c.s_mode,
        )

    def member_nonlinearity(self, i: int) -> NonlinearityMode:
        if self.config.nonlinearity == "identity":
            return NonlinearityMode.identity()
        phases = sample_phases(
            derive_seed(self.members[i].seed, _SUB_PHASES), self.config.d_out
        )
        return NonlinearityMode.rbf_cos(phases)


def member_weights(val_accuracies) -> np.ndarray:
    """Normalise validation accuracies into consensus weights.

    Weights are accuracies divided by their sum; an all-zero vector falls
    back to uniform weights.
    """
    acc = np.asarray(val_accuracies, dtype=np.float64)
    if acc.ndim != 1 or acc.size < 1:
        raise ParameterError("accuracies must be a non-empty vector")
    if np.any(acc < 0) or np.any(acc > 1):
        raise ParameterError("accuracies must lie in [0, 1]")
    total = acc.sum()
    if total == 0:
        return np.full(acc.size, 1.0 / acc.size)
    return acc / total


def train_ensemble(
    train: FeatureMatrix,
    val: FeatureMatrix | None,
    config: EnsembleConfig,
    master_seed: int,
) -> EnsembleModel:
    """Train N members, one per derived Fastfood subspace.

    Deterministic in (data, config, master_seed): member i's seed is
    derived from the master seed and index, the block from the member
    seed, and tree fitting is tie-broken deterministically. Weights use
    validation accuracy when ``val`` is given and the config asks for it.
    """
    if train.labels is None:
        raise InputError("training features must be labeled")
    if val is not None:
        if val.n_dims != train.n_dims:
            raise DimensionError(
                f"val width {val.n_dims} != train width {train.n_dims}"
            )
        if val.labels is None:
            raise InputError("validation features must be labeled")
        if (val.class_names is not None and train.class_names is not None
                and val.class_names != train.class_names):
            raise ConsistencyError("train/val class names differ")

    n_classes = train.n_classes
    labels = [str(k) for k in range(n_classes)] if train.class_names is None \
        else list(train.class_names)
    if val is not None and val.labels.size and val.labels.max() >= n_classes:
        raise ConsistencyError("validation label outside training class set")

    Xtr = train.values.astype(np.float64)
    Xval = val.values.astype(np.float64) if val is not None else None

    trees = []
    accs = []
    seeds = []
    for i in range(config.n_members):
        member_seed = derive_seed(master_seed, i)
        seeds.append(member_seed)
        block = sample_block(
            derive_seed(member_seed, _SUB_BLOCK),
            train.n_dims, config.d_out, config.sigma, config.s_mode,
        )
        if config.nonlinearity == "identity":
            nl = NonlinearityMode.identity()
        else:
            nl = NonlinearityMode.rbf_cos(
                sample_phases(derive_seed(member_seed, _SUB_PHASES), config.d_out)
            )
        Z = apply_nonlinearity(project(block, Xtr), nl)
        tree = fit_tree(Z, train.labels, config.tree, n_classes)
        trees.append(tree)
        if val is not None and config.weighting == "validation-accuracy":
            Zv = apply_nonlinearity(project(block, Xval), nl)
            pred = np.argmax(tree_predict_proba(tree, Zv), axis=1)
            accs.append(float(np.mean(pred == val.labels)))

    if accs:
        weights = member_weights(accs)
    else:
        weights = np.full(config.n_members, 1.0 / config.n_members)

    members = tuple(
        EnsembleMember(seed=s, tree=t, weight=float(w))
        for s, t, w in zip(seeds, trees, weights)
    )
    return EnsembleModel(
        config=config,
        master_seed=master_seed,
        m_in=train.n_dims,
        class_labels=tuple(labels),
        members=members,
    )


def ensemble_predict_proba(model: EnsembleModel, x) -> np.ndarray:
    """Weighted-average consensus of member class probabilities."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    X = np.atleast_2d(arr)
    if X.shape[1] != model.m_in:
        raise DimensionError(f"input width {X.shape[1]} != m_in {model.m_in}")
    out = np.zeros((X.shape[0], model.n_classes))
    for i, member in enumerate(model.members):
        block = model.member_block(i)
        nl = model.member_nonlinearity(i)
        Z = apply_nonlinearity(project(block, X), nl)
        out += member.weight * tree_predict_proba(member.tree, Z)
    return out[0] if single else out


def ensemble_predict(model: EnsembleModel, x) -> np.ndarray:
    """Predicted label index; argmax with ties to the lowest class index."""
    return np.argmax(ensemble_predict_proba(model, x), axis=-1)


def _tree_to_doc(tree: DecisionTree) -> dict:
    thresholds = [
        None if f == -1 else t for f, t in zip(tree.feature, tree.threshold)
    ]
    return {
        "n_classes": tree.n_classes,
        "feature": tree.feature.tolist(),
        "threshold": thresholds,
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "class_counts": tree.class_counts.tolist(),
    }


def _tree_from_doc(doc: dict) -> DecisionTree:
    thr = [0.0 if t is None else float(t) for t in doc["threshold"]]
    return DecisionTree(
        feature=np.asarray(doc["feature"], dtype=np.int32),
        threshold=np.asarray(thr, dtype=np.float64),
        left=np.asarray(doc["left"], dtype=np.int32),
        right=np.asarray(doc["right"], dtype=np.int32),
        class_counts=np.asarray(doc["class_counts"], dtype=np.int64),
        n_classes=int(doc["n_classes"]),
    )


def save_model(model: EnsembleModel, path) -> None:
    """Write the model as a structured-text (JSON) document.

    Blocks are regenerated from seeds at load time rather than stored, so
    the file holds only configuration, seeds, weights, class labels and
    flattened tree node arrays. Output bytes are deterministic.
    """
    c = model.config
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "master_seed": model.master_seed,
        "m_in": model.m_in,
        "class_labels": list(model.class_labels),
        "config": {
            "n_members": c.n_members,
            "d_out": c.d_out,
            "sigma": c.sigma,
            "nonlinearity": c.nonlinearity,
            "weighting": c.weighting,
            "s_mode": c.s_mode,
            "tree": {
                "max_depth": c.tree.max_depth,
                "min_samples_leaf": c.tree.min_samples_leaf,
                "min_impurity_decrease": c.tree.min_impurity_decrease,
            },
        },
        "members": [
            {"seed": m.seed, "weight": m.weight, "tree": _tree_to_doc(m.tree)}
            for m in model.members
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> EnsembleModel:
    """Read a model document written by :func:`save_model`."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise FormatError("not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        cdoc = doc["config"]
        config = EnsembleConfig(
            n_members=int(cdoc["n_members"]),
            d_out=int(cdoc["d_out"]),
            sigma=float(cdoc["sigma"]),
            nonlinearity=cdoc["nonlinearity"],
            weighting=cdoc["weighting"],
            s_mode=cdoc["s_mode"],
            tree=TreeParams(
                max_depth=int(cdoc["tree"]["max_depth"]),
                min_samples_leaf=int(cdoc["tree"]["min_samples_leaf"]),
                min_impurity_decrease=float(cdoc["tree"]["min_impurity_decrease"]),
            ),
        )
        members = tuple(
            EnsembleMember(
                seed=int(m["seed"]),
                weight=float(m["weight"]),
                tree=_tree_from_doc(m["tree"]),
            )
            for m in doc["members"]
        )
        return EnsembleModel(
            config=config,
            master_seed=int(doc["master_seed"]),
            m_in=int(doc["m_in"]),
            class_labels=tuple(doc["class_labels"]),
            members=members,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model file: {exc}") from None

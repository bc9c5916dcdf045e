"""Evaluation reports, {D, N} grid search, and the projection benchmark.

The benchmark compares a Fastfood block against an in-package dense
Gaussian matrix multiply on identical inputs, so the reported ratios
reflect algorithmic structure rather than vendor BLAS tuning; stored
scalars and arithmetic operations are counted analytically and are exact
on any machine, while wall-clock figures should only ever be compared as
ratios.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataio import FeatureMatrix
from .ensemble import EnsembleConfig, EnsembleModel, ensemble_predict_proba, train_ensemble
from .errors import (
    ConsistencyError,
    DimensionError,
    InputError,
    OracleSizeError,
    ParameterError,
    SplitError,
)
from .fastfood import DENSE_ORACLE_CAP, dense_rks, project, sample_block
from .rng import Stream, derive_seed

DEFAULT_D_VALUES = (20, 100, 1000, 10000, 20000)
DEFAULT_N_VALUES = (10, 20, 50)


@dataclass(frozen=True)
class GridSpec:
    d_values: tuple[int, ...] = DEFAULT_D_VALUES
    n_values: tuple[int, ...] = DEFAULT_N_VALUES
    folds: int = 5

    def __post_init__(self):
        if not self.d_values or not self.n_values:
            raise ParameterError("grid value lists must be non-empty")
        if self.folds < 2:
            raise ParameterError(f"folds must be >= 2, got {self.folds}")

    def cells(self) -> list[tuple[int, int]]:
        """(D, N) cells in enumeration order (D-major)."""
        return [(d, n) for d in self.d_values for n in self.n_values]


@dataclass(frozen=True)
class GridCellResult:
    d_out: int
    n_members: int
    fold_accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))


@dataclass(frozen=True)
class GridSearchResult:
    best_config: EnsembleConfig
    table: tuple[GridCellResult, ...]


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    per_class_accuracy: np.ndarray
    confusion: np.ndarray  # rows true, cols predicted
    train_time: float
    test_time: float


@dataclass(frozen=True)
class BenchReport:
    m_in: int
    d_out: int
    fastfood_time: float
    dense_time: float
    fastfood_scalars: int
    dense_scalars: int
    fastfood_mults: int
    dense_mults: int
    fastfood_addsubs: int
    dense_addsubs: int


def stratified_kfold(labels: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Test-index arrays for k stratified folds; every class needs >= folds rows."""
    labels = np.asarray(labels)
    st = Stream(seed)
    assignments = [[] for _ in range(folds)]
    for cls in np.unique(labels):
        pos = np.nonzero(labels == cls)[0]
        if pos.size < folds:
            raise SplitError(
                f"class {cls} has {pos.size} samples, fewer than {folds} folds"
            )
        shuffled = pos[st.permutation(pos.size)]
        for f in range(folds):
            assignments[f].append(shuffled[f::folds])
    return [np.sort(np.concatenate(parts)) for parts in assignments]


def _subset(fm: FeatureMatrix, idx: np.ndarray) -> FeatureMatrix:
    return FeatureMatrix(
        values=fm.values[idx].copy(),
        labels=fm.labels[idx].copy(),
        class_names=fm.class_names,
        provenance=list(fm.provenance),
    )


def _run_cell(train, fold_sets, config, cell_seed):
    all_idx = np.arange(train.n_samples)
    accs = []
    for f, test_idx in enumerate(fold_sets):
        mask = np.ones(train.n_samples, dtype=bool)
        mask[test_idx] = False
        fit_fm = _subset(train, all_idx[mask])
        holdout = _subset(train, test_idx)
        model = train_ensemble(fit_fm, None, config, derive_seed(cell_seed, f))
        proba = ensemble_predict_proba(model, holdout.values.astype(np.float64))
        pred = np.argmax(proba, axis=1)
        accs.append(float(np.mean(pred == holdout.labels)))
    return tuple(accs)


def grid_search(
    train: FeatureMatrix,
    grid: GridSpec,
    base_config: EnsembleConfig,
    seed: int,
    n_workers: int | None = None,
) -> GridSearchResult:
    """Cross-validated accuracy for every (D, N) cell.

    Folds come from one stratified split shared across cells; each cell's
    training is independently seeded, so results do not depend on
    execution order. Best cell is the highest mean accuracy with ties
    resolved to the smaller D, then the smaller N.
    """
    if train.labels is None:
        raise InputError("grid search requires labeled features")
    fold_sets = stratified_kfold(train.labels, grid.folds, derive_seed(seed, 0))
    cells = grid.cells()
    configs = [
        replace(base_config, d_out=d, n_members=n, weighting="uniform")
        for d, n in cells
    ]
    seeds = [derive_seed(seed, 1 + ci) for ci in range(len(cells))]
    if n_workers is None:
        n_workers = max(1, int(os.environ.get("DFEL_THREADS", "1")))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(_run_cell, train, fold_sets, cfg, cs)
                for cfg, cs in zip(configs, seeds)
            ]
            folds_acc = [f.result() for f in futures]
    else:
        folds_acc = [
            _run_cell(train, fold_sets, cfg, cs)
            for cfg, cs in zip(configs, seeds)
        ]
    table = tuple(
        GridCellResult(d_out=d, n_members=n, fold_accuracies=acc)
        for (d, n), acc in zip(cells, folds_acc)
    )
    best = None
    for cell in table:
        if best is None:
            best = cell
            continue
        better = cell.mean_accuracy > best.mean_accuracy or (
            cell.mean_accuracy == best.mean_accuracy
            and (cell.d_out, cell.n_members) < (best.d_out, best.n_members)
        )
        if better:
            best = cell
    best_config = replace(
        base_config, d_out=best.d_out, n_members=best.n_members
    )
    return GridSearchResult(best_config=best_config, table=table)


def evaluate(model: EnsembleModel, test: FeatureMatrix, train_time: float = 0.0) -> EvalReport:
    """Accuracy, per-class accuracy and confusion matrix on a test set.

    Pure apart from the timing fields. Per-class accuracy is NaN for
    model classes absent from the test set.
    """
    if test.labels is None:
        raise InputError("evaluation requires labeled features")
    if test.n_dims != model.m_in:
        raise DimensionError(f"test width {test.n_dims} != m_in {model.m_in}")
    if (test.class_names is not None
            and list(test.class_names) != list(model.class_labels)):
        raise ConsistencyError("test class names differ from the model's")
    if test.labels.size and test.labels.max() >= model.n_classes:
        raise ConsistencyError("test label outside the model's class set")
    t0 = time.perf_counter()
    proba = ensemble_predict_proba(model, test.values.astype(np.float64))
    pred = np.argmax(proba, axis=1)
    test_time = time.perf_counter() - t0
    C = model.n_classes
    confusion = np.zeros((C, C), dtype=np.int64)
    np.add.at(confusion, (test.labels, pred), 1)
    row_sums = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        per_class = np.where(
            row_sums > 0, np.diag(confusion) / np.maximum(row_sums, 1), np.nan
        )
    accuracy = float(np.trace(confusion) / test.n_samples)
    return EvalReport(
        accuracy=accuracy,
        per_class_accuracy=per_class,
        confusion=confusion,
        train_time=train_time,
        test_time=test_time,
    )


def bench_projection(
    m_in: int,
    d_out: int,
    repetitions: int,
    seed: int,
    dense_cap_override: bool = False,
    cap: int = DENSE_ORACLE_CAP,
) -> BenchReport:
    """Time Fastfood projection against a dense matrix-vector multiply.

    Both sides consume the same random input vector; times are medians
    over ``repetitions`` after one warm-up. Stored-scalar and arithmetic
    counts are analytic: the dense side stores and multiplies
    ``m_in * d_out`` scalars, the Fastfood side stores four length-d
    vectors per stack, multiplies through four diagonals and add/subs
    through two Walsh-Hadamard butterflies.
    """
    if repetitions < 3:
        raise ParameterError(f"repetitions must be >= 3, got {repetitions}")
    if max(m_in, d_out) > cap and not dense_cap_override:
        raise OracleSizeError(
            f"dense side {m_in} x {d_out} exceeds cap {cap}; "
            "pass dense_cap_override to proceed"
        )
    block = sample_block(derive_seed(seed, 0), m_in, d_out, sigma=1.0)
    dense = dense_rks(derive_seed(seed, 1), m_in, d_out, sigma=1.0)
    x = Stream(derive_seed(seed, 2)).normals(m_in)

    project(block, x)
    dense @ x
    ff_times, dn_times = [], []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        project(block, x)
        ff_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        dense @ x
        dn_times.append(time.perf_counter() - t0)

    return BenchReport(
        m_in=m_in,
        d_out=d_out,
        fastfood_time=float(np.median(ff_times)),
        dense_time=float(np.median(dn_times)),
        fastfood_scalars=block.stored_scalars,
        dense_scalars=m_in * d_out,
        fastfood_mults=block.multiplies_per_projection,
        dense_mults=m_in * d_out,
        fastfood_addsubs=block.addsubs_per_projection,
        dense_addsubs=(m_in - 1) * d_out,
    )

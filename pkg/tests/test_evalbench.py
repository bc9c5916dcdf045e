import numpy as np
import pytest

from fastfood_ensemble import (
    EnsembleConfig,
    FeatureMatrix,
    GridSpec,
    InputError,
    OracleSizeError,
    ParameterError,
    SplitError,
    bench_projection,
    ensemble_predict,
    evaluate,
    grid_search,
    stratified_kfold,
    synth_mixture,
    train_ensemble,
)


class TestStratifiedKfold:
    def test_folds_partition_and_stratify(self):
        fm = synth_mixture(3, 20, 4, 1.0, seed=2)
        folds = stratified_kfold(fm.labels, 5, seed=3)
        all_idx = np.sort(np.concatenate(folds))
        assert np.array_equal(all_idx, np.arange(fm.n_samples))
        for f in folds:
            assert np.array_equal(np.bincount(fm.labels[f]), [4, 4, 4])

    def test_small_class_rejected(self):
        labels = np.array([0, 0, 0, 1, 1])
        with pytest.raises(SplitError):
            stratified_kfold(labels, 3, seed=0)


class TestGridSearch:
    def _easy_data(self, sep=50.0):
        return synth_mixture(3, 15, 16, sep, seed=4)

    def test_default_grid_has_15_cells(self):
        grid = GridSpec()
        assert len(grid.cells()) == 15
        assert grid.cells()[0] == (20, 10)
        assert grid.cells()[-1] == (20000, 50)

    def test_single_cell_grid(self):
        data = self._easy_data()
        grid = GridSpec(d_values=(16,), n_values=(3,), folds=3)
        base = EnsembleConfig(n_members=1, d_out=1)
        result = grid_search(data, grid, base, seed=5)
        assert len(result.table) == 1
        assert result.best_config.d_out == 16
        assert result.best_config.n_members == 3

    def test_tie_resolves_to_smaller_d(self):
        # trivially separable: both cells reach identical (perfect) accuracy
        data = self._easy_data()
        grid = GridSpec(d_values=(20, 100), n_values=(4,), folds=3)
        base = EnsembleConfig(n_members=1, d_out=1)
        result = grid_search(data, grid, base, seed=5)
        accs = [c.mean_accuracy for c in result.table]
        assert accs[0] == accs[1]
        assert result.best_config.d_out == 20

    def test_tie_resolves_to_smaller_n(self):
        data = self._easy_data()
        grid = GridSpec(d_values=(24,), n_values=(4, 8), folds=3)
        base = EnsembleConfig(n_members=1, d_out=1)
        result = grid_search(data, grid, base, seed=5)
        accs = [c.mean_accuracy for c in result.table]
        assert accs[0] == accs[1]
        assert result.best_config.n_members == 4

    def test_reproducible(self):
        data = self._easy_data(sep=2.0)
        grid = GridSpec(d_values=(8, 16), n_values=(2,), folds=3)
        base = EnsembleConfig(n_members=1, d_out=1)
        a = grid_search(data, grid, base, seed=6)
        b = grid_search(data, grid, base, seed=6)
        assert a.table == b.table
        assert a.best_config == b.best_config

    def test_parallel_matches_sequential(self):
        data = self._easy_data(sep=2.0)
        grid = GridSpec(d_values=(8, 16), n_values=(2, 3), folds=3)
        base = EnsembleConfig(n_members=1, d_out=1)
        seq = grid_search(data, grid, base, seed=6, n_workers=1)
        par = grid_search(data, grid, base, seed=6, n_workers=4)
        assert seq.table == par.table

    def test_unlabeled_rejected(self):
        fm = FeatureMatrix(values=np.zeros((6, 4), dtype=np.float32))
        with pytest.raises(InputError):
            grid_search(fm, GridSpec(d_values=(4,), n_values=(1,), folds=2),
                        EnsembleConfig(n_members=1, d_out=1), 0)

    def test_grid_spec_validation(self):
        with pytest.raises(ParameterError):
            GridSpec(d_values=(), n_values=(1,))
        with pytest.raises(ParameterError):
            GridSpec(folds=1)


class TestEvaluate:
    def _model_and_test(self, sep=25.0):
        data = synth_mixture(3, 40, 64, sep, seed=7)
        idx = np.arange(data.n_samples)
        tr = idx[idx % 2 == 0]
        te = idx[idx % 2 == 1]
        train = FeatureMatrix(values=data.values[tr], labels=data.labels[tr],
                              class_names=data.class_names)
        test = FeatureMatrix(values=data.values[te], labels=data.labels[te],
                             class_names=data.class_names)
        model = train_ensemble(train, None,
                               EnsembleConfig(n_members=5, d_out=24), 8)
        return model, test

    def test_perfect_predictions_give_diagonal_confusion(self):
        model, test = self._model_and_test(sep=50.0)
        report = evaluate(model, test)
        assert report.accuracy == 1.0
        assert np.array_equal(report.confusion,
                              np.diag(np.bincount(test.labels)))
        assert np.allclose(report.per_class_accuracy, 1.0)

    def test_confusion_rows_sum_to_class_counts(self):
        model, test = self._model_and_test(sep=1.0)
        report = evaluate(model, test)
        assert np.array_equal(report.confusion.sum(axis=1),
                              np.bincount(test.labels, minlength=3))

    def test_accuracy_matches_brute_recount(self):
        model, test = self._model_and_test(sep=3.0)
        report = evaluate(model, test)
        # independent recount: row-at-a-time argmax comparison
        hits = 0
        for i in range(test.n_samples):
            pred = ensemble_predict(model, test.values[i].astype(np.float64))
            hits += int(pred == test.labels[i])
        assert report.accuracy == hits / test.n_samples

    def test_pure_apart_from_timing(self):
        model, test = self._model_and_test(sep=3.0)
        a = evaluate(model, test)
        b = evaluate(model, test)
        assert a.accuracy == b.accuracy
        assert np.array_equal(a.confusion, b.confusion)

    def test_mismatches_rejected(self):
        from fastfood_ensemble import ConsistencyError, DimensionError
        model, test = self._model_and_test()
        bad_width = FeatureMatrix(values=np.zeros((4, 8), dtype=np.float32),
                                  labels=np.array([0, 1, 2, 0]))
        with pytest.raises(DimensionError):
            evaluate(model, bad_width)
        bad_labels = FeatureMatrix(
            values=test.values, labels=np.full(test.n_samples, 7))
        with pytest.raises(ConsistencyError):
            evaluate(model, bad_labels)
        with pytest.raises(InputError):
            evaluate(model, FeatureMatrix(values=test.values))


class TestBenchProjection:
    def test_counts_are_analytic_and_exact(self):
        report = bench_projection(100, 250, 3, seed=1)
        assert report.dense_scalars == 100 * 250
        assert report.dense_mults == 100 * 250
        # d_pad = 128, 2 stacks
        assert report.fastfood_scalars == 4 * 128 * 2
        assert report.fastfood_mults == 4 * 128 * 2
        assert report.fastfood_addsubs == 2 * 128 * 7 * 2

    def test_machine_independent_counts(self):
        a = bench_projection(64, 64, 3, seed=1)
        b = bench_projection(64, 64, 3, seed=2)
        assert (a.fastfood_mults, a.dense_mults) == (b.fastfood_mults, b.dense_mults)

    def test_times_positive(self):
        report = bench_projection(256, 256, 3, seed=3)
        assert report.fastfood_time > 0
        assert report.dense_time > 0

    def test_stored_scalar_ratio_at_six_backbone_width(self):
        report = bench_projection(7168, 7168, 3, seed=4, dense_cap_override=True)
        assert report.dense_scalars / report.fastfood_scalars >= 1000

    def test_cap_enforced_without_override(self):
        with pytest.raises(OracleSizeError):
            bench_projection(8192, 8192, 3, seed=1)

    def test_repetition_floor(self):
        with pytest.raises(ParameterError):
            bench_projection(64, 64, 2, seed=1)

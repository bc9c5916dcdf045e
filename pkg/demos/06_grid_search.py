#!/usr/bin/env python3
"""Selecting {D, N} by stratified cross-validation.

The full protocol sweeps D in {20, 100, 1K, 10K, 20K} and N in
{10, 20, 50}; this demo uses a reduced grid so it finishes in seconds.
Ties break toward the smaller (cheaper) D, then smaller N.
"""

from fastfood_ensemble import EnsembleConfig, GridSpec, grid_search, synth_mixture

data = synth_mixture(n_classes=4, n_per_class=25, m=256, separation=8.0, seed=3)
grid = GridSpec(d_values=(20, 100, 400), n_values=(5, 10), folds=5)
base = EnsembleConfig(n_members=1, d_out=1)  # D and N are overwritten per cell

result = grid_search(data, grid, base, seed=11)

print(f"{'D':>6} {'N':>4} {'fold accuracies':>38} {'mean':>7}")
for cell in result.table:
    folds = " ".join(f"{a:.3f}" for a in cell.fold_accuracies)
    print(f"{cell.d_out:>6} {cell.n_members:>4} {folds:>38} "
          f"{cell.mean_accuracy:>7.3f}")
best = result.best_config
print(f"\nselected: D={best.d_out}, N={best.n_members}")

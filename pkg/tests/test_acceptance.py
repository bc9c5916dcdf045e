"""Acceptance suite: one test per gate criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Tolerances are pinned here and nowhere else; wall-clock assertions use
ratios or generous absolute budgets only.
"""

import time

import numpy as np
import scipy.linalg

from fastfood_ensemble import (
    EnsembleConfig,
    FeatureMatrix,
    GridSpec,
    NonlinearityMode,
    TreeParams,
    apply_nonlinearity,
    bench_projection,
    dense_materialize,
    evaluate,
    exact_rbf,
    fwht,
    grid_search,
    project,
    sample_block,
    sample_phases,
    synth_mixture,
    train_ensemble,
    tree_predict_proba,
)
from fastfood_ensemble.cli import cli_dispatch
from fastfood_ensemble.rng import Stream, derive_seed


def _report(name: str, ok: bool) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}: {name}")
    return ok


def test_dense_oracle_equivalence():
    t0 = time.perf_counter()
    st = Stream(20240309)
    worst = 0.0
    for trial in range(100):
        m_in = 2 + int(st.uniforms(1)[0] * 999)  # <= 1000, d_pad <= 1024
        d_out = 1 + int(st.uniforms(1)[0] * 2.5 * 1024)
        block = sample_block(derive_seed(1, trial), m_in, d_out, 1.0)
        assert block.d_pad <= 1024
        x = st.normals(m_in)
        reference = dense_materialize(block) @ x
        err = np.linalg.norm(project(block, x) - reference)
        worst = max(worst, err / np.linalg.norm(reference))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30
    assert _report(
        f"dense-oracle equivalence (worst rel err {worst:.2e}, {elapsed:.1f}s)",
        ok,
    )


def test_wht_correctness():
    ok = True
    for d in (2, 4, 8, 16, 32):
        v = Stream(d).normals(d)
        naive = scipy.linalg.hadamard(d).astype(np.float64) @ v
        ok &= np.max(np.abs(fwht(v) - naive)) <= 1e-12
    for d in (2, 16, 128, 1024, 4096):
        v = Stream(d + 1).normals(d)
        bound = 1e-10 * d * np.linalg.norm(v)
        ok &= np.linalg.norm(fwht(fwht(v)) - d * v) <= bound
    assert _report("WHT matches naive multiply and involution", ok)


def test_kernel_approximation():
    m_in, sigma, n_pairs, n_seeds = 16, 4.0, 200, 20
    st = Stream(123)
    X = st.normals(n_pairs * m_in).reshape(n_pairs, m_in)
    Y = st.normals(n_pairs * m_in).reshape(n_pairs, m_in)
    ref = np.array([exact_rbf(x, y, sigma) for x, y in zip(X, Y)])
    mses = {}
    mae_1024 = None
    for D in (64, 256, 1024):
        errs = []
        for s in range(n_seeds):
            seed = derive_seed(999, s)
            block = sample_block(derive_seed(seed, 0), m_in, D, sigma)
            nl = NonlinearityMode.rbf_cos(
                sample_phases(derive_seed(seed, 1), D))
            fx = apply_nonlinearity(project(block, X), nl)
            fy = apply_nonlinearity(project(block, Y), nl)
            errs.append(np.sum(fx * fy, axis=1) - ref)
        errs = np.asarray(errs)
        mses[D] = float(np.mean(errs**2))
        if D == 1024:
            mae_1024 = float(np.mean(np.abs(errs)))
    ok = mses[64] >= mses[256] >= mses[1024] and mae_1024 <= 0.05
    assert _report(
        f"kernel approximation (MSE {mses[64]:.4f} >= {mses[256]:.4f} >= "
        f"{mses[1024]:.4f}; MAE@1024 {mae_1024:.4f} <= 0.05)",
        ok,
    )


def test_speed_memory_trend():
    t0 = time.perf_counter()
    report = bench_projection(8192, 8192, repetitions=5, seed=1,
                              dense_cap_override=True)
    elapsed = time.perf_counter() - t0
    speedup = report.dense_time / report.fastfood_time
    mult_ratio = report.dense_mults / report.fastfood_mults
    scalar_ratio = report.dense_scalars / report.fastfood_scalars
    ok = (speedup >= 10 and mult_ratio >= 500 and scalar_ratio >= 1000
          and elapsed < 120)
    assert _report(
        f"speed/memory trend (wall {speedup:.0f}x >= 10, multiplies "
        f"{mult_ratio:.0f}x >= 500, scalars {scalar_ratio:.0f}x >= 1000, "
        f"{elapsed:.1f}s)",
        ok,
    )


def test_end_to_end_desk_scale():
    t0 = time.perf_counter()
    data = synth_mixture(4, 100, 2048, 20.0, seed=42)
    tr_idx, te_idx = [], []
    for c in range(4):
        pos = np.nonzero(data.labels == c)[0]
        tr_idx.extend(pos[:50])
        te_idx.extend(pos[50:])
    train = FeatureMatrix(values=data.values[tr_idx], labels=data.labels[tr_idx],
                          class_names=data.class_names)
    test = FeatureMatrix(values=data.values[te_idx], labels=data.labels[te_idx],
                         class_names=data.class_names)
    model = train_ensemble(train, None,
                           EnsembleConfig(n_members=10, d_out=100),
                           master_seed=7)
    ens_acc = evaluate(model, test).accuracy
    Xte = test.values.astype(np.float64)
    member_accs = []
    for i in range(10):
        block = model.member_block(i)
        nl = model.member_nonlinearity(i)
        Z = apply_nonlinearity(project(block, Xte), nl)
        pred = np.argmax(tree_predict_proba(model.members[i].tree, Z), axis=1)
        member_accs.append(float(np.mean(pred == test.labels)))
    elapsed = time.perf_counter() - t0
    ok = (ens_acc >= max(member_accs) - 0.02
          and ens_acc >= np.mean(member_accs)
          and ens_acc > 0.60
          and elapsed < 60)
    assert _report(
        f"end-to-end desk scale (ensemble {ens_acc:.3f} vs best member "
        f"{max(member_accs):.3f}, mean {np.mean(member_accs):.3f}; "
        f"{elapsed:.1f}s < 60s)",
        ok,
    )


def test_cli_determinism(tmp_path, capsys):
    outputs = []
    for run in ("one", "two"):
        work = tmp_path / run
        work.mkdir()
        data = work / "data.dfel"
        model = work / "model.dfem"
        assert cli_dispatch(["synth", "--classes", "3", "--per-class", "20",
                             "--dims", "256", "--separation", "10",
                             "--seed", "5", "--out", str(data)]) == 0
        assert cli_dispatch(["train", "--in", str(data), "--d", "50",
                             "--n", "5", "--seed", "7",
                             "--out", str(model)]) == 0
        capsys.readouterr()
        assert cli_dispatch(["eval", "--model", str(model),
                             "--in", str(data)]) == 0
        eval_out = capsys.readouterr().out
        stripped = "\n".join(
            line for line in eval_out.splitlines() if "time" not in line
        )
        outputs.append((model.read_bytes(), stripped))
    ok = outputs[0][0] == outputs[1][0] and outputs[0][1] == outputs[1][1]
    assert _report(
        "CLI determinism (byte-identical models, reports modulo timing)", ok
    )


def test_grid_search_cells_and_ties():
    # full default grid on a tiny, trivially separable fixture
    data = synth_mixture(2, 5, 512, 50.0, seed=11)
    base = EnsembleConfig(n_members=1, d_out=1, tree=TreeParams(max_depth=2))
    result = grid_search(data, GridSpec(), base, seed=13)
    cells_ok = len(result.table) == 15
    # every cell is perfect, so the default-grid winner is the tie rule's
    all_tied = all(c.mean_accuracy == 1.0 for c in result.table)
    default_best_ok = (result.best_config.d_out == 20
                       and result.best_config.n_members == 10)

    # forced ties on dedicated two-cell grids
    tie_data = synth_mixture(3, 15, 16, 50.0, seed=4)
    tie_base = EnsembleConfig(n_members=1, d_out=1)
    r_d = grid_search(tie_data, GridSpec(d_values=(20, 100), n_values=(4,),
                                         folds=3), tie_base, seed=5)
    d_tie_ok = (r_d.table[0].mean_accuracy == r_d.table[1].mean_accuracy
                and r_d.best_config.d_out == 20)
    r_n = grid_search(tie_data, GridSpec(d_values=(24,), n_values=(4, 8),
                                         folds=3), tie_base, seed=5)
    n_tie_ok = (r_n.table[0].mean_accuracy == r_n.table[1].mean_accuracy
                and r_n.best_config.n_members == 4)

    ok = cells_ok and all_tied and default_best_ok and d_tie_ok and n_tie_ok
    assert _report(
        f"grid search (15 cells: {cells_ok}; ties to smaller D then N: "
        f"{default_best_ok and d_tie_ok and n_tie_ok})",
        ok,
    )

"""Command-line front end.

Subcommands: synth, subsample, concat, train, predict, eval, gridsearch,
bench. All randomness is controlled by --seed; failures print a single
machine-parsable ``error: <kind>: <message>`` line and exit 1 (usage
errors exit 2). Reports print as aligned text or CSV (--format csv).
The DFEL_THREADS environment variable caps grid-search parallelism.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import dataio
from .ensemble import (
    EnsembleConfig,
    ensemble_predict_proba,
    load_model,
    save_model,
    train_ensemble,
)
from .errors import FfelError
from .evalbench import GridSpec, bench_projection, evaluate, grid_search
from .tree import TreeParams


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def _read_any(path) -> dataio.FeatureMatrix:
    if str(path).endswith(".csv"):
        return dataio.read_features_csv(path)
    return dataio.read_features(path)


def _tree_params(args) -> TreeParams:
    return TreeParams(
        max_depth=args.depth,
        min_samples_leaf=args.min_samples_leaf,
        min_impurity_decrease=args.min_impurity_decrease,
    )


def _add_tree_flags(p):
    p.add_argument("--depth", type=int, default=10, help="tree max depth")
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--min-impurity-decrease", type=float, default=0.0)


def _add_proj_flags(p):
    p.add_argument("--sigma", type=float, default=1.0, help="kernel bandwidth")
    p.add_argument("--s-mode", choices=("chi", "unit"), default="chi",
                   help="row-rescaling mode (unit = ablation)")
    p.add_argument("--nonlinearity", choices=("identity", "rbf-cos"),
                   default="identity")


def _print_kv(pairs, fmt):
    if fmt == "csv":
        print(",".join(str(k) for k, _ in pairs))
        print(",".join(str(v) for _, v in pairs))
    else:
        width = max(len(str(k)) for k, _ in pairs)
        for k, v in pairs:
            print(f"{k:<{width}}  {v}")


def _cmd_synth(args) -> int:
    fm = dataio.synth_mixture(
        args.classes, args.per_class, args.dims, args.separation, args.seed
    )
    dataio.write_features(fm, args.out)
    print(f"wrote {fm.n_samples} x {fm.n_dims} features to {args.out}")
    return 0


def _cmd_subsample(args) -> int:
    fm = _read_any(getattr(args, "in"))
    sub = dataio.stratified_subsample(fm, args.per_class, args.seed)
    dataio.write_features(sub, args.out)
    print(f"wrote {sub.n_samples} x {sub.n_dims} features to {args.out}")
    return 0


def _cmd_concat(args) -> int:
    parts = [_read_any(p) for p in args.inputs]
    fm = dataio.concat_features(parts)
    dataio.write_features(fm, args.out)
    print(f"wrote {fm.n_samples} x {fm.n_dims} features to {args.out}")
    return 0


def _cmd_train(args) -> int:
    train = _read_any(getattr(args, "in"))
    val = _read_any(args.val) if args.val else None
    config = EnsembleConfig(
        n_members=args.n,
        d_out=args.d,
        sigma=args.sigma,
        nonlinearity=args.nonlinearity,
        tree=_tree_params(args),
        weighting=args.weighting,
        s_mode=args.s_mode,
    )
    t0 = time.perf_counter()
    model = train_ensemble(train, val, config, args.seed)
    train_time = time.perf_counter() - t0
    save_model(model, args.out)
    print(f"wrote model ({args.n} members, D={args.d}) to {args.out}")
    print(f"train_time_s  {train_time:.3f}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    fm = _read_any(getattr(args, "in"))
    proba = ensemble_predict_proba(model, fm.values.astype(np.float64))
    pred = np.argmax(proba, axis=1)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        header = ["prediction"] + [f"prob_{c}" for c in model.class_labels]
        print(",".join(header), file=out)
        for p, row in zip(pred, proba):
            fields = [model.class_labels[p]] + [repr(float(v)) for v in row]
            print(",".join(fields), file=out)
    finally:
        if args.out:
            out.close()
    return 0


def _eval_pairs(report, class_labels):
    pairs = [("accuracy", repr(report.accuracy))]
    for name, acc in zip(class_labels, report.per_class_accuracy):
        pairs.append((f"accuracy[{name}]", repr(float(acc))))
    for i, name in enumerate(class_labels):
        row = " ".join(str(v) for v in report.confusion[i])
        pairs.append((f"confusion[{name}]", row))
    pairs.append(("train_time_s", f"{report.train_time:.3f}"))
    pairs.append(("test_time_s", f"{report.test_time:.3f}"))
    return pairs


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    test = _read_any(getattr(args, "in"))
    report = evaluate(model, test)
    _print_kv(_eval_pairs(report, model.class_labels), args.format)
    return 0


def _cmd_gridsearch(args) -> int:
    train = _read_any(getattr(args, "in"))
    grid = GridSpec(d_values=args.d_values, n_values=args.n_values,
                    folds=args.folds)
    base = EnsembleConfig(
        n_members=grid.n_values[0],
        d_out=grid.d_values[0],
        sigma=args.sigma,
        nonlinearity=args.nonlinearity,
        tree=_tree_params(args),
        s_mode=args.s_mode,
    )
    result = grid_search(train, grid, base, args.seed)
    best = result.best_config
    if args.format == "csv":
        print("d,n,mean_accuracy,best")
        for cell in result.table:
            flag = int(cell.d_out == best.d_out and cell.n_members == best.n_members)
            print(f"{cell.d_out},{cell.n_members},{cell.mean_accuracy!r},{flag}")
    else:
        print(f"{'D':>8} {'N':>5} {'mean_acc':>10}  best")
        for cell in result.table:
            flag = "*" if (cell.d_out == best.d_out
                           and cell.n_members == best.n_members) else ""
            print(f"{cell.d_out:>8} {cell.n_members:>5} "
                  f"{cell.mean_accuracy:>10.4f}  {flag}")
    print(f"best: D={best.d_out} N={best.n_members}")
    return 0


def _cmd_bench(args) -> int:
    report = bench_projection(
        args.m, args.d, args.reps, args.seed,
        dense_cap_override=args.dense_cap_override,
    )
    pairs = [
        ("m_in", report.m_in),
        ("d_out", report.d_out),
        ("fastfood_time_s", repr(report.fastfood_time)),
        ("dense_time_s", repr(report.dense_time)),
        ("speedup", f"{report.dense_time / report.fastfood_time:.2f}"),
        ("fastfood_scalars", report.fastfood_scalars),
        ("dense_scalars", report.dense_scalars),
        ("scalar_ratio", f"{report.dense_scalars / report.fastfood_scalars:.2f}"),
        ("fastfood_mults", report.fastfood_mults),
        ("dense_mults", report.dense_mults),
        ("mult_ratio", f"{report.dense_mults / report.fastfood_mults:.2f}"),
        ("fastfood_addsubs", report.fastfood_addsubs),
        ("dense_addsubs", report.dense_addsubs),
    ]
    _print_kv(pairs, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffel",
        description="Fastfood-projected decision-tree ensembles over deep features",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic Gaussian-mixture feature file")
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--dims", type=int, default=2048)
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("subsample", help="stratified n-per-class subsample")
    p.add_argument("--in", required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_subsample)

    p = sub.add_parser("concat", help="concatenate feature files along dims")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_concat)

    p = sub.add_parser("train", help="train an ensemble model")
    p.add_argument("--in", required=True)
    p.add_argument("--val", default=None)
    p.add_argument("--d", type=int, required=True, help="projection dimension D")
    p.add_argument("--n", type=int, required=True, help="ensemble size N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighting", choices=("validation-accuracy", "uniform"),
                   default="validation-accuracy")
    _add_proj_flags(p)
    _add_tree_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="per-row consensus probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="accuracy / confusion report on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gridsearch", help="cross-validated {D, N} grid search")
    p.add_argument("--in", required=True)
    p.add_argument("--d-values", type=_parse_int_list,
                   default=(20, 100, 1000, 10000, 20000))
    p.add_argument("--n-values", type=_parse_int_list, default=(10, 20, 50))
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_proj_flags(p)
    _add_tree_flags(p)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_gridsearch)

    p = sub.add_parser("bench", help="Fastfood vs dense projection benchmark")
    p.add_argument("--m", type=int, required=True, help="input dimension")
    p.add_argument("--d", type=int, required=True, help="output dimension")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dense-cap-override", action="store_true",
                   help="allow a dense side beyond the oracle memory cap")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_bench)

    return parser


def cli_dispatch(argv) -> int:
    """Run one CLI invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FfelError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io-error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""Command-line entry point.

Verbs: gen-corpus, train, validate, select, simulate, power, bench,
pipeline.  Every artifact-producing run writes a JSON manifest beside
its output recording the verb, the fully resolved options, the seed,
and library versions, which is enough to rebuild the artifact
byte-for-byte.  Flags override an optional flat key=value file passed
with --config.  Usage problems exit with status 2; runtime failures
remove partial outputs and exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys

import numpy as np

from . import __version__
from .baselines import BackwardSelector, ExhaustiveSelector, ForwardSelector, LassoSelector
from .corpus import GenConfig, build_corpus, load_corpus, save_corpus
from .evaluate import (
    StudyGrid,
    padded_validation,
    run_confusion_study,
    run_power_study,
    run_timing_bench,
    write_confusion_csv,
    write_power_csv,
    write_timing_csv,
)
from .exceptions import ConfigInvalid, VarselError
from .network import TrainConfig, save_weights
from .network import train as train_network
from .pipeline import PipelineSpec, drop_missing, load_csv, run_selection_report, write_report_csv
from .selection import NeuralNetSelector, load_selector_model

# Verbs whose output is driven by pseudorandomness and therefore
# require an explicit --seed.
SEEDED_VERBS = {"gen-corpus", "train", "simulate", "power", "bench"}

_INT_KEYS = {"count", "pmax", "seed", "epochs", "batch", "reps", "n", "p",
             "threads", "fixed_p", "folds"}
_FLOAT_KEYS = {"lr", "threshold", "corr_threshold", "sigma2", "lasso_lambda"}


def _int_list(text):
    return tuple(int(v) for v in str(text).split(","))


def _float_list(text):
    return tuple(float(v) for v in str(text).split(","))


def _str_list(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _parse_sigma2_law(text):
    parts = str(text).split(":")
    if parts[0] == "fixed" and len(parts) == 2:
        return ("fixed", float(parts[1]))
    if parts[0] == "log-uniform" and len(parts) == 3:
        return ("log-uniform", float(parts[1]), float(parts[2]))
    raise ConfigInvalid(
        f"bad sigma2 law {text!r}; use fixed:V or log-uniform:LO:HI"
    )


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="varsel",
        description="Variable selection for linear regression: train and "
                    "apply a neural selector, run the classical baselines, "
                    "and reproduce the simulation studies.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, out_required=True):
        p.add_argument("--out", required=out_required, help="output artifact path")
        p.add_argument("--config", help="flat key=value defaults file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; results do not depend on this")

    p = sub.add_parser("gen-corpus", help="generate a training/validation corpus")
    common(p)
    p.add_argument("--count", type=int, help="number of records")
    p.add_argument("--pmax", type=int, default=100, help="padded width")
    p.add_argument("--fixed-p", type=int, dest="fixed_p",
                   help="pin every record to this predictor count")
    p.add_argument("--n-range", type=_int_list, default=(20, 2000),
                   help="lo,hi sample-size range")
    p.add_argument("--sigma2-law", type=_parse_sigma2_law,
                   default=("log-uniform", 0.01, 0.5),
                   help="fixed:V or log-uniform:LO:HI")

    p = sub.add_parser("train", help="train a selector network on a corpus")
    common(p)
    p.add_argument("--corpus", help="corpus file from gen-corpus")
    p.add_argument("--arch", type=_int_list, help="layer widths, e.g. 10,100,10")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, default=1e-2, help="learning rate")
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--clip", type=float, default=None,
                   help="winsorize network inputs to [-clip, clip]")

    p = sub.add_parser("validate", help="class-conditional accuracy of a model on a corpus")
    common(p)
    p.add_argument("--model", help="weights file")
    p.add_argument("--corpus", help="validation corpus file")
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("select", help="run the trained selector on a CSV dataset")
    common(p)
    p.add_argument("--model", help="weights file")
    p.add_argument("--data", help="CSV with header row")
    p.add_argument("--target", help="response column name")
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("simulate", help="confusion study over an (n, sigma2) grid")
    common(p)
    p.add_argument("--model", help="weights file (needed when methods include ann)")
    p.add_argument("--methods", type=_str_list,
                   default=("ann", "lasso", "forward", "backward", "aic", "bic"))
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--n-levels", type=_int_list, default=(50, 250, 1000))
    p.add_argument("--sigma2-levels", type=_float_list, default=(0.01, 0.1, 0.5))
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("power", help="selection rate along a coefficient ladder")
    common(p)
    p.add_argument("--model", help="weights file (needed when methods include ann)")
    p.add_argument("--methods", type=_str_list,
                   default=("ann", "lasso", "forward", "backward", "aic", "bic"))
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--sigma2", type=float, default=0.01)
    p.add_argument("--betas", type=_float_list,
                   default=(1.0, 0.5, 0.25, 0.2, 0.15, 0.1, 0.05, 0.025, 0.01, 0.0))
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("bench", help="per-call selection timing")
    common(p)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--n-levels", type=_int_list, default=(100, 400, 1600))
    p.add_argument("--p", type=int, default=10)

    p = sub.add_parser("pipeline", help="preprocess a CSV and report all methods")
    common(p)
    p.add_argument("--model", help="weights file")
    p.add_argument("--data", help="CSV with header row")
    p.add_argument("--target", help="response column name")
    p.add_argument("--log-columns", type=_str_list, default=(),
                   help="columns to transform with log(x+1)")
    p.add_argument("--corr-threshold", type=float, default=0.90)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--lasso-seed", type=int, default=0,
                   help="fold shuffling seed for the LASSO cross-validation")
    return parser


def _coerce(key, value):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in ("n_range", "n_levels", "arch"):
        return _int_list(value)
    if key in ("sigma2_levels", "betas"):
        return _float_list(value)
    if key in ("methods", "log_columns"):
        return _str_list(value)
    if key == "sigma2_law":
        return _parse_sigma2_law(value)
    return value


def _apply_config(parser, args, argv):
    """Fill options from the --config file without overriding flags."""
    if not args.config:
        return
    given = {a.split("=")[0].lstrip("-").replace("-", "_")
             for a in argv if a.startswith("--")}
    try:
        with open(args.config) as source:
            pairs = [line.strip() for line in source
                     if line.strip() and not line.strip().startswith("#")]
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for pair in pairs:
        if "=" not in pair:
            parser.error(f"config line {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        dest = key.strip().replace("-", "_")
        if not hasattr(args, dest) or dest in ("verb", "config"):
            parser.error(f"config key {key.strip()!r} unknown for verb {args.verb}")
        if dest in given:
            continue  # explicit flag wins
        try:
            setattr(args, dest, _coerce(dest, value.strip()))
        except (ValueError, ConfigInvalid) as exc:
            parser.error(f"config key {key.strip()!r}: {exc}")


def _require(parser, args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            parser.error(f"{args.verb} requires --{name.replace('_', '-')}")


def _manifest_path(out):
    return str(out) + ".manifest.json"


def _write_manifest(args, extra=None):
    options = {k: v for k, v in vars(args).items() if k not in ("verb", "config")}
    payload = {
        "verb": args.verb,
        "options": {k: list(v) if isinstance(v, tuple) else v
                    for k, v in options.items()},
        "seed": getattr(args, "seed", None),
        "versions": {
            "varsel": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    if extra:
        payload["result"] = extra
    with open(_manifest_path(args.out), "w") as sink:
        json.dump(payload, sink, indent=2, sort_keys=True)
        sink.write("\n")


def _selectors_for(args, parser):
    chosen = {}
    for name in args.methods:
        if name == "ann":
            _require(parser, args, "model")
            model = load_selector_model(args.model, threshold=args.threshold)
            chosen[name] = NeuralNetSelector(model)
        elif name == "lasso":
            chosen[name] = LassoSelector(seed=args.seed or 0)
        elif name == "forward":
            chosen[name] = ForwardSelector()
        elif name == "backward":
            chosen[name] = BackwardSelector()
        elif name in ("aic", "bic"):
            chosen[name] = ExhaustiveSelector(name)
        else:
            parser.error(f"unknown method {name!r}")
    return chosen


def _run_gen_corpus(args, parser):
    _require(parser, args, "count", "seed")
    cfg = GenConfig(count=args.count, master_seed=args.seed, p_max=args.pmax,
                    n_range=tuple(args.n_range), sigma2_law=args.sigma2_law)
    corpus = build_corpus(cfg, fixed_p=args.fixed_p, threads=args.threads)
    save_corpus(corpus, args.out)
    _write_manifest(args, {"records": len(corpus), "redraws": corpus.redraws})
    print(f"wrote {len(corpus)} records to {args.out}")


def _run_train(args, parser):
    _require(parser, args, "corpus", "arch", "epochs", "seed")
    corpus = load_corpus(args.corpus)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed, learning_rate=args.lr,
                      batch_size=args.batch, optimizer=args.optimizer,
                      input_clip=args.clip)
    params, report = train_network(corpus, args.arch, cfg)
    save_weights(params, args.out)
    _write_manifest(args, {"final_loss": report.final_loss,
                           "wall_clock_seconds": report.wall_clock_seconds})
    print(f"trained {list(args.arch)} for {args.epochs} epochs, "
          f"final loss {report.final_loss:.6f}")


def _run_validate(args, parser):
    _require(parser, args, "model", "corpus")
    model = load_selector_model(args.model, threshold=args.threshold)
    corpus = load_corpus(args.corpus, role="validation")
    rates, matrix = padded_validation(model, corpus)
    with open(args.out, "w") as sink:
        sink.write("metric,value\n")
        sink.write(f"actualNegativeRate,{rates.cn:.6f}\n")
        sink.write(f"actualPositiveRate,{rates.cp:.6f}\n")
        sink.write(f"falsePositiveRate,{rates.fp:.6f}\n")
        sink.write(f"falseNegativeRate,{rates.fn:.6f}\n")
        sink.write(f"negatives,{rates.negatives}\n")
        sink.write(f"positives,{rates.positives}\n")
    _write_manifest(args, {"actual_negative_rate": rates.cn,
                           "actual_positive_rate": rates.cp})
    print(f"actual-negative {rates.cn:.4f}, actual-positive {rates.cp:.4f} "
          f"on {len(corpus)} records")


def _run_select(args, parser):
    _require(parser, args, "model", "data", "target")
    model = load_selector_model(args.model, threshold=args.threshold)
    frame = load_csv(args.data, target_column=args.target)
    frame, removed = drop_missing(frame)
    names = [n for n in frame.names if n != args.target]
    x = np.column_stack([frame.column(n) for n in names])
    y = frame.column(args.target)
    result = NeuralNetSelector(model).select(x, y)
    with open(args.out, "w") as sink:
        sink.write("variable,selected,score\n")
        for name, bit, score in zip(names, result.mask, result.scores):
            sink.write(f"{name},{'yes' if bit else 'no'},{score:.6f}\n")
    _write_manifest(args, {"selected": int(result.mask.sum()),
                           "rows_dropped": removed + frame.dropped_rows})
    print(f"selected {int(result.mask.sum())} of {len(names)} variables")


def _run_simulate(args, parser):
    _require(parser, args, "seed")
    selectors = _selectors_for(args, parser)
    grid = StudyGrid(n_levels=tuple(args.n_levels),
                     sigma2_levels=tuple(args.sigma2_levels),
                     reps=args.reps, seed=args.seed, p=args.p)
    results = run_confusion_study(selectors, grid, threads=args.threads)
    write_confusion_csv(results, grid, selectors, args.out)
    _write_manifest(args)
    print(f"wrote {len(results)} cells to {args.out}")


def _run_power(args, parser):
    _require(parser, args, "seed")
    selectors = _selectors_for(args, parser)
    curve = run_power_study(selectors, betas=args.betas, n=args.n,
                            sigma2=args.sigma2, reps=args.reps,
                            seed=args.seed, p=args.p)
    write_power_csv(curve, args.out)
    _write_manifest(args)
    print(f"wrote {len(curve.betas)} ladder points to {args.out}")


def _run_bench(args, parser):
    _require(parser, args, "seed")
    table = run_timing_bench(n_levels=tuple(args.n_levels), p=args.p,
                             reps=args.reps, seed=args.seed)
    write_timing_csv(table, args.out)
    _write_manifest(args)
    for method in table.methods:
        times = ", ".join(f"n={n}: {table.medians[(method, n)] * 1e3:.2f} ms"
                          for n in table.n_levels)
        print(f"{method:>8}: {times}")


def _run_pipeline(args, parser):
    _require(parser, args, "model", "data", "target")
    model = load_selector_model(args.model, threshold=args.threshold)
    frame = load_csv(args.data, target_column=args.target)
    spec = PipelineSpec(target=args.target, log_columns=args.log_columns,
                        corr_threshold=args.corr_threshold)
    report = run_selection_report(frame, spec, model, lasso_seed=args.lasso_seed)
    write_report_csv(report, args.out)
    _write_manifest(args, {
        "rows_used": report.rows_used,
        "rows_dropped_missing": report.rows_dropped_missing,
        "pruned": [[a.dropped, a.kept, a.pair_r] for a in report.prune_actions],
    })
    for action in report.prune_actions:
        print(f"pruned {action.dropped} (|r|={abs(action.pair_r):.2f} "
              f"with {action.kept})")
    print(f"report on {len(report.variables)} variables written to {args.out}")


_RUNNERS = {
    "gen-corpus": _run_gen_corpus,
    "train": _run_train,
    "validate": _run_validate,
    "select": _run_select,
    "simulate": _run_simulate,
    "power": _run_power,
    "bench": _run_bench,
    "pipeline": _run_pipeline,
}


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    _apply_config(parser, args, argv)
    if args.verb in SEEDED_VERBS and args.seed is None:
        parser.error(f"{args.verb} requires --seed")
    artifacts = [args.out, _manifest_path(args.out)]
    try:
        _RUNNERS[args.verb](args, parser)
    except (VarselError, OSError) as exc:
        for path in artifacts:
            if path and os.path.exists(path):
                os.unlink(path)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

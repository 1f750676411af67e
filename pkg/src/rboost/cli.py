"""Command line: ``rboost train | predict | eval``.

Exit status is 0 on success, 1 for usage errors and 2 for bad data or
model files.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .boost import ALGORITHMS, TrainConfig, train
from .data import FORMATS, DataError, load_dataset
from .evaluation import emit_curves, misclassification_count, pvalue_two_proportion
from .model_io import ModelFormatError, load_model, save_model

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="dataset file")
    p.add_argument("--format", choices=FORMATS, default=None, help="dataset format")
    p.add_argument("--header", action="store_true", help="CSV file has a header row")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rboost", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    t = sub.add_parser("train", help="fit a boosted model")
    _add_data_args(t)
    t.add_argument("--algo", choices=ALGORITHMS, required=True)
    t.add_argument("--trees", type=int, required=True, metavar="J",
                   help="terminal nodes per tree")
    t.add_argument("--shrinkage", type=float, required=True, metavar="NU")
    t.add_argument("--iters", type=int, required=True, metavar="M")
    t.add_argument("--test", help="test file (same format) for error curves")
    t.add_argument("--eval-stride", type=int, default=1, metavar="S")
    t.add_argument("--min-leaf", type=int, default=1, metavar="L")
    t.add_argument("--early-stop", type=float, default=None, metavar="E",
                   help="stop when training loss < E (default 1e-10 * N)")
    t.add_argument("--curves", metavar="OUT.csv", help="write the metric log as CSV")
    t.add_argument("--model-out", required=True, metavar="PATH")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $RBOOST_THREADS or 1)")
    t.add_argument("-v", "--verbose", action="store_true", help="log every evaluation row")

    p = sub.add_parser("predict", help="write labels and class probabilities")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="error count of a model, or a two-proportion P-value")
    e.add_argument("--model")
    _add_data_args(e, required=False)
    e.add_argument("--pvalue", nargs=3, type=int, metavar=("ERR_A", "ERR_B", "N"),
                   help="P-value that B's error rate is below A's")
    return parser


def _need_format(args):
    if args.format is None:
        raise UsageError("rboost: --format is required with --data")


def _cmd_train(args) -> int:
    _need_format(args)
    config = TrainConfig(
        algorithm=args.algo, n_leaves=args.trees, shrinkage=args.shrinkage, n_iter=args.iters,
        early_stop_loss=args.early_stop, min_leaf=args.min_leaf, eval_stride=args.eval_stride,
        seed=args.seed, n_threads=args.threads,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(f"rboost train: {exc}") from None
    data = load_dataset(args.data, args.format, header=args.header)
    test = None
    if args.test:
        test = load_dataset(args.test, args.format, data.label_names, header=args.header,
                            n_features=data.n_features)
    model, log = train(data, test, config)
    save_model(model, args.model_out)
    if args.curves:
        emit_curves(log, args.curves)
    m, loss, errors, secs = log.rows[-1]
    msg = f"iterations {m}  train_loss {loss:.6g}  seconds {secs:.1f}"
    if errors is not None:
        msg += f"  test_errors {errors}/{test.n_samples}"
    print(msg)
    return EXIT_OK


def _cmd_predict(args) -> int:
    _need_format(args)
    model = load_model(args.model)
    data = load_dataset(args.data, args.format, header=args.header, n_features=model.n_features)
    proba = model.predict_proba(data.features)
    labels = proba.argmax(axis=1)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for c, row in zip(labels, proba):
            w.writerow([model.label_names[c], *(format(v, ".17g") for v in row)])
    return EXIT_OK


def _cmd_eval(args) -> int:
    if args.pvalue is not None:
        if args.model or args.data:
            raise UsageError("rboost eval: --pvalue cannot be combined with --model/--data")
        a, b, n = args.pvalue
        try:
            p = pvalue_two_proportion(a, b, n)
        except ValueError as exc:
            raise UsageError(f"rboost eval: {exc}") from None
        print(f"{p:.6g}")
        return EXIT_OK
    if not (args.model and args.data):
        raise UsageError("rboost eval: need --model and --data, or --pvalue A B N")
    _need_format(args)
    model = load_model(args.model)
    data = load_dataset(args.data, args.format, model.label_names, header=args.header,
                        n_features=model.n_features)
    errors = misclassification_count(model.predict(data.features), data.labels)
    print(f"errors {errors}  n {data.n_samples}  rate {errors / data.n_samples:.6g}")
    return EXIT_OK


COMMANDS = {"train": _cmd_train, "predict": _cmd_predict, "eval": _cmd_eval}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("rboost: missing command (train, predict or eval)")
        if getattr(args, "verbose", False):
            logging.basicConfig(level=logging.INFO, format="%(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelFormatError, ValueError) as exc:
        print(f"rboost: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"rboost: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface: train, predict, export, search, cv, bench.

Exit codes: 0 success, 1 usage error, 2 data/model error.  Every run
prints its fully resolved configuration so results are reproducible
from logs alone.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import kernels
from .core import Config, ConfigError, DataError
from .dense import ContractViolation, DenseClauseBank
from .executor import evaluate, train
from .export_c import export_program, export_rules_text
from .predictor import (RuleSet, compile_ruleset, predict_and_explain,
                        rule_votes, sparse_rule_votes)
from .dataio import (load_dense, load_model, load_sparse, save_model)
from .sparse import SparseClauseBank, SparseDataset
from .tuning import SearchSpace, cross_validate, random_search


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_hyperparams(p, *, require_data_shape=False):
    p.add_argument("--literals", type=int, default=None,
                   help="feature count (default: inferred from data)")
    p.add_argument("--clauses", type=int, default=20)
    p.add_argument("--classes", type=int, default=None,
                   help="class count (default: inferred from data)")
    p.add_argument("--s", type=float, default=3.0)
    p.add_argument("--threshold", type=int, default=15)
    p.add_argument("--budget", type=int, default=None,
                   help="literal budget per clause (default: unlimited)")
    p.add_argument("--boost", action="store_true",
                   help="always reinforce matching literals of firing clauses")
    p.add_argument("--blocks", type=int, default=None,
                   help="clause blocks (default: jobs if positive, else 4)")
    p.add_argument("--jobs", type=int, default=-1,
                   help="worker threads; -1 means all cores")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sparse", action="store_true",
                   help="treat --data as the sparse text format")


def _build_parser() -> _Parser:
    parser = _Parser(prog="tsetlinkit")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model")
    t.add_argument("--data", required=True)
    t.add_argument("--eval", dest="eval_path", default=None)
    t.add_argument("--epochs", type=int, default=1)
    t.add_argument("--save", default=None)
    _add_hyperparams(t)

    pr = sub.add_parser("predict", help="predict with a saved model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--explain", choices=["literal", "feature"], default=None)
    pr.add_argument("--out", default=None)

    ex = sub.add_parser("export", help="export a model as C99 source")
    ex.add_argument("--model", required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--prefix", default="tm")
    ex.add_argument("--rules-text", action="store_true",
                    help="emit human-readable rules instead of C")

    se = sub.add_parser("search", help="random hyperparameter search")
    se.add_argument("--data", required=True)
    se.add_argument("--space", required=True)
    se.add_argument("--trials", type=int, required=True)
    se.add_argument("--epochs", type=int, default=1)
    se.add_argument("--cv-k", type=int, default=None)
    _add_hyperparams(se)

    cv = sub.add_parser("cv", help="stratified k-fold cross-validation")
    cv.add_argument("--data", required=True)
    cv.add_argument("--k", type=int, required=True)
    cv.add_argument("--epochs", type=int, default=1)
    _add_hyperparams(cv)

    be = sub.add_parser("bench", help="timing table over clause/job counts")
    be.add_argument("--data", required=True)
    be.add_argument("--eval", dest="eval_path", default=None)
    be.add_argument("--clauses-list", default="10,100,1000")
    be.add_argument("--jobs-list", default="1,4")
    be.add_argument("--epochs", type=int, default=5)
    _add_hyperparams(be)

    return parser


def _load_data(path: str, sparse: bool):
    if sparse:
        return load_sparse(path)
    return load_dense(path)


def _sniff_sparse(path: str) -> bool:
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if line.strip():
                return line.startswith("#literals=")
    return False


def _data_shape(data):
    if isinstance(data, SparseDataset):
        labels = data.labels
        return data.n_literals, int(labels.max()) + 1
    x, y = data
    return x.shape[1], int(np.max(y)) + 1


def _resolve_config(args, data) -> tuple[Config, int]:
    literals, classes = _data_shape(data)
    if args.literals is not None:
        literals = args.literals
    if args.classes is not None:
        classes = args.classes
    n_jobs = args.jobs
    blocks = args.blocks
    if blocks is None:
        blocks = n_jobs if n_jobs > 0 else 4
    blocks = max(1, min(blocks, args.clauses))
    cfg = Config(
        n_literals=literals,
        n_clauses=args.clauses,
        n_classes=max(2, classes),
        s=args.s,
        threshold=args.threshold,
        n_literal_budget=args.budget,
        boost_true_positive=args.boost,
        seed=args.seed,
        n_blocks=blocks,
        negated_literals_enabled=not args.sparse,
    )
    return cfg, n_jobs


def _print_config(cfg: Config, n_jobs: int) -> None:
    parts = [f"{k}={v}" for k, v in asdict(cfg).items()]
    parts.append(f"n_jobs={n_jobs}")
    parts.append(f"backend={kernels.BACKEND_NAME}")
    print("config: " + " ".join(parts))


def _metric_line(m) -> str:
    if m.accuracy is None:
        return f"epoch {m.epoch} time_s {m.seconds:.3f}"
    return f"epoch {m.epoch} acc {m.accuracy:.4f} time_s {m.seconds:.3f}"


def _cmd_train(args) -> int:
    data = _load_data(args.data, args.sparse)
    eval_data = _load_data(args.eval_path, args.sparse) \
        if args.eval_path else None
    cfg, n_jobs = _resolve_config(args, data)
    _print_config(cfg, n_jobs)
    run = train(cfg, data, eval_data, n_epochs=args.epochs, n_jobs=n_jobs,
                epoch_callback=lambda m: print(_metric_line(m)))
    if args.save:
        save_model(run.model, args.save)
        print(f"saved {args.save}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    if isinstance(model, (DenseClauseBank, SparseClauseBank)):
        rs = compile_ruleset(model)
    else:
        rs = model
    sparse = _sniff_sparse(args.data)
    data = _load_data(args.data, sparse)
    lines = []
    correct = 0
    if sparse:
        if rs.negated_literals_enabled:
            raise DataError("sparse data requires a model trained "
                            "without negated literals")
        for ex in data.examples:
            cls = int(np.argmax(sparse_rule_votes(rs, ex)))
            lines.append(f"pred {cls}")
            correct += int(cls == ex.label)
        n = len(data.examples)
    else:
        x, labels = data
        for row, label in zip(x, labels):
            if args.explain:
                cls, expl = predict_and_explain(rs, row, level=args.explain)
                scores = ",".join(str(int(v)) for v in expl.scores)
                lines.append(f"pred {cls} scores {scores}")
            else:
                cls = int(np.argmax(rule_votes(rs, row)))
                lines.append(f"pred {cls}")
            correct += int(cls == label)
        n = x.shape[0]
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    print(f"accuracy {correct / n:.4f}")
    return 0


def _cmd_export(args) -> int:
    model = load_model(args.model)
    if isinstance(model, (DenseClauseBank, SparseClauseBank)):
        rs = compile_ruleset(model)
    else:
        rs = model
    if args.rules_text:
        text = export_rules_text(rs)
    else:
        text = export_program(rs, args.prefix)
    Path(args.out).write_text(text, encoding="ascii")
    print(f"wrote {args.out} ({rs.n_rules} rules)")
    return 0


def _cmd_search(args) -> int:
    data = _load_data(args.data, args.sparse)
    cfg, n_jobs = _resolve_config(args, data)
    _print_config(cfg, n_jobs)
    space = SearchSpace.parse(Path(args.space).read_text(encoding="ascii"))
    trials = random_search(space, cfg, data, args.trials, args.epochs,
                           args.seed, cv_k=args.cv_k, n_jobs=n_jobs)
    for rank, trial in enumerate(trials):
        params = " ".join(f"{k}={v}" for k, v in trial.params.items())
        print(f"rank {rank} trial {trial.index} acc {trial.accuracy:.4f} "
              f"{params}")
    return 0


def _cmd_cv(args) -> int:
    data = _load_data(args.data, args.sparse)
    cfg, n_jobs = _resolve_config(args, data)
    _print_config(cfg, n_jobs)
    report = cross_validate(cfg, data, args.k, args.epochs, args.seed,
                            n_jobs=n_jobs)
    for fold, acc in enumerate(report.fold_accuracies):
        print(f"fold {fold} acc {acc:.4f}")
    print(f"mean {report.mean:.4f} std {report.std:.4f}")
    return 0


def _cmd_bench(args) -> int:
    data = _load_data(args.data, args.sparse)
    eval_data = _load_data(args.eval_path, args.sparse) \
        if args.eval_path else None
    clauses_list = [int(v) for v in args.clauses_list.split(",")]
    jobs_list = [int(v) for v in args.jobs_list.split(",")]
    print(f"backend={kernels.BACKEND_NAME} epochs={args.epochs} "
          f"seed={args.seed}")
    header = "clauses " + " ".join(f"jobs={j}_s" for j in jobs_list) \
        + " " + " ".join(f"speedup_j{j}" for j in jobs_list[1:])
    print(header)
    for n_clauses in clauses_list:
        args.clauses = n_clauses
        seconds = []
        for jobs in jobs_list:
            args.jobs = jobs
            args.blocks = None
            cfg, n_jobs = _resolve_config(args, data)
            t0 = time.perf_counter()
            train(cfg, data, eval_data, n_epochs=args.epochs, n_jobs=n_jobs)
            seconds.append(time.perf_counter() - t0)
        speedups = [seconds[0] / s if s > 0 else float("inf")
                    for s in seconds[1:]]
        row = f"{n_clauses} " + " ".join(f"{s:.2f}" for s in seconds)
        if speedups:
            row += " " + " ".join(f"{sp:.2f}x" for sp in speedups)
        print(row)
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "export": _cmd_export,
    "search": _cmd_search,
    "cv": _cmd_cv,
    "bench": _cmd_bench,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (DataError, ConfigError, ContractViolation, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

"""Command-line front end: ``fuzzybayes {fuzzify,train,infer,benchmark}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 benchmark in which every dataset failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import platform
import sys

import numpy as np

from . import __version__
from .bundle import BundleError, load_bundle, save_bundle
from .config import ConfigError, RunConfig
from .evalharness.benchmark import BenchmarkConfig, run_benchmark
from .evalharness.datasets import DataError, DatasetSchema, load_dataset
from .fuzzify import aggregate_matrix

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_BENCHMARK = 0, 1, 2, 3

logger = logging.getLogger("fuzzybayes")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _load_config(args) -> RunConfig:
    if args.config is None:
        return RunConfig.from_dict({}, os.getcwd(), args.seed)
    return RunConfig.load(args.config, args.seed)


def read_table(path, delimiter=","):
    """Header and ``(line number, row)`` pairs; an empty file yields ``([], [])``."""
    try:
        with open(path, newline="") as fh:
            rows = [(i, r) for i, r in enumerate(csv.reader(fh, delimiter=delimiter), 1) if any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        return [], []
    header = [h.strip() for h in rows[0][1]]
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
    return header, rows[1:]


def numeric_columns(path, header, rows, names) -> np.ndarray:
    missing = [n for n in names if n not in header]
    if missing:
        raise DataError(f"{path}: missing columns {missing} (header: {header})")
    cols = [header.index(n) for n in names]
    X = np.empty((len(rows), len(cols)))
    for r, (lineno, row) in enumerate(rows):
        for k, j in enumerate(cols):
            try:
                X[r, k] = float(row[j])
            except ValueError:
                raise DataError(f"{path}:{lineno}: column {names[k]!r}: non-numeric value {row[j]!r}") from None
            if not np.isfinite(X[r, k]):
                raise DataError(f"{path}:{lineno}: column {names[k]!r}: non-finite value {row[j]!r}")
    return X


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(out))
    os.makedirs(parent, exist_ok=True)
    with open(out, "w", newline="\n") as fh:
        fh.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_fuzzify(args) -> int:
    cfg = _load_config(args)
    names = cfg.indicator_names
    header, rows = read_table(args.input, cfg.delimiter)
    dim_cols = [f"{d.name}[{lv}]" for d in cfg.dimensions for lv in cfg.levels]
    if not header:
        _emit("", args.out)
        return EXIT_OK
    out_header = names + dim_cols
    lines = ["\t".join(out_header)]
    if rows:
        X = numeric_columns(args.input, header, rows, names)
        fuzz = cfg.fuzzifier().fit(X)
        index = {n: j for j, n in enumerate(names)}
        groups = [[index[i] for i in d.indicators] for d in cfg.dimensions]
        weights = [np.asarray(d.weights) / sum(d.weights) for d in cfg.dimensions]
        dims = aggregate_matrix(fuzz.memberships(X), groups, weights)
        cols = [header.index(n) for n in names]
        for (_, row), vecs in zip(rows, dims):
            raw = [row[j].strip() for j in cols]
            lines.append("\t".join(raw + [f"{v:.6f}" for v in vecs.ravel()]))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args)
    header, rows = read_table(args.input, cfg.delimiter)
    if not rows:
        raise DataError(f"{args.input}: no training records")
    if cfg.label not in header:
        raise DataError(f"{args.input}: label column {cfg.label!r} missing; training data must be labeled")
    X = numeric_columns(args.input, header, rows, cfg.indicator_names)
    li = header.index(cfg.label)
    y = np.array([row[li].strip() for _, row in rows], dtype=object)
    for (lineno, _), label in zip(rows, y):
        if label == "":
            raise DataError(f"{args.input}:{lineno}: unlabeled record")
        if label not in cfg.grades:
            raise DataError(f"{args.input}:{lineno}: unknown grade {label!r}; expected one of {list(cfg.grades)}")
    if cfg.batch_size is not None:
        order = np.random.default_rng(cfg.seed).permutation(len(y))
        X, y = X[order], y[order]
    model = cfg.classifier().fit(X, y.astype(str))
    for rec in model.history_:
        print(rec)
    final = model.history_[-1].delta
    status = "converged" if model.converged_ else "not converged"
    print(f"final delta={final:.6g} tau={cfg.learn.tau:g} ({status}) after {len(model.history_)} updates")
    out = args.out or os.path.join(cfg.output_dir, "model")
    with open(args.input, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    save_bundle(model, out, extra={
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "train_file": os.path.basename(args.input),
        "train_sha256": digest,
        "train_records": int(len(y)),
        "label": cfg.label,
    })
    print(f"model bundle written to {out}")
    return EXIT_OK


def format_distributions(model, X, ids, layout="rows") -> str:
    dists = model.predict_distribution(X)
    grades = model.network_.output.labels
    preds = model.predict(X)
    if layout == "table":
        blocks = []
        for rid, dist, pred in zip(ids, dists, preds):
            lines = [f"# record {rid}", "grade\tprobability"]
            lines += [f"{g}\t{p:.4f}" for g, p in zip(grades, dist.probs)]
            lines.append(f"predicted\t{pred}")
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + ("\n" if blocks else "")
    lines = ["\t".join(["record"] + [f"P({g})" for g in grades] + ["predicted"])]
    for rid, dist, pred in zip(ids, dists, preds):
        lines.append("\t".join([str(rid)] + [f"{p:.4f}" for p in dist.probs] + [str(pred)]))
    return "\n".join(lines) + "\n"


def cmd_infer(args) -> int:
    try:
        model, manifest = load_bundle(args.bundle)
    except BundleError as exc:
        raise ConfigError(str(exc)) from None
    delimiter = _load_config(args).delimiter if args.config else ","
    header, rows = read_table(args.input, delimiter)
    names = [s.name for s in model.fuzzifier_.specs_]
    if not rows:
        X = np.empty((0, len(names)))
    else:
        X = numeric_columns(args.input, header, rows, names)
    ids = list(range(1, len(rows) + 1))
    if "id" in header:
        ids = [row[header.index("id")].strip() for _, row in rows]
    if len(X) == 0:
        grades = model.network_.output.labels
        text = "" if args.layout == "table" else "\t".join(["record"] + [f"P({g})" for g in grades] + ["predicted"]) + "\n"
    else:
        text = format_distributions(model, X, ids, args.layout)
    _emit(text, args.out)
    return EXIT_OK


def _file_digest(path):
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError:
        return None


def cmd_benchmark(args) -> int:
    cfg = _load_config(args)
    bench = cfg.benchmark
    entries = bench.get("datasets", {})
    if not entries:
        raise ConfigError("benchmark.datasets is empty; nothing to run")
    data_dir = args.datasets or cfg.base_dir
    trials = int(args.trials or bench.get("trials", 10))
    models = tuple(bench.get("models", ("FBN", "NB")))
    bcfg = BenchmarkConfig(
        trials=trials,
        seed=cfg.seed,
        train_fraction=cfg.train_fraction,
        stratified=cfg.stratified,
        impute=str(bench.get("impute", "mean")),
        models=models,
        model_params=cfg.benchmark_model_params(),
        n_jobs=int(bench.get("n_jobs", 1)),
    )
    loaders, files = {}, {}
    for name, entry in entries.items():
        try:
            schema = DatasetSchema.from_dict(entry)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"benchmark.datasets.{name}: {exc}") from None
        path = os.path.join(data_dir, entry.get("file", entry.get("path", f"{name}.csv")))
        files[name] = path
        loaders[name] = (lambda p=path, s=schema, n=name: load_dataset(p, s, n))
    try:
        table = run_benchmark(loaders, trials, bcfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    out = args.out or os.path.join(cfg.output_dir, "benchmark")
    os.makedirs(out, exist_ok=True)
    import sklearn

    manifest = {
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "trial_seeds": [cfg.seed + t for t in range(trials)],
        "trials": trials,
        "models": list(models),
        "versions": {
            "fuzzybayes": __version__,
            "numpy": np.__version__,
            "scikit-learn": sklearn.__version__,
            "python": platform.python_version(),
        },
        "datasets": {
            r.name: {
                "file": os.path.basename(files[r.name]),
                "sha256": _file_digest(files[r.name]),
                "status": "ok" if r.ok else "failed",
                "error": r.error,
            }
            for r in table.rows
        },
    }
    for fname, text in (
        ("benchmark.txt", table.to_text()),
        ("benchmark.tsv", table.to_tsv()),
        ("manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"),
    ):
        with open(os.path.join(out, fname), "w", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(table.to_text())
    if table.failures:
        for name, err in table.failures.items():
            print(f"dataset {name} failed: {err}", file=sys.stderr)
    if len(table.failures) == len(table.rows):
        return EXIT_BENCHMARK
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzzybayes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="TOML run configuration (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", help="output file or directory")

    p = sub.add_parser("fuzzify", help="print per-dimension membership vectors for a score table")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_fuzzify)

    p = sub.add_parser("train", help="fit the rule base and CPT; write a model bundle")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="grade distributions for each record using a model bundle")
    p.add_argument("bundle")
    p.add_argument("input")
    p.add_argument("--layout", choices=("rows", "table"), default="rows")
    common(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("benchmark", help="repeated-split CEP comparison across datasets")
    p.add_argument("datasets", nargs="?", help="directory holding the dataset files")
    p.add_argument("--trials", type=int, help="override benchmark.trials")
    common(p)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Repeated-split benchmark: mean CEP per dataset and model, with ranks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from joblib import Parallel, delayed

from ..estimator import FuzzyBayesClassifier
from .baselines import FuzzyNaiveBayesClassifier, WeightedScoringClassifier
from .datasets import Dataset, SplitSpec, impute, split
from .metrics import compute_metrics

logger = logging.getLogger(__name__)


def make_fbn(ds: Dataset, params: Mapping | None = None):
    return FuzzyBayesClassifier(classes=ds.scale.labels, **dict(params or {}))


def make_nb(ds: Dataset, params: Mapping | None = None):
    return FuzzyNaiveBayesClassifier(classes=ds.scale.labels, **dict(params or {}))


def make_ws(ds: Dataset, params: Mapping | None = None):
    return WeightedScoringClassifier(classes=ds.scale.labels, **dict(params or {}))


#: Model name -> factory(dataset, params) returning an unfitted estimator.
MODEL_REGISTRY: dict[str, Callable] = {"FBN": make_fbn, "NB": make_nb, "WS": make_ws}


@dataclass(frozen=True)
class BenchmarkConfig:
    trials: int = 10
    seed: int = 0
    train_fraction: float = 0.8
    stratified: bool = True
    impute: str = "mean"
    models: tuple[str, ...] = ("FBN", "NB")
    model_params: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass
class DatasetResult:
    name: str
    mean_cep: dict = field(default_factory=dict)
    std_cep: dict = field(default_factory=dict)
    mean_accuracy: dict = field(default_factory=dict)
    ranks: dict = field(default_factory=dict)
    trial_cep: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class BenchmarkTable:
    models: tuple[str, ...]
    rows: list[DatasetResult]
    trials: int

    @property
    def failures(self) -> dict[str, str]:
        return {r.name: r.error for r in self.rows if not r.ok}

    def to_text(self) -> str:
        """Aligned table: one CEP line and one rank line per dataset."""
        name_w = max([len("Dataset"), *(len(r.name) for r in self.rows)]) + 2
        col_w = max(9, *(len(m) + 2 for m in self.models))
        lines = [f"{'Dataset':<{name_w}}" + "".join(f"{m:>{col_w}}" for m in self.models)]
        lines.append("-" * len(lines[0]))
        for r in self.rows:
            if not r.ok:
                lines.append(f"{r.name:<{name_w}}failed: {r.error}")
                continue
            lines.append(f"{r.name:<{name_w}}" + "".join(f"{r.mean_cep[m]:>{col_w}.4f}" for m in self.models))
            lines.append(f"{'Rank':<{name_w}}" + "".join(f"{r.ranks[m]:>{col_w}d}" for m in self.models))
        lines.append("")
        lines.append(f"mean classification error probability (CEP) over {self.trials} trials")
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        lines = ["dataset\tmodel\tmean_cep\tstd_cep\tmean_accuracy\trank\tstatus"]
        for r in self.rows:
            if not r.ok:
                lines.append(f"{r.name}\t\t\t\t\t\tfailed")
                continue
            for m in self.models:
                lines.append(
                    f"{r.name}\t{m}\t{r.mean_cep[m]:.6f}\t{r.std_cep[m]:.6f}\t"
                    f"{r.mean_accuracy[m]:.6f}\t{r.ranks[m]}\tok"
                )
        return "\n".join(lines) + "\n"


def run_trial(ds: Dataset, factory: Callable, params, trial: int, cfg: BenchmarkConfig) -> tuple[float, float]:
    """Fit on one seeded split; returns (accuracy, CEP) on the test part."""
    spec = SplitSpec(cfg.train_fraction, cfg.seed + trial, cfg.stratified)
    train, test = split(ds, spec)
    if cfg.impute == "drop":
        train, test = impute(train, "drop"), impute(test, "drop")
    else:
        test = impute(test, cfg.impute, reference=train)
        train = impute(train, cfg.impute)
    model = factory(ds, params).fit(train.X, train.labels)
    report = compute_metrics(model.predict(test.X), test.labels, ds.scale.labels)
    return report.accuracy, report.cep


def _rank(means: dict, order) -> dict:
    ranked = sorted(order, key=lambda m: (means[m], order.index(m)))
    return {m: i + 1 for i, m in enumerate(ranked)}


def run_benchmark(
    datasets: Mapping[str, Dataset | Callable[[], Dataset]],
    trials: int = 10,
    cfg: BenchmarkConfig | None = None,
    models: Mapping[str, Callable] | None = None,
) -> BenchmarkTable:
    """Mean CEP over ``trials`` seeded splits for every dataset and model.

    ``datasets`` values may be loaded datasets or zero-argument loaders; a
    dataset that fails to load or evaluate is reported, not raised. Ties in
    mean CEP rank by model registration order.
    """
    cfg = cfg or BenchmarkConfig(trials=trials)
    if models is None:
        try:
            models = {m: MODEL_REGISTRY[m] for m in cfg.models}
        except KeyError as exc:
            raise ValueError(f"unknown model {exc.args[0]!r}; known: {sorted(MODEL_REGISTRY)}") from None
    order = list(models)

    loaded: dict[str, Dataset] = {}
    rows: dict[str, DatasetResult] = {}
    for name, source in datasets.items():
        rows[name] = DatasetResult(name)
        try:
            loaded[name] = source() if callable(source) else source
        except Exception as exc:  # noqa: BLE001 - one bad dataset must not stop the rest
            logger.warning("dataset %s failed to load: %s", name, exc)
            rows[name].error = f"{type(exc).__name__}: {exc}"

    cells = [(name, m, t) for name in loaded for m in order for t in range(trials)]

    def run(cell):
        name, m, t = cell
        try:
            return cell, run_trial(loaded[name], models[m], cfg.model_params.get(m), t, cfg), None
        except Exception as exc:  # noqa: BLE001
            return cell, None, f"{type(exc).__name__}: {exc}"

    if cfg.n_jobs == 1:
        results = [run(c) for c in cells]
    else:
        results = Parallel(n_jobs=cfg.n_jobs)(delayed(run)(c) for c in cells)
    by_cell = {cell: (res, err) for cell, res, err in results}

    for name in loaded:
        row = rows[name]
        errors = [by_cell[(name, m, t)][1] for m in order for t in range(trials) if by_cell[(name, m, t)][1]]
        if errors:
            row.error = errors[0]
            continue
        for m in order:
            acc = np.array([by_cell[(name, m, t)][0][0] for t in range(trials)])
            cep = np.array([by_cell[(name, m, t)][0][1] for t in range(trials)])
            row.trial_cep[m] = cep.tolist()
            row.mean_cep[m] = float(cep.mean())
            row.std_cep[m] = float(cep.std())
            row.mean_accuracy[m] = float(acc.mean())
        row.ranks = _rank(row.mean_cep, order)
    return BenchmarkTable(tuple(order), [rows[n] for n in datasets], trials)

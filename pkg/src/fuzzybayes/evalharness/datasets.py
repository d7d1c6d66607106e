"""Delimited-file datasets, missing-value handling and seeded splits."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..core import LinguisticScale


class DataError(ValueError):
    """Input data is malformed or inconsistent with its schema."""


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str = "numeric"
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise ValueError(f"feature kind must be numeric or categorical, got {self.kind!r}")


@dataclass(frozen=True)
class DatasetSchema:
    """How to read one delimited file.

    ``columns`` restricts the features to the named header columns (all
    non-label, non-dropped columns by default). ``classes`` fixes the class
    order, lowest grade first.
    """

    label: str
    delimiter: str = ","
    categorical: tuple[str, ...] = ()
    drop: tuple[str, ...] = ()
    columns: tuple[str, ...] | None = None
    missing: tuple[str, ...] = ("", "?", "NA", "nan")
    classes: tuple[str, ...] | None = None

    @classmethod
    def from_dict(cls, d: dict) -> DatasetSchema:
        known = {"label", "delimiter", "categorical", "drop", "columns", "missing", "classes"}
        unknown = set(d) - known - {"file", "path", "name"}
        if unknown:
            raise ValueError(f"unknown schema keys {sorted(unknown)}")
        kw = {k: d[k] for k in known if k in d}
        for k in ("categorical", "drop", "columns", "missing", "classes"):
            if k in kw and kw[k] is not None:
                kw[k] = tuple(str(v) for v in kw[k])
        if "label" not in kw:
            raise ValueError("dataset schema needs a 'label' column")
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with NaN for missing cells, plus integer class codes.

    Categorical columns hold category codes (indices into
    ``FeatureSpec.categories``).
    """

    name: str
    X: np.ndarray
    y: np.ndarray
    features: tuple[FeatureSpec, ...]
    scale: LinguisticScale
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != len(self.features):
            raise DataError(f"{self.name}: feature matrix shape {self.X.shape} vs {len(self.features)} features")
        if len(self.y) != self.X.shape[0]:
            raise DataError(f"{self.name}: {len(self.y)} labels for {self.X.shape[0]} records")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= self.scale.arity):
            raise DataError(f"{self.name}: class codes outside the class scale")

    def __len__(self):
        return len(self.y)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.X)

    @property
    def labels(self) -> np.ndarray:
        """Class labels as strings."""
        return np.array(self.scale.labels, dtype=object)[self.y]

    @property
    def records(self) -> list[tuple[np.ndarray, str]]:
        return [(x, lab) for x, lab in zip(self.X, self.labels)]

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, X=self.X[idx], y=self.y[idx])


def _class_order(values: Sequence[str]) -> tuple[str, ...]:
    uniq = sorted(set(values))
    try:
        return tuple(sorted(uniq, key=float))
    except ValueError:
        return tuple(uniq)


def load_dataset(path, schema: DatasetSchema, name: str | None = None) -> Dataset:
    """Read a delimited file with a header row.

    Missing cells become NaN; nothing is dropped. Raises :class:`DataError`
    naming the offending line for malformed rows, non-numeric numeric cells
    and labels outside ``schema.classes``.
    """
    path = os.fspath(path)
    name = name or os.path.splitext(os.path.basename(path))[0]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=schema.delimiter))
    rows = [(i, r) for i, r in enumerate(rows, 1) if any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0][1]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no records after the header")
    if schema.label not in header:
        raise DataError(f"{path}: label column {schema.label!r} not in header")
    if schema.columns is not None:
        missing_cols = [c for c in schema.columns if c not in header]
        if missing_cols:
            raise DataError(f"{path}: columns {missing_cols} not in header")
        feature_names = list(schema.columns)
    else:
        skip = {schema.label, *schema.drop}
        feature_names = [h for h in header if h not in skip]
    col_index = [header.index(c) for c in feature_names]
    label_index = header.index(schema.label)
    missing_tokens = set(schema.missing)
    categorical = set(schema.categorical)

    raw_cols: list[list[str | None]] = [[] for _ in feature_names]
    raw_labels = []
    for lineno, row in body:
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        label = row[label_index].strip()
        if label in missing_tokens:
            raise DataError(f"{path}:{lineno}: missing class label")
        raw_labels.append(label)
        for k, j in enumerate(col_index):
            cell = row[j].strip()
            raw_cols[k].append(None if cell in missing_tokens else cell)

    classes = schema.classes or _class_order(raw_labels)
    try:
        scale = LinguisticScale(tuple(classes))
    except ValueError as exc:
        raise DataError(f"{path}: class labels {list(classes)}: {exc}") from None
    lookup = {c: i for i, c in enumerate(scale.labels)}
    y = np.empty(len(raw_labels), dtype=np.int64)
    for r, (label, (lineno, _)) in enumerate(zip(raw_labels, body)):
        if label not in lookup:
            raise DataError(f"{path}:{lineno}: unknown class label {label!r}")
        y[r] = lookup[label]

    X = np.full((len(body), len(feature_names)), np.nan)
    features = []
    for k, fname in enumerate(feature_names):
        cells = raw_cols[k]
        if fname in categorical:
            cats = tuple(sorted({c for c in cells if c is not None}))
            code = {c: i for i, c in enumerate(cats)}
            X[:, k] = [np.nan if c is None else code[c] for c in cells]
            features.append(FeatureSpec(fname, "categorical", cats))
        else:
            for r, cell in enumerate(cells):
                if cell is None:
                    continue
                try:
                    X[r, k] = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{body[r][0]}: column {fname!r}: non-numeric value {cell!r}") from None
                if not math.isfinite(X[r, k]):
                    raise DataError(f"{path}:{body[r][0]}: column {fname!r}: non-finite value {cell!r}")
            features.append(FeatureSpec(fname))
    return Dataset(name, X, y, tuple(features), scale, source=path)


def impute(ds: Dataset, strategy: str = "mean", reference: Dataset | None = None) -> Dataset:
    """Fill or drop missing cells.

    ``"mean"`` fills numeric columns with the column mean and categorical
    columns with the mode, both computed on ``reference`` (the training
    split; ``ds`` itself by default). ``"drop"`` removes incomplete records.
    """
    mask = ds.missing
    if strategy == "drop":
        return ds.subset(np.flatnonzero(~mask.any(axis=1)))
    if strategy != "mean":
        raise ValueError(f"impute strategy must be 'mean' or 'drop', got {strategy!r}")
    if not mask.any():
        return ds
    ref = ds if reference is None else reference
    X = ds.X.copy()
    for k, spec in enumerate(ds.features):
        col_mask = mask[:, k]
        if not col_mask.any():
            continue
        observed = ref.X[:, k][~np.isnan(ref.X[:, k])]
        if observed.size == 0:
            raise DataError(f"{ds.name}: column {spec.name!r} is entirely missing")
        if spec.kind == "categorical":
            values, counts = np.unique(observed, return_counts=True)
            fill = values[np.argmax(counts)]
        else:
            fill = observed.mean()
        X[col_mask, k] = fill
    return replace(ds, X=X)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _n_train(n: int, fraction: float) -> int:
    return int(math.floor(n * fraction + 1e-9))


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded shuffle then partition; ``floor(n * fraction)`` records go to train.

    Stratified mode allocates ``floor(n_c * fraction)`` per class and hands
    the remaining train slots to the classes with the largest fractional
    parts, so every class keeps its share within one record.
    """
    n = len(ds)
    rng = np.random.default_rng(spec.seed)
    total_train = _n_train(n, spec.train_fraction)
    if not spec.stratified:
        perm = rng.permutation(n)
        return ds.subset(np.sort(perm[:total_train])), ds.subset(np.sort(perm[total_train:]))
    classes, counts = np.unique(ds.y, return_counts=True)
    if np.any(counts < 2):
        bad = [ds.scale[c] for c in classes[counts < 2]]
        raise DataError(f"{ds.name}: classes {bad} have fewer than 2 records; cannot stratify")
    exact = counts * spec.train_fraction
    alloc = np.floor(exact + 1e-9).astype(int)
    remainder = total_train - alloc.sum()
    order = np.lexsort((np.arange(len(classes)), -(exact - alloc)))
    for i in order[: max(remainder, 0)]:
        alloc[i] += 1
    alloc = np.clip(alloc, 1, counts - 1)
    train_idx, test_idx = [], []
    for c, k in zip(classes, alloc):
        members = rng.permutation(np.flatnonzero(ds.y == c))
        train_idx.append(members[:k])
        test_idx.append(members[k:])
    return ds.subset(np.sort(np.concatenate(train_idx))), ds.subset(np.sort(np.concatenate(test_idx)))


def make_student_dataset(n: int, seed=0, noise: float = 5.0, n_sub: int = 2) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Simulated student records: ``3 * n_sub`` sub-indicator scores in [0, 100].

    Dimensions (academic, practice, moral) each average ``n_sub`` uniform
    scores; the ground-truth grade thresholds the mean of the three
    dimension scores plus Gaussian noise at 55 / 70 / 82. Returns
    ``(X, grades, column_names)`` with grades among ``p, m, g, e``.
    """
    rng = np.random.default_rng(seed)
    base = rng.uniform(30, 100, size=(n, 3))
    X = np.clip(base[:, :, None] + rng.normal(0, 8, size=(n, 3, n_sub)), 0, 100).reshape(n, -1)
    overall = X.reshape(n, 3, n_sub).mean(axis=(1, 2)) + rng.normal(0, noise, size=n)
    grades = np.array(["p", "m", "g", "e"])[np.digitize(overall, [55.0, 70.0, 82.0])]
    names = [f"{dim}{k + 1}" for dim in ("A", "P", "M") for k in range(n_sub)]
    return np.round(X, 1), grades, names

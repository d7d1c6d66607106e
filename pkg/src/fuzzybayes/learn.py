"""Maximum-likelihood fitting and online updating of the CPT."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .bnet import Cpt
from .core import LinguisticScale
from .rulebase import antecedent_index


@dataclass
class SufficientStats:
    """Counts of (parent tuple, grade) pairs; rows follow CPT tuple order."""

    parent_scales: tuple[LinguisticScale, ...]
    child: LinguisticScale
    counts: np.ndarray

    def __post_init__(self):
        self.parent_scales = tuple(self.parent_scales)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        n = int(np.prod([s.arity for s in self.parent_scales]))
        if self.counts.shape != (n, self.child.arity):
            raise ValueError(f"counts have shape {self.counts.shape}, expected {(n, self.child.arity)}")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @classmethod
    def empty(cls, parent_scales, child) -> SufficientStats:
        n = int(np.prod([s.arity for s in parent_scales]))
        return cls(tuple(parent_scales), child, np.zeros((n, child.arity), dtype=np.int64))

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def count(self, parents: Sequence[str], grade: str) -> int:
        idx = antecedent_index([s.index(p) for s, p in zip(self.parent_scales, parents)],
                               [s.arity for s in self.parent_scales])
        return int(self.counts[idx, self.child.index(grade)])

    def add(self, tuple_idx, grade_idx):
        np.add.at(self.counts, (np.asarray(tuple_idx, dtype=np.int64), np.asarray(grade_idx, dtype=np.int64)), 1)

    def copy(self) -> SufficientStats:
        return SufficientStats(self.parent_scales, self.child, self.counts.copy())


@dataclass(frozen=True)
class LearnConfig:
    smoothing: float = 1.0
    tau: float = 1e-3
    max_iters: int = 100

    def __post_init__(self):
        if self.smoothing < 0:
            raise ValueError(f"smoothing must be >= 0, got {self.smoothing}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


def mle_fit(stats: SufficientStats, cfg: LearnConfig, pseudo_counts: np.ndarray | None = None) -> Cpt:
    """Smoothed frequency ratio ``(n_ts + a) / (n_t + a * G)`` per cell.

    ``pseudo_counts`` (same shape as the counts) adds fractional prior
    observations, e.g. derived from the rule base. Rows left without any
    mass fall back to uniform.
    """
    counts = stats.counts.astype(float) + cfg.smoothing
    if pseudo_counts is not None:
        counts = counts + np.asarray(pseudo_counts, dtype=float)
    totals = counts.sum(axis=1, keepdims=True)
    G = stats.child.arity
    table = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 1.0 / G)
    return Cpt(stats.parent_scales, stats.child, table)


def encode_records(records, parent_scales, child) -> tuple[np.ndarray, np.ndarray]:
    """Turn ``(level tuple, grade)`` label records into index arrays.

    Raises ``KeyError`` on any unknown level or grade.
    """
    arities = [s.arity for s in parent_scales]
    tuples, grades = [], []
    for levels, grade in records:
        if len(levels) != len(parent_scales):
            raise KeyError(f"record {tuple(levels)} has {len(levels)} levels, expected {len(parent_scales)}")
        tuples.append(antecedent_index([s.index(lv) for s, lv in zip(parent_scales, levels)], arities))
        grades.append(child.index(grade))
    return np.array(tuples, dtype=np.int64), np.array(grades, dtype=np.int64)


def update_step(current: Cpt, stats: SufficientStats, batch, cfg: LearnConfig, pseudo_counts=None):
    """Accumulate ``batch`` into ``stats`` (in place) and refit.

    ``batch`` is either a sequence of ``(level tuple, grade)`` records or a
    pair of index arrays as produced by :func:`encode_records`. Returns the
    refitted CPT and the largest absolute cell change. An empty batch leaves
    the CPT untouched.
    """
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray):
        tuple_idx, grade_idx = batch
    else:
        tuple_idx, grade_idx = encode_records(batch, stats.parent_scales, stats.child)
    if len(tuple_idx) == 0:
        return current, 0.0
    stats.add(tuple_idx, grade_idx)
    new = mle_fit(stats, cfg, pseudo_counts)
    delta = float(np.max(np.abs(new.table - current.table)))
    return new, delta


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    batch_size: int
    delta: float

    def __str__(self):
        return f"iter={self.iteration}\tbatch={self.batch_size}\tdelta={self.delta:.6g}"


class FitResult(NamedTuple):
    cpt: Cpt
    log: list
    stats: SufficientStats
    converged: bool


def fit_until_converged(
    batches: Iterable,
    cfg: LearnConfig,
    parent_scales,
    child: LinguisticScale,
    initial: Cpt | None = None,
    stats: SufficientStats | None = None,
    pseudo_counts=None,
) -> FitResult:
    """Apply :func:`update_step` per batch until delta < tau or max_iters updates.

    The starting CPT defaults to the fit of the (possibly empty) starting
    statistics. Stops early when the stream runs out.
    """
    stats = SufficientStats.empty(parent_scales, child) if stats is None else stats.copy()
    cpt = initial if initial is not None else mle_fit(stats, cfg, pseudo_counts)
    log: list[IterationRecord] = []
    converged = False
    for i, batch in enumerate(batches, 1):
        size = len(batch[0]) if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray) else len(batch)
        cpt, delta = update_step(cpt, stats, batch, cfg, pseudo_counts)
        log.append(IterationRecord(i, size, delta))
        # an empty batch carries no evidence of convergence
        if size > 0 and delta < cfg.tau:
            converged = True
            break
        if i >= cfg.max_iters:
            break
    if not log:
        raise ValueError("fit_until_converged needs at least one batch")
    return FitResult(cpt, log, stats, converged)


def sample_from_cpt(cpt: Cpt, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` (tuple, grade) index pairs with uniformly distributed tuples."""
    tuples = rng.integers(cpt.n_tuples, size=n)
    cum = np.cumsum(cpt.table, axis=1)[tuples]
    u = rng.random(n) * cum[:, -1]
    grades = np.minimum((u[:, None] >= cum).sum(axis=1), cpt.child.arity - 1)
    return tuples, grades


def recover_known_cpt(true_cpt: Cpt, n: int, seed, smoothing: float = 0.0) -> float:
    """Sample from ``true_cpt``, refit by MLE and return the L-infinity cell error."""
    if n < 1:
        raise ValueError(f"need at least one sample, got n={n}")
    rng = np.random.default_rng(seed)
    tuples, grades = sample_from_cpt(true_cpt, n, rng)
    stats = SufficientStats.empty(true_cpt.parent_scales, true_cpt.child)
    stats.add(tuples, grades)
    fitted = mle_fit(stats, LearnConfig(smoothing=smoothing))
    return float(np.max(np.abs(fitted.table - true_cpt.table)))

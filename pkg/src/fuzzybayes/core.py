"""Shared vocabulary: linguistic scales, membership vectors and grade distributions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Tolerance for every sum-to-one check in the package.
PROB_TOL = 1e-9

# Two probabilities closer than this are a tie for argmax purposes.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class LinguisticScale:
    """Ordered grade labels, lowest first.

    >>> s = LinguisticScale(("p", "m", "g", "e"))
    >>> s.arity, s.index("g")
    (4, 2)
    """

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValueError("a linguistic scale needs at least two labels")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in scale {labels}")

    @property
    def arity(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown label {label!r} for scale {self.labels}") from None

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i):
        return self.labels[i]


#: Default four-level scale: poor < moderate < good < excellent.
DEFAULT_SCALE = LinguisticScale(("p", "m", "g", "e"))


def normalize(values: Iterable[float]) -> np.ndarray:
    """Scale a non-negative, non-zero vector so it sums to one."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("values must be finite and non-negative")
    total = arr.sum()
    if total <= 0:
        raise ValueError("cannot normalize an all-zero vector")
    return arr / total


def _check_unit_vector(values: Sequence[float], n: int, what: str):
    if len(values) != n:
        raise ValueError(f"{what}: expected {n} entries, got {len(values)}")
    arr = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -PROB_TOL) or np.any(arr > 1 + PROB_TOL):
        raise ValueError(f"{what}: entries must lie in [0, 1]")
    if abs(arr.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"{what}: entries sum to {arr.sum()!r}, not 1")


@dataclass(frozen=True)
class FuzzyVector:
    """Normalized membership degrees over one scale."""

    scale: LinguisticScale
    degrees: tuple[float, ...]

    def __post_init__(self):
        degrees = tuple(float(d) for d in self.degrees)
        _check_unit_vector(degrees, self.scale.arity, "FuzzyVector")
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def from_raw(cls, scale: LinguisticScale, raw) -> FuzzyVector:
        return cls(scale, tuple(normalize(raw)))

    @classmethod
    def one_hot(cls, scale: LinguisticScale, label) -> FuzzyVector:
        degrees = [0.0] * scale.arity
        degrees[scale.index(label)] = 1.0
        return cls(scale, tuple(degrees))

    def __getitem__(self, label) -> float:
        return self.degrees[self.scale.index(label)]

    def as_array(self) -> np.ndarray:
        return np.array(self.degrees)

    def argmax(self, tie_break: str = "higher") -> str:
        return self.scale[argmax_index(self.degrees, tie_break)]


@dataclass(frozen=True)
class GradeDistribution:
    """Probability of each output grade."""

    scale: LinguisticScale
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        _check_unit_vector(probs, self.scale.arity, "GradeDistribution")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_raw(cls, scale: LinguisticScale, raw) -> GradeDistribution:
        return cls(scale, tuple(normalize(raw)))

    @classmethod
    def uniform(cls, scale: LinguisticScale) -> GradeDistribution:
        return cls(scale, (1.0 / scale.arity,) * scale.arity)

    def __getitem__(self, label) -> float:
        return self.probs[self.scale.index(label)]

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)


@dataclass(frozen=True)
class Weights:
    """Normalized non-negative weights, one per sub-indicator."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("weights must be non-empty")
        if any(v < 0 or not np.isfinite(v) for v in values):
            raise ValueError("weights must be finite and non-negative")
        if abs(sum(values) - 1.0) > PROB_TOL:
            raise ValueError(f"weights sum to {sum(values)!r}, not 1")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_raw(cls, raw) -> Weights:
        return cls(tuple(normalize(raw)))

    @classmethod
    def equal(cls, n: int) -> Weights:
        return cls((1.0 / n,) * n)

    def __len__(self):
        return len(self.values)


def argmax_index(probs, tie_break: str = "higher"):
    """Index of the largest entry along the last axis.

    Entries within ``TIE_TOL`` of the maximum count as tied; ``tie_break``
    picks the ``"higher"`` (default) or ``"lower"`` tied index.
    """
    arr = np.asarray(probs, dtype=float)
    tied = arr >= arr.max(axis=-1, keepdims=True) - TIE_TOL
    if tie_break == "higher":
        idx = arr.shape[-1] - 1 - np.argmax(tied[..., ::-1], axis=-1)
    elif tie_break == "lower":
        idx = np.argmax(tied, axis=-1)
    else:
        raise ValueError(f"tie_break must be 'higher' or 'lower', got {tie_break!r}")
    return int(idx) if np.ndim(idx) == 0 else idx


def argmax_grade(dist: GradeDistribution, tie_break: str = "higher") -> str:
    """Label of the most probable grade.

    >>> argmax_grade(GradeDistribution(DEFAULT_SCALE, (0.05, 0.15, 0.4, 0.4)))
    'e'
    """
    return dist.scale[argmax_index(dist.probs, tie_break)]

"""Complete fuzzy rule bases over dimension levels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import DEFAULT_SCALE, LinguisticScale


@dataclass(frozen=True)
class FuzzyRule:
    antecedent: tuple[str, ...]
    consequent: str
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(str(a) for a in self.antecedent))
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"rule weight {self.weight} outside [0, 1]")


@dataclass
class ExpertKnowledge:
    """Expert opinion keyed by antecedent tuple.

    ``weights`` holds the expert confidence in a rule, ``consequents`` an
    optional expert-chosen output grade.
    """

    weights: dict = field(default_factory=dict)
    consequents: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = {tuple(map(str, k)): float(v) for k, v in self.weights.items()}
        self.consequents = {tuple(map(str, k)): str(v) for k, v in self.consequents.items()}
        for key, w in self.weights.items():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"expert weight {w} for {key} outside [0, 1]")

    def check(self, dims: Sequence[LinguisticScale], output: LinguisticScale | None = None):
        """Raise ``KeyError`` for any key or grade that does not resolve."""
        for key in set(self.weights) | set(self.consequents):
            if len(key) != len(dims):
                raise KeyError(f"expert antecedent {key} has {len(key)} levels, expected {len(dims)}")
            for level, scale in zip(key, dims):
                scale.index(level)
        if output is not None:
            for grade in self.consequents.values():
                output.index(grade)


def enumerate_antecedents(dims: Sequence[LinguisticScale]) -> list[tuple[str, ...]]:
    """Every level combination, odometer order with the first dimension fastest.

    >>> enumerate_antecedents([LinguisticScale(("p", "e")), LinguisticScale(("a", "b"))])
    [('p', 'a'), ('e', 'a'), ('p', 'b'), ('e', 'b')]
    """
    if not dims:
        raise ValueError("at least one dimension is required")
    ids = [0] * len(dims)
    out = []
    while True:
        out.append(tuple(scale[i] for scale, i in zip(dims, ids)))
        carry = True
        for d, scale in enumerate(dims):
            ids[d] += 1
            if ids[d] < scale.arity:
                carry = False
                break
            ids[d] = 0
        if carry:
            return out


def antecedent_index(levels: Sequence[int], arities: Sequence[int]) -> int:
    """Position of a level-index tuple within :func:`enumerate_antecedents`."""
    idx, stride = 0, 1
    for level, arity in zip(levels, arities):
        idx += int(level) * stride
        stride *= arity
    return idx


def tuple_indices(levels: np.ndarray, arities: Sequence[int]) -> np.ndarray:
    """Vectorized :func:`antecedent_index` for an (n, n_dims) integer array."""
    strides = np.cumprod([1, *arities[:-1]])
    return np.asarray(levels, dtype=np.int64) @ strides


def assign_consequent(
    antecedent: Sequence[str],
    kb: ExpertKnowledge,
    dims: Sequence[LinguisticScale],
    output: LinguisticScale = DEFAULT_SCALE,
) -> str:
    """Expert consequent if known, else the floor of the mean level index.

    When the output arity differs from the input arities the mean index is
    rescaled onto the output scale before flooring.
    """
    key = tuple(map(str, antecedent))
    if key in kb.consequents:
        return output[output.index(kb.consequents[key])]
    # integer arithmetic keeps floor exact: floor(sum(i_d / (L_d - 1)) * (G - 1) / D)
    den = int(np.prod([scale.arity - 1 for scale in dims]))
    num = 0
    for level, scale in zip(key, dims):
        num += scale.index(level) * (den // (scale.arity - 1))
    grade = (num * (output.arity - 1)) // (den * len(dims))
    return output[grade]


def fuse_weight(antecedent: Sequence[str], kb: ExpertKnowledge, freq: float, alpha: float) -> float:
    """Blend expert weight and empirical frequency: ``alpha*expert + (1-alpha)*freq``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not 0.0 <= freq <= 1.0:
        raise ValueError(f"frequency must lie in [0, 1], got {freq}")
    key = tuple(map(str, antecedent))
    if key in kb.weights:
        w = alpha * kb.weights[key] + (1.0 - alpha) * freq
    else:
        w = freq
    return min(max(w, 0.0), 1.0)


def rule_frequencies(level_tuples: np.ndarray, dims: Sequence[LinguisticScale]) -> np.ndarray:
    """Share of records whose argmax levels equal each antecedent, in enumeration order."""
    arities = [d.arity for d in dims]
    n_tuples = int(np.prod(arities))
    level_tuples = np.asarray(level_tuples)
    if level_tuples.size == 0:
        return np.zeros(n_tuples)
    counts = np.bincount(tuple_indices(level_tuples, arities), minlength=n_tuples)
    return counts / counts.sum()


def build_rulebase(
    dims: Sequence[LinguisticScale],
    kb: ExpertKnowledge | None = None,
    frequencies: Sequence[float] | Mapping | None = None,
    alpha: float = 0.5,
    output: LinguisticScale = DEFAULT_SCALE,
) -> list[FuzzyRule]:
    """One rule per antecedent, in enumeration order.

    ``frequencies`` is either a sequence aligned with
    :func:`enumerate_antecedents` or a mapping from antecedent tuple to
    frequency (missing keys count as 0). ``None`` means all zero.
    """
    kb = kb or ExpertKnowledge()
    kb.check(dims, output)
    antecedents = enumerate_antecedents(dims)
    if frequencies is None:
        freqs = [0.0] * len(antecedents)
    elif isinstance(frequencies, Mapping):
        lookup = {tuple(map(str, k)): float(v) for k, v in frequencies.items()}
        freqs = [lookup.get(a, 0.0) for a in antecedents]
    else:
        freqs = [float(f) for f in frequencies]
        if len(freqs) != len(antecedents):
            raise ValueError(f"{len(freqs)} frequencies for {len(antecedents)} antecedents")
    return [
        FuzzyRule(a, assign_consequent(a, kb, dims, output), fuse_weight(a, kb, f, alpha))
        for a, f in zip(antecedents, freqs)
    ]


def dumps_rules(rules: Sequence[FuzzyRule]) -> str:
    """Serialize as ``antecedent<TAB>consequent<TAB>weight`` lines."""
    lines = ["# antecedent\tconsequent\tweight"]
    lines += [f"{','.join(r.antecedent)}\t{r.consequent}\t{r.weight!r}" for r in rules]
    return "\n".join(lines) + "\n"


def loads_rules(text: str) -> list[FuzzyRule]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}")
        antecedent, consequent, weight = parts
        rules.append(FuzzyRule(tuple(antecedent.split(",")), consequent, float(weight)))
    return rules

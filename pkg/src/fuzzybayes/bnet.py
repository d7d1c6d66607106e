"""Three-layer Bayesian network: sub-indicators -> dimensions -> output grade.

The conditional probability table stores ``P(S | dimension levels)`` with one
row per level tuple, rows in odometer order (first dimension fastest). The
prior over ``S`` is folded in multiplicatively and the product renormalized.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import (
    DEFAULT_SCALE,
    PROB_TOL,
    FuzzyVector,
    GradeDistribution,
    LinguisticScale,
    Weights,
)
from .rulebase import antecedent_index, enumerate_antecedents

logger = logging.getLogger(__name__)


class StructureError(ValueError):
    """The network or its CPT is incomplete or inconsistent."""


@dataclass(frozen=True)
class Dimension:
    name: str
    scale: LinguisticScale = DEFAULT_SCALE
    indicators: tuple[str, ...] = ()
    weights: Weights | None = None

    def __post_init__(self):
        indicators = tuple(self.indicators) or (self.name,)
        object.__setattr__(self, "indicators", indicators)
        if self.weights is None:
            object.__setattr__(self, "weights", Weights.equal(len(indicators)))
        if len(self.weights) != len(indicators):
            raise StructureError(
                f"dimension {self.name!r}: {len(self.weights)} weights for {len(indicators)} indicators"
            )


@dataclass(frozen=True)
class NetworkStructure:
    """Leaves (sub-indicators) feed dimensions, dimensions feed the output node."""

    dimensions: tuple[Dimension, ...]
    output: LinguisticScale = DEFAULT_SCALE
    output_name: str = "S"

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise StructureError("a network needs at least one dimension")
        names = [d.name for d in self.dimensions] + [self.output_name]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate node names in {names}")

    @classmethod
    def default(cls) -> NetworkStructure:
        return cls(tuple(Dimension(n) for n in ("A", "P", "M")))

    @property
    def parent_scales(self) -> tuple[LinguisticScale, ...]:
        return tuple(d.scale for d in self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)


@dataclass(frozen=True, eq=False)
class Cpt:
    """Table of output-grade distributions, one row per parent level tuple.

    The constructor stores ``table`` as given (read-only); use
    :meth:`from_rows` to build from a partial mapping with repair of rows
    that do not sum to one.
    """

    parent_scales: tuple[LinguisticScale, ...]
    child: LinguisticScale
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "parent_scales", tuple(self.parent_scales))
        table = np.array(self.table, dtype=float)
        shape = (self.n_tuples, self.child.arity)
        if table.shape != shape:
            raise StructureError(f"CPT table has shape {table.shape}, expected {shape}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise StructureError("CPT entries must be finite and non-negative")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(s.arity for s in self.parent_scales)

    @property
    def n_tuples(self) -> int:
        return int(np.prod(self.arities))

    def rows_valid(self) -> bool:
        return bool(np.all(np.abs(self.table.sum(axis=1) - 1.0) <= PROB_TOL))

    def index(self, parents: Sequence[str]) -> int:
        if len(parents) != len(self.parent_scales):
            raise StructureError(f"tuple {tuple(parents)} has {len(parents)} levels, expected {len(self.parent_scales)}")
        return antecedent_index([s.index(p) for s, p in zip(self.parent_scales, parents)], self.arities)

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.parent_scales == other.parent_scales
            and self.child == other.child
            and np.array_equal(self.table, other.table)
        )

    @classmethod
    def uniform(cls, parent_scales, child: LinguisticScale = DEFAULT_SCALE) -> Cpt:
        n = int(np.prod([s.arity for s in parent_scales]))
        return cls(parent_scales, child, np.full((n, child.arity), 1.0 / child.arity))

    @classmethod
    def from_rows(
        cls,
        parent_scales,
        child: LinguisticScale,
        rows: Mapping[tuple, Sequence[float] | Mapping[str, float]],
        fill: str | None = None,
    ) -> Cpt:
        """Build from ``{parent tuple: distribution}``.

        A distribution is a sequence in ``child`` order or a mapping from
        grade label to probability. Rows that do not sum to one are
        renormalized with a logged warning. Tuples absent from ``rows`` raise
        :class:`StructureError` unless ``fill="uniform"``.
        """
        parent_scales = tuple(parent_scales)
        arities = [s.arity for s in parent_scales]
        n = int(np.prod(arities))
        table = np.full((n, child.arity), np.nan)
        for key, dist in rows.items():
            key = tuple(map(str, key))
            if len(key) != len(parent_scales):
                raise StructureError(f"tuple {key} has {len(key)} levels, expected {len(parent_scales)}")
            idx = antecedent_index([s.index(k) for s, k in zip(parent_scales, key)], arities)
            if isinstance(dist, Mapping):
                vec = np.zeros(child.arity)
                for label, p in dist.items():
                    vec[child.index(label)] = float(p)
            else:
                vec = np.asarray(dist, dtype=float)
                if vec.shape != (child.arity,):
                    raise StructureError(f"row {key} has {vec.size} entries, expected {child.arity}")
            if not np.all(np.isfinite(vec)) or np.any(vec < 0) or vec.sum() <= 0:
                raise StructureError(f"row {key} is not a non-negative, non-zero vector")
            total = vec.sum()
            if abs(total - 1.0) > PROB_TOL:
                logger.warning("CPT row %s sums to %r; renormalized", ",".join(key), total)
                vec = vec / total
            table[idx] = vec
        missing = np.isnan(table[:, 0])
        if np.any(missing):
            if fill != "uniform":
                first = enumerate_antecedents(parent_scales)[int(np.argmax(missing))]
                raise StructureError(f"CPT is missing {int(missing.sum())} rows, e.g. {first}")
            table[missing] = 1.0 / child.arity
        return cls(parent_scales, child, table)


def cpt_lookup(cpt: Cpt, parents: Sequence[str]) -> GradeDistribution:
    return GradeDistribution(cpt.child, tuple(cpt.table[cpt.index(parents)]))


def _check_net(net: NetworkStructure, cpt: Cpt, prior: GradeDistribution):
    if net.parent_scales != cpt.parent_scales or net.output != cpt.child:
        raise StructureError("CPT scales do not match the network structure")
    if prior.scale != cpt.child:
        raise StructureError("prior scale does not match the output scale")


def posterior(firing: np.ndarray, table: np.ndarray, prior: np.ndarray) -> np.ndarray:
    """Normalized ``prior * (firing @ table)`` for a batch of firing-strength rows.

    A row whose score vanishes everywhere falls back to the prior.
    """
    scores = (np.atleast_2d(firing) @ table) * prior
    totals = scores.sum(axis=1, keepdims=True)
    dead = totals[:, 0] <= 0
    if np.any(dead):
        scores[dead] = prior
        totals[dead] = prior.sum()
    return scores / totals


def firing_strengths(evidence: Sequence[np.ndarray], t_norm: str = "min") -> np.ndarray:
    """Firing strength of every parent tuple, odometer order.

    ``evidence`` holds one (n, arity_d) membership array per dimension; the
    result has shape (n, prod(arity_d)).
    """
    if t_norm == "min":
        op = np.minimum
    elif t_norm == "product":
        op = np.multiply
    else:
        raise ValueError(f"t_norm must be 'min' or 'product', got {t_norm!r}")
    evidence = [np.atleast_2d(np.asarray(e, dtype=float)) for e in evidence]
    n = evidence[0].shape[0]
    out = evidence[0]
    for e in evidence[1:]:
        # new dimension varies slowest
        out = op(e[:, :, None], out[:, None, :]).reshape(n, -1)
    return out


def infer_crisp(net: NetworkStructure, cpt: Cpt, prior: GradeDistribution, parents: Sequence[str]) -> GradeDistribution:
    """Posterior grade distribution for fully observed dimension levels."""
    _check_net(net, cpt, prior)
    row = cpt.table[cpt.index(parents)]
    post = posterior(np.ones((1, 1)), row[None, :], prior.as_array())[0]
    return GradeDistribution(cpt.child, tuple(post))


def infer_soft(
    net: NetworkStructure,
    cpt: Cpt,
    prior: GradeDistribution,
    evidence: Sequence[FuzzyVector],
    t_norm: str = "min",
) -> GradeDistribution:
    """Posterior grade distribution under fuzzy evidence on every dimension.

    Each parent tuple fires with the t-norm of its per-dimension degrees;
    the grade score is the prior times the firing-weighted sum of CPT rows.
    """
    _check_net(net, cpt, prior)
    if len(evidence) != len(net.dimensions):
        raise StructureError(f"{len(evidence)} evidence vectors for {len(net.dimensions)} dimensions")
    for vec, dim in zip(evidence, net.dimensions):
        if vec.scale != dim.scale:
            raise StructureError(f"evidence for {dim.name!r} uses scale {vec.scale.labels}, expected {dim.scale.labels}")
    firing = firing_strengths([v.as_array() for v in evidence], t_norm)
    post = posterior(firing, cpt.table, prior.as_array())[0]
    return GradeDistribution(cpt.child, tuple(post))


def joint_factorization_check(
    net: NetworkStructure,
    cpt: Cpt,
    prior: GradeDistribution,
    marginals: Sequence[Sequence[float]] | None = None,
) -> bool:
    """Sum the factored joint ``prod_d P(D_d) * P(S | D)`` over every assignment.

    Dimension marginals default to uniform. Returns whether the total is 1
    within tolerance and the prior is itself normalized. Enumerates
    explicitly, so it is meant for small networks only.
    """
    if abs(sum(prior.probs) - 1.0) > PROB_TOL:
        return False
    scales = net.parent_scales
    if marginals is None:
        marginals = [np.full(s.arity, 1.0 / s.arity) for s in scales]
    total = 0.0
    for levels in itertools.product(*(range(s.arity) for s in scales)):
        p_parents = float(np.prod([m[i] for m, i in zip(marginals, levels)]))
        row = cpt.table[antecedent_index(levels, cpt.arities)]
        for s in range(cpt.child.arity):
            total += p_parents * row[s]
    return abs(total - 1.0) <= PROB_TOL


def dumps_cpt(cpt: Cpt, names: Sequence[str] | None = None, output_name: str = "S") -> str:
    """Tab-separated table: parent level columns, then one column per grade."""
    names = list(names) if names is not None else [f"D{i}" for i in range(len(cpt.parent_scales))]
    lines = [f"#scale\t{n}\t{','.join(s.labels)}" for n, s in zip(names, cpt.parent_scales)]
    lines.append(f"#scale\t{output_name}\t{','.join(cpt.child.labels)}")
    lines.append("\t".join(names + [f"{output_name}={g}" for g in cpt.child]))
    for key, row in zip(enumerate_antecedents(cpt.parent_scales), cpt.table):
        lines.append("\t".join(list(key) + [repr(float(p)) for p in row]))
    return "\n".join(lines) + "\n"


def loads_cpt(text: str, fill: str | None = None) -> tuple[Cpt, list[str]]:
    """Parse :func:`dumps_cpt` output; returns the CPT and the parent names.

    Grade columns are matched by header name, so their order in the file
    may differ from the scale order.
    """
    scales: dict[str, LinguisticScale] = {}
    header = None
    rows = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if parts[0] == "#scale":
            scales[parts[1]] = LinguisticScale(tuple(parts[2].split(",")))
        elif line.startswith("#"):
            continue
        elif header is None:
            header = parts
        else:
            if len(parts) != len(header):
                raise StructureError(f"line {lineno}: {len(parts)} fields, header has {len(header)}")
            rows[lineno] = parts
    if header is None:
        raise StructureError("CPT text has no header row")
    grade_cols = [i for i, h in enumerate(header) if "=" in h]
    parent_names = [h for h in header if "=" not in h]
    if not grade_cols:
        raise StructureError("CPT header names no grade columns")
    output_name = header[grade_cols[0]].split("=", 1)[0]
    try:
        parent_scales = [scales[n] for n in parent_names]
        child = scales[output_name]
    except KeyError as exc:
        raise StructureError(f"no #scale line for node {exc.args[0]!r}") from None
    grade_labels = [header[i].split("=", 1)[1] for i in grade_cols]
    mapping = {}
    for lineno, parts in rows.items():
        key = tuple(parts[: len(parent_names)])
        try:
            mapping[key] = {g: float(parts[i]) for g, i in zip(grade_labels, grade_cols)}
        except ValueError:
            raise StructureError(f"line {lineno}: non-numeric probability") from None
    return Cpt.from_rows(parent_scales, child, mapping, fill=fill), parent_names

"""Declarative run configuration (TOML).

Every section is optional. An empty file describes the default student
network: indicators ``A``, ``P`` and ``M`` on a 0-100 scale, one per
dimension, four levels ``p < m < g < e``. See ``README.md`` for the full key
reference.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import LinguisticScale
from .estimator import FuzzyBayesClassifier
from .fuzzify import DEFAULT_CENTERS, DEFAULT_SIGMA, GaussianFuzzifier
from .learn import LearnConfig
from .rulebase import ExpertKnowledge


class ConfigError(ValueError):
    """The run configuration is invalid or does not resolve."""


_SECTIONS = {"seed", "scale", "indicators", "dimensions", "expert", "fusion", "inference",
             "learn", "data", "split", "benchmark", "output"}


@dataclass(frozen=True)
class IndicatorConfig:
    name: str
    mode: str = "fixed"
    centers: tuple[float, ...] = DEFAULT_CENTERS
    sigmas: tuple[float, ...] = (DEFAULT_SIGMA,)
    domain: tuple[float, float] | None = (0.0, 100.0)


@dataclass(frozen=True)
class DimensionConfig:
    name: str
    indicators: tuple[str, ...]
    weights: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    raw: dict = field(repr=False)
    base_dir: str = "."
    seed: int = 0
    levels: tuple[str, ...] = ("p", "m", "g", "e")
    grades: tuple[str, ...] = ("p", "m", "g", "e")
    tie_break: str = "higher"
    indicators: tuple[IndicatorConfig, ...] = ()
    dimensions: tuple[DimensionConfig, ...] = ()
    expert: ExpertKnowledge = field(default_factory=ExpertKnowledge)
    alpha: float = 0.5
    expert_strength: float = 0.0
    t_norm: str = "min"
    prior: str = "empirical"
    learn: LearnConfig = field(default_factory=LearnConfig)
    batch_size: int | None = None
    label: str = "grade"
    delimiter: str = ","
    train_fraction: float = 0.8
    stratified: bool = True
    benchmark: dict = field(default_factory=dict)
    output_dir: str = "out"

    # -- construction -----------------------------------------------------

    @classmethod
    def load(cls, path, seed: int | None = None) -> RunConfig:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(raw, os.path.dirname(os.path.abspath(path)), seed)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = ".", seed: int | None = None) -> RunConfig:
        raw = json.loads(json.dumps(raw))  # detach and normalize to plain JSON types
        if seed is not None:
            raw["seed"] = int(seed)
        try:
            return cls._parse(raw, base_dir)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None

    @classmethod
    def _parse(cls, raw: dict, base_dir: str) -> RunConfig:
        unknown = set(raw) - _SECTIONS
        if unknown:
            raise ConfigError(f"unknown config sections {sorted(unknown)}")
        scale = raw.get("scale", {})
        levels = tuple(map(str, scale.get("levels", ("p", "m", "g", "e"))))
        grades = tuple(map(str, scale.get("grades", levels)))
        LinguisticScale(levels), LinguisticScale(grades)
        tie_break = scale.get("tie_break", "higher")
        if tie_break not in ("higher", "lower"):
            raise ConfigError(f"scale.tie_break must be 'higher' or 'lower', got {tie_break!r}")

        defaults = raw.get("indicators", {}).get("default", {})
        indicators = {
            name: cls._indicator(name, {**defaults, **spec}, len(levels))
            for name, spec in raw.get("indicators", {}).items()
            if name != "default"
        }
        dims = []
        for entry in raw.get("dimensions", []):
            name = str(entry["name"])
            members = tuple(map(str, entry.get("indicators", [name])))
            weights = tuple(float(w) for w in entry.get("weights", [1.0] * len(members)))
            if len(weights) != len(members):
                raise ConfigError(f"dimension {name!r}: {len(weights)} weights for {len(members)} indicators")
            if any(w < 0 for w in weights) or sum(weights) <= 0:
                raise ConfigError(f"dimension {name!r}: weights must be non-negative with positive sum")
            dims.append(DimensionConfig(name, members, weights))
        if not dims:
            names = list(indicators) or ["A", "P", "M"]
            dims = [DimensionConfig(n, (n,), (1.0,)) for n in names]
        for dim in dims:
            for ind in dim.indicators:
                if ind not in indicators:
                    indicators[ind] = cls._indicator(ind, dict(defaults), len(levels))
        used = [i for d in dims for i in d.indicators]
        if len(set(used)) != len(used):
            raise ConfigError("an indicator may belong to only one dimension")
        if len({d.name for d in dims}) != len(dims):
            raise ConfigError("dimension names must be unique")
        orphans = set(indicators) - set(used)
        if orphans:
            raise ConfigError(f"indicators {sorted(orphans)} belong to no dimension")

        expert_w, expert_c = {}, {}
        for entry in raw.get("expert", []):
            key = tuple(map(str, entry["antecedent"]))
            if "weight" in entry:
                expert_w[key] = float(entry["weight"])
            if "consequent" in entry:
                expert_c[key] = str(entry["consequent"])
        try:
            kb = ExpertKnowledge(expert_w, expert_c)
            kb.check([LinguisticScale(levels)] * len(dims), LinguisticScale(grades))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"expert knowledge: {exc}") from None

        fusion = raw.get("fusion", {})
        alpha = float(fusion.get("alpha", 0.5))
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"fusion.alpha must lie in [0, 1], got {alpha}")
        strength = float(fusion.get("expert_strength", 0.0))
        if strength < 0:
            raise ConfigError("fusion.expert_strength must be >= 0")
        inference = raw.get("inference", {})
        t_norm = inference.get("t_norm", "min")
        if t_norm not in ("min", "product"):
            raise ConfigError(f"inference.t_norm must be 'min' or 'product', got {t_norm!r}")
        prior = inference.get("prior", "empirical")
        if prior not in ("empirical", "uniform"):
            raise ConfigError(f"inference.prior must be 'empirical' or 'uniform', got {prior!r}")

        learn_raw = raw.get("learn", {})
        learn = LearnConfig(
            smoothing=float(learn_raw.get("smoothing", 1.0)),
            tau=float(learn_raw.get("tau", 1e-3)),
            max_iters=int(learn_raw.get("max_iters", 100)),
        )
        batch_size = learn_raw.get("batch_size")
        if batch_size is not None and int(batch_size) < 1:
            raise ConfigError("learn.batch_size must be >= 1")

        data = raw.get("data", {})
        split_raw = raw.get("split", {})
        train_fraction = float(split_raw.get("train_fraction", 0.8))
        if not 0.0 < train_fraction < 1.0:
            raise ConfigError(f"split.train_fraction must lie in (0, 1), got {train_fraction}")
        bench = dict(raw.get("benchmark", {}))
        if int(bench.get("trials", 10)) < 1:
            raise ConfigError("benchmark.trials must be >= 1")

        return cls(
            raw=raw,
            base_dir=base_dir,
            seed=int(raw.get("seed", 0)),
            levels=levels,
            grades=grades,
            tie_break=tie_break,
            indicators=tuple(indicators[i] for i in used),
            dimensions=tuple(dims),
            expert=kb,
            alpha=alpha,
            expert_strength=strength,
            t_norm=t_norm,
            prior=prior,
            learn=learn,
            batch_size=None if batch_size is None else int(batch_size),
            label=str(data.get("label", "grade")),
            delimiter=str(data.get("delimiter", ",")),
            train_fraction=train_fraction,
            stratified=bool(split_raw.get("stratified", True)),
            benchmark=bench,
            output_dir=str(raw.get("output", {}).get("dir", "out")),
        )

    @staticmethod
    def _indicator(name: str, spec: dict, n_levels: int) -> IndicatorConfig:
        mode = spec.get("mode", "fixed")
        if mode == "percentile":
            domain = spec.get("domain")
            return IndicatorConfig(name, "percentile", (), (), None if domain is None else tuple(map(float, domain)))
        if mode != "fixed":
            raise ConfigError(f"indicator {name!r}: mode must be 'fixed' or 'percentile', got {mode!r}")
        centers = tuple(float(c) for c in spec.get("centers", DEFAULT_CENTERS))
        if len(centers) != n_levels:
            raise ConfigError(f"indicator {name!r}: {len(centers)} centers for {n_levels} levels")
        sigma = spec.get("sigmas", spec.get("sigma", DEFAULT_SIGMA))
        sigmas = tuple(float(s) for s in (sigma if isinstance(sigma, list) else [sigma] * n_levels))
        if len(sigmas) != n_levels or any(s <= 0 for s in sigmas):
            raise ConfigError(f"indicator {name!r}: need {n_levels} positive sigmas")
        domain = tuple(float(v) for v in spec.get("domain", (0.0, 100.0)))
        if len(domain) != 2 or not domain[0] < domain[1]:
            raise ConfigError(f"indicator {name!r}: domain must be [min, max] with min < max")
        if centers[0] < domain[0] or centers[-1] > domain[1] or any(b <= a for a, b in zip(centers, centers[1:])):
            raise ConfigError(f"indicator {name!r}: centers must increase strictly inside the domain")
        return IndicatorConfig(name, "fixed", centers, sigmas, domain)

    # -- derived objects --------------------------------------------------

    def hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    @property
    def indicator_names(self) -> list[str]:
        return [i.name for i in self.indicators]

    def fuzzifier(self) -> GaussianFuzzifier:
        centers, sigmas, domains = [], [], []
        for ind in self.indicators:
            if ind.mode == "percentile":
                centers.append(None)
                sigmas.append([DEFAULT_SIGMA] * len(self.levels))
            else:
                centers.append(list(ind.centers))
                sigmas.append(list(ind.sigmas))
            domains.append(None if ind.domain is None else list(ind.domain))
        if all(d is None for d in domains):
            domains = None
        elif any(d is None for d in domains):
            raise ConfigError("give every indicator a domain or none of them")
        if all(c is None for c in centers):
            centers = None
        return GaussianFuzzifier(
            levels=self.levels, centers=centers, sigmas=sigmas, domain=domains, names=self.indicator_names
        )

    def classifier(self) -> FuzzyBayesClassifier:
        index = {name: j for j, name in enumerate(self.indicator_names)}
        return FuzzyBayesClassifier(
            fuzzifier=self.fuzzifier(),
            dimensions=[[index[i] for i in d.indicators] for d in self.dimensions],
            dimension_weights=[list(d.weights) for d in self.dimensions],
            dimension_names=[d.name for d in self.dimensions],
            classes=self.grades,
            expert_knowledge=self.expert,
            alpha=self.alpha,
            expert_strength=self.expert_strength,
            smoothing=self.learn.smoothing,
            tau=self.learn.tau,
            max_iter=self.learn.max_iters,
            batch_size=self.batch_size,
            t_norm=self.t_norm,
            prior=self.prior,
            tie_break=self.tie_break,
        )

    def benchmark_model_params(self) -> dict:
        """Per-model estimator parameters for data-driven benchmark runs."""
        fbn = {
            "fuzzifier": GaussianFuzzifier(levels=self.levels),
            "alpha": self.alpha,
            "smoothing": self.learn.smoothing,
            "tau": self.learn.tau,
            "max_iter": self.learn.max_iters,
            "t_norm": self.t_norm,
            "prior": self.prior,
            "tie_break": self.tie_break,
        }
        nb = {"fuzzifier": GaussianFuzzifier(levels=self.levels), "smoothing": self.learn.smoothing,
              "tie_break": self.tie_break}
        return {"FBN": fbn, "NB": nb, "WS": {}}

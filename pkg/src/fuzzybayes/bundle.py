"""Model bundles: a directory of human-diffable text files.

    manifest.json   format version, structure, training log, provenance
    indicators.tsv  membership function parameters per indicator and level
    rules.tsv       the rule base
    cpt.tsv         conditional probability table
    prior.tsv       prior over output grades

Floats are written with ``repr`` so a reload is bit-exact.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__
from .bnet import Dimension, NetworkStructure, dumps_cpt, loads_cpt
from .core import LinguisticScale, Weights
from .estimator import FuzzyBayesClassifier
from .fuzzify import GaussianFuzzifier, GaussianMf, IndicatorSpec
from .rulebase import dumps_rules, loads_rules

BUNDLE_FORMAT = "fuzzybayes-bundle"
BUNDLE_VERSION = 1


class BundleError(ValueError):
    """A bundle is missing, malformed, or of an incompatible version."""


def _write(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def save_bundle(model: FuzzyBayesClassifier, path, extra: dict | None = None) -> None:
    """Persist a fitted classifier; ``extra`` lands in the manifest verbatim."""
    os.makedirs(path, exist_ok=True)
    net = model.network_
    lines = ["indicator\tlevel\tcenter\tsigma\tdomain_min\tdomain_max"]
    for spec in model.fuzzifier_.specs_:
        for level, mf in zip(spec.scale, spec.mfs):
            lines.append(f"{spec.name}\t{level}\t{mf.center!r}\t{mf.sigma!r}\t{spec.domain[0]!r}\t{spec.domain[1]!r}")
    _write(os.path.join(path, "indicators.tsv"), "\n".join(lines) + "\n")
    _write(os.path.join(path, "rules.tsv"), dumps_rules(model.rules_))
    _write(os.path.join(path, "cpt.tsv"), dumps_cpt(model.cpt_, net.names, net.output_name))
    prior_lines = ["grade\tprobability"] + [f"{g}\t{float(p)!r}" for g, p in zip(net.output, model.prior_)]
    _write(os.path.join(path, "prior.tsv"), "\n".join(prior_lines) + "\n")
    manifest = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "package_version": __version__,
        "levels": list(model.fuzzifier_.scale_.labels),
        "grades": list(net.output.labels),
        "classes": [str(c) for c in model.classes_],
        "dimensions": [
            {"name": d.name, "indicators": list(d.indicators), "weights": list(d.weights.values)}
            for d in net.dimensions
        ],
        "t_norm": model.t_norm,
        "tie_break": model.tie_break,
        "training": {
            "iterations": [
                {"iteration": r.iteration, "batch_size": r.batch_size, "delta": r.delta} for r in model.history_
            ],
            "final_delta": model.history_[-1].delta if model.history_ else None,
            "tau": float(model.tau),
            "converged": bool(model.converged_),
        },
        **(extra or {}),
    }
    _write(os.path.join(path, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _read(path, name):
    try:
        with open(os.path.join(path, name)) as fh:
            return fh.read()
    except OSError as exc:
        raise BundleError(f"bundle {path}: cannot read {name}: {exc.strerror}") from None


def load_bundle(path) -> tuple[FuzzyBayesClassifier, dict]:
    """Rebuild a fitted classifier from :func:`save_bundle` output."""
    try:
        manifest = json.loads(_read(path, "manifest.json"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"bundle {path}: manifest is not valid JSON: {exc}") from None
    if manifest.get("format") != BUNDLE_FORMAT:
        raise BundleError(f"bundle {path}: not a {BUNDLE_FORMAT} directory")
    if manifest.get("version") != BUNDLE_VERSION:
        raise BundleError(f"bundle {path}: version {manifest.get('version')} unsupported (expected {BUNDLE_VERSION})")

    levels = LinguisticScale(tuple(manifest["levels"]))
    grades = LinguisticScale(tuple(manifest["grades"]))
    mfs: dict[str, list] = {}
    domains: dict[str, tuple] = {}
    for line in _read(path, "indicators.tsv").splitlines()[1:]:
        if not line.strip():
            continue
        name, level, center, sigma, lo, hi = line.split("\t")
        mfs.setdefault(name, []).append((level, GaussianMf(float(center), float(sigma))))
        domains[name] = (float(lo), float(hi))
    specs = []
    for name, entries in mfs.items():
        if [lv for lv, _ in entries] != list(levels):
            raise BundleError(f"bundle {path}: indicator {name!r} levels do not match {levels.labels}")
        specs.append(IndicatorSpec(name, levels, tuple(mf for _, mf in entries), domains[name]))
    names = [s.name for s in specs]

    fuzzifier = GaussianFuzzifier(levels=levels.labels, names=names)
    fuzzifier.specs_ = specs
    fuzzifier.scale_ = levels
    fuzzifier.n_features_in_ = len(specs)

    index = {n: j for j, n in enumerate(names)}
    dims = []
    groups = []
    for d in manifest["dimensions"]:
        dims.append(Dimension(d["name"], levels, tuple(d["indicators"]), Weights(tuple(d["weights"]))))
        groups.append([index[i] for i in d["indicators"]])
    network = NetworkStructure(tuple(dims), grades)
    cpt, parent_names = loads_cpt(_read(path, "cpt.tsv"))
    if tuple(parent_names) != network.names or cpt.parent_scales != network.parent_scales or cpt.child != grades:
        raise BundleError(f"bundle {path}: CPT does not match the manifest structure")
    prior = np.array([float(line.split("\t")[1]) for line in _read(path, "prior.tsv").splitlines()[1:] if line.strip()])
    if prior.shape != (grades.arity,):
        raise BundleError(f"bundle {path}: prior has {prior.size} entries, expected {grades.arity}")

    model = FuzzyBayesClassifier(
        fuzzifier=GaussianFuzzifier(levels=levels.labels, names=names),
        dimensions=groups,
        dimension_weights=[list(d.weights.values) for d in dims],
        dimension_names=list(network.names),
        classes=manifest["classes"],
        t_norm=manifest["t_norm"],
        tie_break=manifest["tie_break"],
        tau=manifest["training"]["tau"],
    )
    model.classes_ = np.array(manifest["classes"])
    model.n_features_in_ = len(specs)
    model.fuzzifier_ = fuzzifier
    model.network_ = network
    model.groups_ = groups
    model.rules_ = loads_rules(_read(path, "rules.tsv"))
    model.cpt_ = cpt
    model.prior_ = prior
    model.pseudo_counts_ = None
    model.history_ = []
    model.converged_ = bool(manifest["training"]["converged"])
    return model, manifest

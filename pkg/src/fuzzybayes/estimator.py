"""scikit-learn classifier wrapping fuzzification, the rule base and the network."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from .bnet import Dimension, NetworkStructure, firing_strengths, posterior
from .core import GradeDistribution, LinguisticScale, Weights, argmax_index
from .fuzzify import GaussianFuzzifier, aggregate_matrix
from .learn import IterationRecord, LearnConfig, fit_until_converged, update_step
from .rulebase import ExpertKnowledge, build_rulebase, rule_frequencies, tuple_indices


def default_groups(n_features: int, arity: int, max_tuples: int) -> list[list[int]]:
    """One dimension per feature if the tuple space allows it, else contiguous groups."""
    if arity**n_features <= max_tuples:
        return [[j] for j in range(n_features)]
    n_dims = max(1, int(math.floor(math.log(max_tuples) / math.log(arity) + 1e-9)))
    return [list(map(int, g)) for g in np.array_split(np.arange(n_features), n_dims)]


class FuzzyBayesClassifier(ClassifierMixin, BaseEstimator):
    """Fuzzy-evidence Bayesian network classifier.

    Raw features are fuzzified, aggregated into dimension-level membership
    vectors, and fed as soft evidence to a CPT ``P(class | dimension
    levels)`` fitted by maximum likelihood.

    Parameters
    ----------
    fuzzifier : GaussianFuzzifier, default=None
        Template fuzzifier, cloned on fit. ``None`` uses percentile-placed
        Gaussians over four levels.
    dimensions : list of list of int, default=None
        Feature indices forming each dimension. ``None`` makes every
        feature its own dimension while the tuple space stays within
        ``max_tuples``, grouping contiguous features otherwise.
    dimension_weights : list of list of float, default=None
        Sub-indicator weights per dimension; equal when ``None``.
    dimension_names : list of str, default=None
    classes : sequence, default=None
        Output grades, lowest first. ``None`` uses the sorted labels of y.
    expert_knowledge : ExpertKnowledge, default=None
    alpha : float, default=0.5
        Fusion coefficient between expert weight and rule frequency.
    expert_strength : float, default=0.0
        Pseudo-observations the rule base adds to each CPT row, placed on the
        rule consequent and scaled by the rule weight. 0 gives pure MLE.
    smoothing : float, default=1.0
        Laplace pseudo-count per CPT cell and per prior class.
    tau : float, default=1e-3
        Convergence threshold on the largest CPT cell change.
    max_iter : int, default=100
    batch_size : int, default=None
        Records per update step; ``None`` means one batch.
    t_norm : {"min", "product"}, default="min"
    prior : {"empirical", "uniform"} or array-like, default="empirical"
    tie_break : {"higher", "lower"}, default="higher"
    max_tuples : int, default=4096

    Attributes
    ----------
    classes_ : ndarray
    fuzzifier_ : GaussianFuzzifier
    network_ : NetworkStructure
    rules_ : list of FuzzyRule
    cpt_ : Cpt
    prior_ : ndarray
    history_ : list of IterationRecord
    converged_ : bool
    """

    def __init__(
        self,
        fuzzifier=None,
        dimensions=None,
        dimension_weights=None,
        dimension_names=None,
        classes=None,
        expert_knowledge=None,
        alpha=0.5,
        expert_strength=0.0,
        smoothing=1.0,
        tau=1e-3,
        max_iter=100,
        batch_size=None,
        t_norm="min",
        prior="empirical",
        tie_break="higher",
        max_tuples=4096,
    ):
        self.fuzzifier = fuzzifier
        self.dimensions = dimensions
        self.dimension_weights = dimension_weights
        self.dimension_names = dimension_names
        self.classes = classes
        self.expert_knowledge = expert_knowledge
        self.alpha = alpha
        self.expert_strength = expert_strength
        self.smoothing = smoothing
        self.tau = tau
        self.max_iter = max_iter
        self.batch_size = batch_size
        self.t_norm = t_norm
        self.prior = prior
        self.tie_break = tie_break
        self.max_tuples = max_tuples

    # -- fitting ---------------------------------------------------------

    def _encode_y(self, y, classes=None):
        check_classification_targets(y)
        classes = self.classes if classes is None else classes
        if classes is None:
            classes = np.unique(y)
        else:
            classes = np.asarray(list(classes))
            if len(set(classes.tolist())) != len(classes):
                raise ValueError("classes must be unique")
        lookup = {c: i for i, c in enumerate(classes.tolist())}
        try:
            codes = np.array([lookup[v] for v in np.asarray(y).tolist()], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in classes {classes.tolist()}") from None
        return classes, codes

    def _learn_config(self):
        return LearnConfig(smoothing=float(self.smoothing), tau=float(self.tau), max_iters=int(self.max_iter))

    def fit(self, X, y):
        return self._fit(X, y)

    def _fit(self, X, y, classes=None):
        X, y = validate_data(self, X, y, dtype=float)
        classes, codes = self._encode_y(y, classes)
        if len(classes) < 2:
            raise ValueError(f"need at least two classes; got {len(classes)} class")
        self.classes_ = classes
        self.fuzzifier_ = clone(self.fuzzifier if self.fuzzifier is not None else GaussianFuzzifier()).fit(X)
        level_scale = self.fuzzifier_.scale_
        output = LinguisticScale(tuple(str(c) for c in classes))

        groups = self.dimensions or default_groups(X.shape[1], level_scale.arity, self.max_tuples)
        groups = [list(map(int, g)) for g in groups]
        for g in groups:
            if not g or min(g) < 0 or max(g) >= X.shape[1]:
                raise ValueError(f"dimension {g} references features outside 0..{X.shape[1] - 1}")
        if self.dimension_weights is None:
            weights = [Weights.equal(len(g)) for g in groups]
        else:
            weights = [Weights.from_raw(w) for w in self.dimension_weights]
        names = list(self.dimension_names) if self.dimension_names is not None else [f"D{i}" for i in range(len(groups))]
        if len(names) != len(groups) or len(weights) != len(groups):
            raise ValueError("dimensions, dimension_weights and dimension_names must align")
        if level_scale.arity ** len(groups) > self.max_tuples:
            raise ValueError(f"{level_scale.arity}^{len(groups)} parent tuples exceed max_tuples={self.max_tuples}")
        feature_names = [spec.name for spec in self.fuzzifier_.specs_]
        self.network_ = NetworkStructure(
            tuple(
                Dimension(n, level_scale, tuple(feature_names[j] for j in g), w)
                for n, g, w in zip(names, groups, weights)
            ),
            output,
        )
        self.groups_ = groups

        tuple_idx = self._tuple_indices(self._evidence(X))
        dims = self.network_.parent_scales
        kb = self._knowledge()
        self.rules_ = build_rulebase(dims, kb, rule_frequencies(self._levels_of(tuple_idx), dims), self.alpha, output)
        self.pseudo_counts_ = self._pseudo_counts()

        if self.batch_size is None:
            batches = [(tuple_idx, codes)]
        else:
            step = int(self.batch_size)
            batches = [(tuple_idx[i : i + step], codes[i : i + step]) for i in range(0, len(codes), step)]
        result = fit_until_converged(
            batches, self._learn_config(), dims, output, pseudo_counts=self.pseudo_counts_
        )
        self.cpt_ = result.cpt
        self.stats_ = result.stats
        self.history_ = list(result.log)
        self.n_iter_ = len(self.history_)
        self.converged_ = result.converged
        self.class_counts_ = np.bincount(codes, minlength=len(classes))
        self.prior_ = self._prior()
        return self

    def partial_fit(self, X, y, classes=None):
        """Accumulate a new batch into the CPT statistics and refit (online update).

        The first call fits from scratch; ``classes`` then fixes the label
        set when ``self.classes`` is unset.
        """
        if not hasattr(self, "cpt_"):
            return self._fit(X, y, classes)
        X, y = validate_data(self, X, y, dtype=float, reset=False)
        lookup = {c: i for i, c in enumerate(self.classes_.tolist())}
        try:
            codes = np.array([lookup[v] for v in np.asarray(y).tolist()], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in classes_") from None
        tuple_idx = self._tuple_indices(self._evidence(X))
        self.cpt_, delta = update_step(
            self.cpt_, self.stats_, (tuple_idx, codes), self._learn_config(), self.pseudo_counts_
        )
        self.history_.append(IterationRecord(len(self.history_) + 1, len(codes), delta))
        self.n_iter_ = len(self.history_)
        self.converged_ = delta < self.tau
        self.class_counts_ = self.class_counts_ + np.bincount(codes, minlength=len(self.classes_))
        self.prior_ = self._prior()
        return self

    def _knowledge(self):
        kb = self.expert_knowledge
        if kb is None:
            return ExpertKnowledge()
        if isinstance(kb, ExpertKnowledge):
            return kb
        return ExpertKnowledge(dict(kb))

    def _pseudo_counts(self):
        if not self.expert_strength:
            return None
        output = self.network_.output
        pseudo = np.zeros((len(self.rules_), output.arity))
        for i, rule in enumerate(self.rules_):
            pseudo[i, output.index(rule.consequent)] = self.expert_strength * rule.weight
        return pseudo

    def _prior(self):
        G = len(self.classes_)
        if isinstance(self.prior, str):
            if self.prior == "uniform":
                return np.full(G, 1.0 / G)
            if self.prior == "empirical":
                counts = self.class_counts_ + float(self.smoothing)
                if counts.sum() <= 0:
                    return np.full(G, 1.0 / G)
                return counts / counts.sum()
            raise ValueError(f"prior must be 'empirical', 'uniform' or an array, got {self.prior!r}")
        prior = np.asarray(self.prior, dtype=float)
        if prior.shape != (G,) or np.any(prior < 0) or prior.sum() <= 0:
            raise ValueError(f"prior must be a non-negative vector of length {G}")
        return prior / prior.sum()

    # -- inference -------------------------------------------------------

    def _evidence(self, X) -> np.ndarray:
        m = self.fuzzifier_.memberships(X)
        return aggregate_matrix(m, self.groups_, [w.values for w in (d.weights for d in self.network_.dimensions)])

    def _levels_of(self, tuple_idx):
        arities = [s.arity for s in self.network_.parent_scales]
        levels = []
        rest = np.asarray(tuple_idx)
        for a in arities:
            levels.append(rest % a)
            rest = rest // a
        return np.stack(levels, axis=1)

    def _tuple_indices(self, evidence) -> np.ndarray:
        levels = argmax_index(evidence, self.tie_break)
        return tuple_indices(np.atleast_2d(levels), [s.arity for s in self.network_.parent_scales])

    def dimension_memberships(self, X) -> np.ndarray:
        """Dimension-level membership tensor of shape (n_samples, n_dims, n_levels)."""
        check_is_fitted(self, "cpt_")
        X = validate_data(self, X, dtype=float, reset=False)
        return self._evidence(X)

    def predict_proba(self, X):
        evidence = self.dimension_memberships(X)
        firing = firing_strengths([evidence[:, d, :] for d in range(evidence.shape[1])], self.t_norm)
        return posterior(firing, self.cpt_.table, self.prior_)

    def predict_distribution(self, X) -> list[GradeDistribution]:
        scale = self.network_.output
        return [GradeDistribution(scale, tuple(p)) for p in self.predict_proba(X)]

    def predict(self, X):
        check_is_fitted(self, "cpt_")
        return self.classes_[argmax_index(self.predict_proba(X), self.tie_break)]

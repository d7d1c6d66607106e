"""Comparison models: weighted scoring and categorical naive Bayes."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.naive_bayes import CategoricalNB
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from ..core import argmax_index
from ..fuzzify import GaussianFuzzifier


def _ordered_classes(y, classes):
    check_classification_targets(y)
    classes = np.unique(y) if classes is None else np.asarray(list(classes))
    lookup = {c: i for i, c in enumerate(classes.tolist())}
    try:
        codes = np.array([lookup[v] for v in np.asarray(y).tolist()], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in classes {classes.tolist()}") from None
    return classes, codes


class WeightedScoringClassifier(ClassifierMixin, BaseEstimator):
    """Traditional weighted score with equal-frequency grade bins.

    Features are min-max scaled on the training data, combined with
    ``weights`` (equal by default), and the training scores are cut at
    quantiles so each grade bin holds the same share of training records.
    Grades follow ``classes`` order, lowest score first.
    """

    def __init__(self, weights=None, classes=None):
        self.weights = weights
        self.classes = classes

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float)
        self.classes_, codes = _ordered_classes(y, self.classes)
        if self.weights is None:
            w = np.full(X.shape[1], 1.0 / X.shape[1])
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (X.shape[1],) or np.any(w < 0) or w.sum() <= 0:
                raise ValueError(f"weights must be {X.shape[1]} non-negative values")
            w = w / w.sum()
        self.weights_ = w
        self.min_ = X.min(axis=0)
        span = X.max(axis=0) - self.min_
        self.span_ = np.where(span > 0, span, 1.0)
        scores = self._score(X)
        G = len(self.classes_)
        self.thresholds_ = np.quantile(scores, np.arange(1, G) / G)
        if np.ptp(scores) == 0:
            warnings.warn("constant training score; every prediction falls in one grade bin", stacklevel=2)
        return self

    def _score(self, X):
        return ((X - self.min_) / self.span_) @ self.weights_

    def weighted_score(self, X):
        """Combined min-max scaled score per record (the quantity being binned)."""
        check_is_fitted(self, "thresholds_")
        return self._score(validate_data(self, X, dtype=float, reset=False))

    def predict(self, X):
        check_is_fitted(self, "thresholds_")
        bins = np.searchsorted(self.thresholds_, self.weighted_score(X), side="right")
        return self.classes_[bins]


class FuzzyNaiveBayesClassifier(ClassifierMixin, BaseEstimator):
    """Categorical naive Bayes over argmax fuzzy levels of each feature."""

    def __init__(self, fuzzifier=None, smoothing=1.0, classes=None, tie_break="higher"):
        self.fuzzifier = fuzzifier
        self.smoothing = smoothing
        self.classes = classes
        self.tie_break = tie_break

    def _levels(self, X):
        return argmax_index(self.fuzzifier_.memberships(X), self.tie_break)

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float)
        self.classes_, codes = _ordered_classes(y, self.classes)
        self.fuzzifier_ = clone(self.fuzzifier if self.fuzzifier is not None else GaussianFuzzifier()).fit(X)
        arity = self.fuzzifier_.scale_.arity
        self.nb_ = CategoricalNB(alpha=self.smoothing, min_categories=arity)
        self.nb_.fit(self._levels(X), codes)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "nb_")
        X = validate_data(self, X, dtype=float, reset=False)
        proba = np.zeros((X.shape[0], len(self.classes_)))
        proba[:, self.nb_.classes_] = self.nb_.predict_proba(self._levels(X))
        return proba

    def predict(self, X):
        check_is_fitted(self, "nb_")
        return self.classes_[argmax_index(self.predict_proba(X), self.tie_break)]

"""Gaussian fuzzification of raw indicator scores.

Each indicator carries one Gaussian membership function per linguistic level.
Raw degrees are normalized so that the degrees of one indicator sum to one;
weighted aggregation then lifts sub-indicator vectors to dimension vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .core import DEFAULT_SCALE, FuzzyVector, LinguisticScale, Weights

#: Default centers for a 0-100 score, one per level of the default scale.
DEFAULT_CENTERS = (40.0, 60.0, 75.0, 90.0)
DEFAULT_SIGMA = 10.0
#: Percentiles of the training column used as centers in data-driven mode.
DEFAULT_PERCENTILES = (20.0, 45.0, 70.0, 90.0)

# Below this every raw degree is treated as underflow.
UNDERFLOW = 1e-12


@dataclass(frozen=True)
class GaussianMf:
    center: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.center) and math.isfinite(self.sigma)):
            raise ValueError("center and sigma must be finite")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def __call__(self, x):
        return membership(x, self)


def membership(x: float, mf: GaussianMf) -> float:
    """Gaussian degree ``exp(-(x - c)^2 / (2 sigma^2))``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"membership of non-finite score {x!r}")
    return math.exp(-((x - mf.center) ** 2) / (2.0 * mf.sigma**2))


@dataclass(frozen=True)
class IndicatorSpec:
    """Membership functions of one indicator, one per scale level."""

    name: str
    scale: LinguisticScale
    mfs: tuple[GaussianMf, ...]
    domain: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "mfs", tuple(self.mfs))
        lo, hi = (float(v) for v in self.domain)
        object.__setattr__(self, "domain", (lo, hi))
        if len(self.mfs) != self.scale.arity:
            raise ValueError(
                f"indicator {self.name!r}: {len(self.mfs)} membership functions "
                f"for {self.scale.arity} levels"
            )
        if not lo < hi:
            raise ValueError(f"indicator {self.name!r}: empty domain {self.domain}")
        centers = self.centers
        if np.any(np.diff(centers) <= 0):
            raise ValueError(f"indicator {self.name!r}: centers must increase strictly, got {centers}")
        if centers[0] < lo or centers[-1] > hi:
            raise ValueError(f"indicator {self.name!r}: centers {centers} outside domain {self.domain}")

    @property
    def centers(self) -> np.ndarray:
        return np.array([mf.center for mf in self.mfs])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([mf.sigma for mf in self.mfs])

    @classmethod
    def from_centers(cls, name, centers, sigmas=DEFAULT_SIGMA, domain=(0.0, 100.0), scale=DEFAULT_SCALE):
        sigmas = np.broadcast_to(np.asarray(sigmas, dtype=float), (len(centers),))
        mfs = tuple(GaussianMf(float(c), float(s)) for c, s in zip(centers, sigmas))
        return cls(name, scale, mfs, tuple(domain))

    @classmethod
    def from_percentiles(cls, name, column, scale=DEFAULT_SCALE, percentiles=None):
        """Place centers at percentiles of ``column``.

        The shared width is half the mean gap between adjacent centers. When
        percentiles collide (heavily discrete columns) the centers fall back
        to the same fractions of the observed range.
        """
        column = np.asarray(column, dtype=float)
        column = column[np.isfinite(column)]
        if column.size == 0:
            raise ValueError(f"indicator {name!r}: no finite values to place centers")
        q = _default_percentiles(scale.arity) if percentiles is None else np.asarray(percentiles, float)
        if len(q) != scale.arity:
            raise ValueError(f"indicator {name!r}: {len(q)} percentiles for {scale.arity} levels")
        lo, hi = float(column.min()), float(column.max())
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        centers = np.percentile(column, q)
        if np.any(np.diff(centers) <= 0):
            centers = lo + (hi - lo) * q / 100.0
        sigma = (centers[-1] - centers[0]) / (scale.arity - 1) / 2.0
        return cls.from_centers(name, centers, sigma, (lo, hi), scale)


def _default_percentiles(arity: int) -> np.ndarray:
    if arity == len(DEFAULT_PERCENTILES):
        return np.array(DEFAULT_PERCENTILES)
    return np.linspace(10.0, 90.0, arity)


def _normalize_rows(raw: np.ndarray, x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # raw: (..., L); x broadcastable to raw[..., 0]; centers: (..., L)
    out = np.array(raw, dtype=float)
    under = np.all(out < UNDERFLOW, axis=-1)
    if np.any(under):
        nearest = np.argmin(np.abs(x[..., None] - centers), axis=-1)
        onehot = np.zeros_like(out)
        np.put_along_axis(onehot, nearest[..., None], 1.0, axis=-1)
        out = np.where(under[..., None], onehot, out)
    return out / out.sum(axis=-1, keepdims=True)


def fuzzify_score(x: float, spec: IndicatorSpec) -> FuzzyVector:
    """Normalized membership vector of one raw score.

    Scores outside the indicator's domain are clamped to its boundary.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"indicator {spec.name!r}: non-finite score {x!r}")
    x = min(max(x, spec.domain[0]), spec.domain[1])
    raw = np.array([membership(x, mf) for mf in spec.mfs])
    degrees = _normalize_rows(raw, np.asarray(x), spec.centers)
    return FuzzyVector(spec.scale, tuple(degrees))


def fuzzify_matrix(X: np.ndarray, specs: Sequence[IndicatorSpec]) -> np.ndarray:
    """Vectorized :func:`fuzzify_score` over columns; returns shape (n, n_specs, arity)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(specs):
        raise ValueError(f"expected {len(specs)} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite scores cannot be fuzzified")
    arities = {spec.scale.arity for spec in specs}
    if len(arities) != 1:
        raise ValueError("all indicators must share one arity")
    lo = np.array([s.domain[0] for s in specs])
    hi = np.array([s.domain[1] for s in specs])
    centers = np.stack([s.centers for s in specs])  # (F, L)
    sigmas = np.stack([s.sigmas for s in specs])
    Xc = np.clip(X, lo, hi)
    raw = np.exp(-((Xc[:, :, None] - centers) ** 2) / (2.0 * sigmas**2))
    return _normalize_rows(raw, Xc, centers)


def aggregate_dimension(children: Sequence[FuzzyVector], w: Weights) -> FuzzyVector:
    """Weighted fuzzy composition of sub-indicator vectors into one dimension vector.

    >>> s = DEFAULT_SCALE
    >>> lo, hi = FuzzyVector.one_hot(s, "p"), FuzzyVector.one_hot(s, "e")
    >>> aggregate_dimension([lo, hi], Weights((0.25, 0.75))).degrees
    (0.25, 0.0, 0.0, 0.75)
    """
    if len(children) != len(w):
        raise ValueError(f"{len(children)} children but {len(w)} weights")
    if not children:
        raise ValueError("at least one child vector is required")
    scale = children[0].scale
    if any(c.scale != scale for c in children):
        raise ValueError("children must share one scale")
    combined = np.zeros(scale.arity)
    for wi, child in zip(w.values, children):
        combined += wi * child.as_array()
    return FuzzyVector.from_raw(scale, combined)


def aggregate_matrix(memberships: np.ndarray, groups, weights) -> np.ndarray:
    """Vectorized :func:`aggregate_dimension`.

    ``memberships`` has shape (n, F, L); ``groups`` lists feature indices per
    dimension and ``weights`` the matching normalized weights. Returns shape
    (n, n_dims, L).
    """
    out = []
    for idx, w in zip(groups, weights):
        w = np.asarray(w, dtype=float)
        agg = np.einsum("nfl,f->nl", memberships[:, list(idx), :], w)
        out.append(agg / agg.sum(axis=-1, keepdims=True))
    return np.stack(out, axis=1)


class GaussianFuzzifier(TransformerMixin, BaseEstimator):
    """Map each raw feature to normalized Gaussian membership degrees.

    Parameters
    ----------
    levels : sequence of str, default=("p", "m", "g", "e")
        Linguistic levels, lowest first.
    centers : array-like of shape (n_levels,) or (n_features, n_levels), default=None
        Fixed membership centers. ``None`` places them at percentiles of
        each training column; a per-column list may mix both, with
        ``None`` marking percentile columns.
    sigmas : float or array-like, default=None
        Membership widths, broadcast against ``centers``. Ignored in
        percentile mode. ``None`` with explicit centers means 10.
    domain : pair or array-like of shape (n_features, 2), default=None
        Clamp range for raw scores. ``None`` uses the training range,
        widened to cover the centers.
    percentiles : sequence of float, default=None
        Percentiles used in data-driven mode; ``None`` picks
        (20, 45, 70, 90) for four levels and an even spread otherwise.
    names : sequence of str, default=None
        Indicator names; column positions when ``None``.

    Attributes
    ----------
    specs_ : list of IndicatorSpec
        One fitted spec per input column.
    scale_ : LinguisticScale
    n_features_in_ : int
    """

    def __init__(self, levels=("p", "m", "g", "e"), centers=None, sigmas=None, domain=None, percentiles=None, names=None):
        self.levels = levels
        self.names = names
        self.centers = centers
        self.sigmas = sigmas
        self.domain = domain
        self.percentiles = percentiles

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=float)
        n_features = X.shape[1]
        scale = LinguisticScale(tuple(self.levels))
        names = [str(n) for n in (self.names if self.names is not None else range(n_features))]
        if len(names) != n_features:
            raise ValueError(f"{len(names)} names for {n_features} features")
        centers = self._per_column(self.centers, n_features, scale.arity)
        sigmas = self._per_column(DEFAULT_SIGMA if self.sigmas is None else self.sigmas, n_features, scale.arity)
        domains = self._per_column(self.domain, n_features, 2)
        specs = []
        for j in range(n_features):
            if centers[j] is None:
                spec = IndicatorSpec.from_percentiles(names[j], X[:, j], scale, self.percentiles)
                if domains[j] is not None:
                    spec = IndicatorSpec(spec.name, scale, spec.mfs, tuple(domains[j]))
            else:
                c = centers[j]
                if domains[j] is None:
                    col = X[:, j][np.isfinite(X[:, j])]
                    lo = min(col.min(), c[0]) if col.size else c[0] - 1.0
                    hi = max(col.max(), c[-1]) if col.size else c[-1] + 1.0
                    dom = (lo, hi)
                else:
                    dom = tuple(domains[j])
                spec = IndicatorSpec.from_centers(names[j], c, sigmas[j], dom, scale)
            specs.append(spec)
        self.specs_ = specs
        self.scale_ = scale
        return self

    @staticmethod
    def _per_column(value, n_features, width):
        """Broadcast a shared setting to one entry per column; ``None`` entries stay ``None``."""
        if value is None:
            return [None] * n_features
        if isinstance(value, (list, tuple)) and any(v is None for v in value):
            if len(value) != n_features:
                raise ValueError(f"expected {n_features} per-column entries, got {len(value)}")
            return [None if v is None else np.broadcast_to(np.asarray(v, dtype=float), (width,)) for v in value]
        arr = np.asarray(value, dtype=float)
        if arr.ndim <= 1:
            return [np.broadcast_to(arr, (width,))] * n_features
        if arr.shape[0] != n_features:
            raise ValueError(f"expected {n_features} per-column entries, got {arr.shape[0]}")
        return [np.broadcast_to(row, (width,)) for row in arr]

    def memberships(self, X) -> np.ndarray:
        """Membership tensor of shape (n_samples, n_features, n_levels)."""
        check_is_fitted(self, "specs_")
        X = validate_data(self, X, dtype=float, reset=False)
        return fuzzify_matrix(X, self.specs_)

    def transform(self, X):
        m = self.memberships(X)
        return m.reshape(m.shape[0], -1)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "specs_")
        return np.array([f"{spec.name}[{lv}]" for spec in self.specs_ for lv in self.scale_])

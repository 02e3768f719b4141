"""Weak hypotheses and their exhaustive weighted searches.

Sign convention used throughout: sign(0) is +1, so a stump outputs
polarity * (+1 if x[feature] >= threshold else -1) and a prototype hypothesis
outputs +1 iff the query is at least ``theta`` away from the prototype.

Both searches scan midpoint thresholds between consecutive distinct sorted
values, plus sentinels outside the data range, and resolve ties toward the
first candidate in scan order so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import (
    as_feature_matrix,
    as_feature_vector,
    as_signed_labels,
    as_weights,
)


@dataclass(frozen=True)
class DecisionStump:
    """Single-feature threshold test: polarity * sign(x[feature] - threshold)."""

    feature: int
    threshold: float
    polarity: int

    def __post_init__(self):
        if self.feature < 0:
            raise ValueError(f"feature index must be >= 0, got {self.feature}")
        if self.polarity not in (-1, 1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity!r}")
        t = float(self.threshold)
        if np.isnan(t):
            raise ValueError("threshold must not be NaN")
        object.__setattr__(self, "threshold", t)
        object.__setattr__(self, "polarity", int(self.polarity))

    def __call__(self, x) -> int:
        return self.polarity * (1 if x[self.feature] >= self.threshold else -1)

    def batch(self, X) -> np.ndarray:
        side = np.where(np.asarray(X)[:, self.feature] >= self.threshold, 1, -1)
        return (self.polarity * side).astype(np.int8)


@dataclass(frozen=True)
class PrototypeHypothesis:
    """Distance test against a stored point: +1 iff ||x - prototype|| >= theta."""

    prototype: np.ndarray
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "prototype", as_feature_vector(self.prototype))
        t = float(self.theta)
        if not np.isfinite(t):
            raise ValueError(f"theta must be finite, got {t}")
        object.__setattr__(self, "theta", t)

    def __call__(self, x) -> int:
        dist = float(np.linalg.norm(np.asarray(x, dtype=np.float64) - self.prototype))
        return 1 if dist >= self.theta else -1

    def batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        dists = np.sqrt(((X - self.prototype) ** 2).sum(axis=1))
        return np.where(dists >= self.theta, 1, -1).astype(np.int8)


def _scan_cut_errors(values, y, w):
    """Weighted error of 'predict +1 iff value >= threshold' over all cuts.

    Returns (thresholds, errors) where errors[t] is the normalized weighted
    error with threshold thresholds[t].  Thresholds are the midpoints between
    consecutive distinct sorted values plus one sentinel on each side, and
    errors are computed from prefix sums consistent with the >= rule.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    yw_plus = np.where(y[order] > 0, w[order], 0.0)   # weight that wants +1
    yw_minus = np.where(y[order] < 0, w[order], 0.0)  # weight that wants -1
    total = w.sum()
    # prefix[i] = weight of examples strictly before position i
    pre_plus = np.concatenate(([0.0], np.cumsum(yw_plus)))
    pre_minus = np.concatenate(([0.0], np.cumsum(yw_minus)))
    distinct_ends = np.nonzero(np.diff(v) != 0)[0]  # last index of each distinct run
    thresholds = np.empty(distinct_ends.size + 2)
    cuts = np.empty(distinct_ends.size + 2, dtype=np.intp)
    thresholds[0] = -np.inf
    cuts[0] = 0
    thresholds[1:-1] = (v[distinct_ends] + v[distinct_ends + 1]) / 2.0
    thresholds[-1] = np.inf
    cuts[-1] = v.size
    # a midpoint can round onto a data value; resolve the cut exactly as
    # evaluation would (everything >= threshold predicts +1)
    if distinct_ends.size:
        cuts[1:-1] = np.searchsorted(v, thresholds[1:-1], side="left")
    # below the cut: predicted -1, wrong for +1 labels; at/above: wrong for -1
    errors = (pre_plus[cuts] + (pre_minus[-1] - pre_minus[cuts])) / total
    return thresholds, errors


def best_stump(X, y, weights) -> tuple[DecisionStump, float]:
    """Exhaustive weighted-error search over all features, cuts, polarities.

    Ties resolve to the lowest feature index, then lowest threshold, then
    polarity +1.  With a degenerate (single-value) feature set this returns a
    constant-output stump with error min(w+, w-)/sum(w).
    """
    X = as_feature_matrix(X)
    y = as_signed_labels(y, X.shape[0])
    w = as_weights(weights, X.shape[0])
    best = None
    for f in range(X.shape[1]):
        thresholds, errors = _scan_cut_errors(X[:, f], y, w)
        # flipping polarity flips every prediction, so its error is 1 - error;
        # row-major argmin realizes the threshold-then-polarity tie order
        errs2 = np.stack([errors, 1.0 - errors], axis=1)
        flat = int(np.argmin(errs2))
        t, p = divmod(flat, 2)
        err = float(errs2[t, p])
        if best is None or err < best[0]:
            best = (err, f, float(thresholds[t]), 1 if p == 0 else -1)
    err, f, threshold, polarity = best
    return DecisionStump(feature=f, threshold=threshold, polarity=polarity), err


def best_prototype(X, y, weights, candidates) -> tuple[PrototypeHypothesis, float]:
    """Pick the candidate point and radius with least weighted error.

    For each candidate, examples are sorted by Euclidean distance to it and the
    same midpoint-cut scan as the stump search runs over distances (predict +1
    iff distance >= theta).  Sentinel radii sit one unit outside the distance
    range so they stay finite.  Ties resolve to the earliest candidate, then
    the smallest radius.
    """
    X = as_feature_matrix(X)
    y = as_signed_labels(y, X.shape[0])
    w = as_weights(weights, X.shape[0])
    C = as_feature_matrix(candidates)
    if C.shape[1] != X.shape[1]:
        raise ValueError(
            f"candidates have {C.shape[1]} features, data has {X.shape[1]}"
        )
    best = None
    for c_index in range(C.shape[0]):
        dists = np.sqrt(((X - C[c_index]) ** 2).sum(axis=1))
        thresholds, errors = _scan_cut_errors(dists, y, w)
        # distances are bounded below, so finite sentinels work at both ends
        thresholds[0] = dists.min() - 1.0
        thresholds[-1] = dists.max() + 1.0
        t = int(np.argmin(errors))
        err = float(errors[t])
        if best is None or err < best[0]:
            best = (err, c_index, float(thresholds[t]))
    err, c_index, theta = best
    return PrototypeHypothesis(prototype=C[c_index], theta=theta), err


def stump_source():
    """Candidate source for preselect_hypotheses backed by best_stump."""

    def source(X, y, w):
        stump, _ = best_stump(X, y, w)
        return stump

    return source


def prototype_source():
    """Candidate source using the sample's own points as prototype candidates."""

    def source(X, y, w):
        hyp, _ = best_prototype(X, y, w, candidates=X)
        return hyp

    return source


def normalize_images(images) -> np.ndarray:
    """Standardize each row to zero mean and unit population variance.

    Rows with zero variance come back as all zeros.
    """
    imgs = as_feature_matrix(images)
    means = imgs.mean(axis=1, keepdims=True)
    stds = imgs.std(axis=1, keepdims=True)  # population std (ddof=0)
    centered = imgs - means
    out = np.divide(centered, stds, out=np.zeros_like(centered), where=stds > 0)
    return out

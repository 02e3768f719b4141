"""Evaluation metrics.

approx_error is the headline number: half the L1 distance between two alpha
vectors after each is normalized by its L1 norm, so it ranges over [0, 1] and
is invariant to positive rescaling of either vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StrongClassifier, score
from .validation import as_signed_labels

N_DIGITS = 10


def approx_error(reference, estimate) -> float:
    """0.5 * || ref/||ref||_1 - est/||est||_1 ||_1, both norms of absolute values."""
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(estimate, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"alpha vectors must share a 1-D shape, got {a.shape} and {b.shape}")
    na = np.abs(a).sum()
    nb = np.abs(b).sum()
    if na == 0 or nb == 0:
        raise ValueError("cannot normalize an all-zero alpha vector")
    return float(0.5 * np.abs(a / na - b / nb).sum())


def approx_error_series(reference, estimates) -> np.ndarray:
    """Row-wise approx_error between two aligned (n, J) trajectories."""
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(estimates, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"trajectories must share a 2-D shape, got {a.shape} and {b.shape}")
    na = np.abs(a).sum(axis=1, keepdims=True)
    nb = np.abs(b).sum(axis=1, keepdims=True)
    if (na == 0).any() or (nb == 0).any():
        raise ValueError("cannot normalize an all-zero alpha vector")
    return 0.5 * np.abs(a / na - b / nb).sum(axis=1)


def test_error(scores, labels) -> float:
    """Fraction misclassified; a score of exactly zero predicts +1."""
    s = np.asarray(scores, dtype=np.float64)
    y = as_signed_labels(labels, s.size)
    predicted = np.where(s >= 0, 1, -1)
    return float((predicted != y).mean())


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative; ties count half.

    Computed from average ranks, which is exactly the pairwise definition with
    tie pairs worth 0.5.  Needs both classes present.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = as_signed_labels(labels, s.size)
    n_pos = int((y > 0).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative label")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(s.size)
    sorted_scores = s[order]
    # average rank within each tied run, 1-based
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = ranks[y > 0].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class OvaEnsemble:
    """One binary classifier per digit, ordered 0..9."""

    classifiers: tuple

    def __post_init__(self):
        cl = tuple(self.classifiers)
        if len(cl) != N_DIGITS:
            raise ValueError(f"expected {N_DIGITS} classifiers, got {len(cl)}")
        if not all(isinstance(c, StrongClassifier) for c in cl):
            raise ValueError("all ensemble members must be StrongClassifier")
        object.__setattr__(self, "classifiers", cl)


def ova_predict(ensemble: OvaEnsemble, x) -> int:
    """Digit with the highest raw vote; ties go to the lowest digit."""
    scores = [score(c, x)[0] for c in ensemble.classifiers]
    return int(np.argmax(scores))


def ova_predict_scores(score_matrix) -> np.ndarray:
    """Vectorized form: rows are examples, columns are digits 0..9."""
    s = np.asarray(score_matrix, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] != N_DIGITS:
        raise ValueError(f"score matrix must be (n, {N_DIGITS}), got {s.shape}")
    return np.argmax(s, axis=1)  # argmax takes the first maximum: lowest digit

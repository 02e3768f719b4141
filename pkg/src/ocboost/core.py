"""Core types shared by the batch and online boosting code.

Everything downstream works on *margins*: the product of a true label and a
weak hypothesis output, so +1 means the hypothesis got the example right.
A margin matrix has one row per example and one column per weak hypothesis,
with the hypothesis pool fixed and ordered up front.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .validation import (
    as_feature_vector,
    as_margin_matrix,
    as_signed_labels,
)


class WeakHypothesis(Protocol):
    """A fixed binary predictor: features -> +1/-1.

    Implementations should be deterministic and stateless.  ``batch`` is the
    vectorized form over an (n, d) feature matrix.
    """

    def __call__(self, x: np.ndarray) -> int: ...

    def batch(self, X: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector paired with a binary label in {+1, -1}."""

    features: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "features", as_feature_vector(self.features))
        if self.label not in (-1, 1):
            raise ValueError(f"label must be +1 or -1, got {self.label!r}")
        object.__setattr__(self, "label", int(self.label))


def compute_margin(hypothesis, example: LabeledExample) -> int:
    """Return label * hypothesis(features); +1 iff the hypothesis is correct."""
    out = int(hypothesis(example.features))
    if out not in (-1, 1):
        raise ValueError(f"hypothesis output must be +1 or -1, got {out!r}")
    return example.label * out


def build_margin_matrix(hypotheses: Sequence, examples: Sequence[LabeledExample]) -> np.ndarray:
    """Evaluate every hypothesis on every example; (n, J) int8 of +1/-1.

    Row order follows ``examples``, column order follows ``hypotheses``.
    """
    if len(hypotheses) < 1 or len(examples) < 1:
        raise ValueError("need at least one hypothesis and one example")
    m = np.empty((len(examples), len(hypotheses)), dtype=np.int8)
    for i, ex in enumerate(examples):
        for j, h in enumerate(hypotheses):
            m[i, j] = compute_margin(h, ex)
    return m


def margins_from_arrays(hypotheses: Sequence, X: np.ndarray, y) -> np.ndarray:
    """Vectorized margin matrix for hypotheses that implement ``batch``."""
    y = as_signed_labels(y, X.shape[0])
    cols = [np.asarray(h.batch(X), dtype=np.int8) for h in hypotheses]
    outputs = np.stack(cols, axis=1)
    return as_margin_matrix(outputs * y[:, None])


@dataclass(frozen=True)
class StrongClassifier:
    """A weighted vote over an ordered pool of weak hypotheses."""

    hypotheses: tuple
    alphas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        a = np.asarray(self.alphas, dtype=np.float64)
        if a.ndim != 1 or a.size != len(self.hypotheses):
            raise ValueError(
                f"need one alpha per hypothesis, got {a.size} for {len(self.hypotheses)}"
            )
        if not np.isfinite(a).all():
            raise ValueError("alphas must be finite")
        object.__setattr__(self, "alphas", a)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        scores = np.zeros(X.shape[0])
        for a, h in zip(self.alphas, self.hypotheses):
            scores += a * np.asarray(h.batch(X), dtype=np.float64)
        return scores

    def predict(self, X: np.ndarray) -> np.ndarray:
        # score of exactly zero predicts +1
        return np.where(self.decision_function(X) >= 0, 1, -1).astype(np.int8)


def score(classifier: StrongClassifier, x) -> tuple[float, int]:
    """Real-valued vote and the predicted label (ties at 0 go to +1)."""
    x = as_feature_vector(x)
    total = 0.0
    for a, h in zip(classifier.alphas, classifier.hypotheses):
        out = int(h(x))
        if out not in (-1, 1):
            raise ValueError(f"hypothesis output must be +1 or -1, got {out!r}")
        total += float(a) * out
    return total, (1 if total >= 0 else -1)


@dataclass(frozen=True)
class AlphaTrajectory:
    """Per-example alpha vectors from a fit or a streamed run.

    Entry i holds the alpha vector in effect once ``start + i`` examples have
    been absorbed, so trajectories from differently initialized runs can be
    aligned by absolute example count.
    """

    start: int
    alphas: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError(f"trajectory must be 2-D, got shape {a.shape}")
        if self.start < 1:
            raise ValueError(f"start must be >= 1, got {self.start}")
        object.__setattr__(self, "alphas", a)

    def __len__(self) -> int:
        return self.alphas.shape[0]

    @property
    def n_coordinates(self) -> int:
        return self.alphas.shape[1]

    def at(self, examples_seen: int) -> np.ndarray:
        """Alpha vector after ``examples_seen`` examples (absolute count)."""
        i = examples_seen - self.start
        if not 0 <= i < len(self):
            raise IndexError(
                f"examples_seen={examples_seen} outside trajectory "
                f"[{self.start}, {self.start + len(self) - 1}]"
            )
        return self.alphas[i]

"""Batch boosting over a fixed, pre-ordered hypothesis pool.

With the pool and its order frozen, a boosting fit reduces to a single pass of
weight bookkeeping: every example starts at weight one (never normalized), and
each coordinate j in turn measures the weighted mass that hypothesis j gets
right (W+) and wrong (W-), sets

    alpha_j = 0.5 * log((W+ + eps) / (W- + eps)),

and reweights each example by exp(-alpha_j * margin_ij).  The functions here
are the exact references the online learners are compared against, so they
favor clarity over cleverness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AlphaTrajectory, StrongClassifier, margins_from_arrays
from .errors import SelectionError, UnboundedAlphaError
from .validation import as_margin_matrix


@dataclass(frozen=True)
class BatchFit:
    """Result of one batch weight fit.

    ``weight_sums[j]`` is (W+, W-) as seen by coordinate j before its alpha was
    set; ``final_weights`` are the example weights after the last reweighting.
    """

    alphas: np.ndarray
    final_weights: np.ndarray
    weight_sums: np.ndarray  # (J, 2)


def fit_weights(margins, smoothing: float = 0.0) -> BatchFit:
    """Fit per-coordinate alphas on a margin matrix.

    Raises UnboundedAlphaError if smoothing is 0 and some coordinate sees only
    one margin sign: its alpha would be infinite.
    """
    m = as_margin_matrix(margins)
    if smoothing < 0:
        raise ValueError(f"smoothing must be >= 0, got {smoothing}")
    mf = m.astype(np.float64)
    n, n_coords = mf.shape
    d = np.ones(n)
    alphas = np.empty(n_coords)
    sums = np.empty((n_coords, 2))
    for j in range(n_coords):
        col = mf[:, j]
        total = d.sum()
        w_plus = d @ (col > 0)
        w_minus = total - w_plus
        sums[j] = (w_plus, w_minus)
        if smoothing == 0.0 and (w_plus == 0.0 or w_minus == 0.0):
            raise UnboundedAlphaError(
                f"coordinate {j + 1} has a single margin sign and smoothing is 0",
                coordinate=j + 1,
            )
        alphas[j] = 0.5 * np.log((w_plus + smoothing) / (w_minus + smoothing))
        d = d * np.exp(-alphas[j] * col)
    return BatchFit(alphas=alphas, final_weights=d, weight_sums=sums)


def weight_matrix(margins, alphas) -> np.ndarray:
    """Per-coordinate example weights implied by fixed alphas.

    Column j holds each example's weight *entering* coordinate j, i.e.
    exp(-sum_{l<j} alpha_l * margin_il); column 0 is all ones.
    """
    m = as_margin_matrix(margins).astype(np.float64)
    a = np.asarray(alphas, dtype=np.float64)
    if a.shape != (m.shape[1],):
        raise ValueError(f"expected {m.shape[1]} alphas, got shape {a.shape}")
    exponents = np.cumsum(m * a, axis=1)
    out = np.ones_like(m)
    out[:, 1:] = np.exp(-exponents[:, :-1])
    return out


def exp_loss(margins, alphas, upto: int | None = None) -> float:
    """Exponential loss sum_i exp(-sum_{j<=upto} alpha_j * margin_ij).

    ``upto`` counts coordinates (1-based); default is all of them.
    """
    m = as_margin_matrix(margins).astype(np.float64)
    a = np.asarray(alphas, dtype=np.float64)
    if a.shape != (m.shape[1],):
        raise ValueError(f"expected {m.shape[1]} alphas, got shape {a.shape}")
    if upto is None:
        upto = m.shape[1]
    if not 0 <= upto <= m.shape[1]:
        raise ValueError(f"upto must be in [0, {m.shape[1]}], got {upto}")
    return float(np.exp(-(m[:, :upto] @ a[:upto])).sum())


def incremental_oracle(margins, smoothing: float = 0.0, start: int = 1) -> AlphaTrajectory:
    """Exact retraining oracle: refit from scratch on every prefix.

    Entry for prefix n is literally ``fit_weights(margins[:n])``, so the cost
    is quadratic in the number of examples.  ``start`` skips prefixes shorter
    than that, which matters when smoothing is 0 and early prefixes would have
    single-sign columns.
    """
    m = as_margin_matrix(margins)
    n = m.shape[0]
    if not 1 <= start <= n:
        raise ValueError(f"start must be in [1, {n}], got {start}")
    rows = np.empty((n - start + 1, m.shape[1]))
    for k, prefix in enumerate(range(start, n + 1)):
        rows[k] = fit_weights(m[:prefix], smoothing=smoothing).alphas
    return AlphaTrajectory(start=start, alphas=rows)


def preselect_hypotheses(examples, candidate_source, rounds: int,
                         sample_size: int, seed: int,
                         smoothing: float = 1e-10) -> StrongClassifier:
    """Pick an ordered hypothesis pool by boosting with resampling.

    Each round draws ``sample_size`` examples with replacement, with draw
    probabilities proportional to the current weights, and asks
    ``candidate_source(X_sample, y_sample, w_sample)`` for the best hypothesis
    on that (uniformly weighted) sample.  The round's alpha is then computed on
    the full weighted set and all weights are updated, exactly as in
    ``fit_weights``.  The returned pool order is the selection order.

    ``smoothing`` keeps alpha finite when a hypothesis is perfect on the
    current weights; it only pads the log ratio.
    """
    if rounds < 1 or sample_size < 1:
        raise ValueError("rounds and sample_size must be >= 1")
    X = np.stack([ex.features for ex in examples])
    y = np.array([ex.label for ex in examples], dtype=np.int8)
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    d = np.ones(n)
    chosen = []
    alphas = []
    for _ in range(rounds):
        probs = d / d.sum()
        idx = rng.choice(n, size=sample_size, replace=True, p=probs)
        # the resample realizes the weighting, so the sample itself is uniform
        hyp = candidate_source(X[idx], y[idx], np.ones(sample_size))
        if hyp is None:
            raise SelectionError(
                f"candidate source returned no hypothesis at round {len(chosen) + 1}"
            )
        margins = np.asarray(hyp.batch(X), dtype=np.float64) * y
        w_plus = d @ (margins > 0)
        w_minus = d.sum() - w_plus
        alpha = 0.5 * np.log((w_plus + smoothing) / (w_minus + smoothing))
        d = d * np.exp(-alpha * margins)
        chosen.append(hyp)
        alphas.append(alpha)
    return StrongClassifier(hypotheses=tuple(chosen), alphas=np.array(alphas))


def training_error(classifier: StrongClassifier, examples) -> float:
    """Fraction of examples the classifier gets wrong (ties predict +1)."""
    X = np.stack([ex.features for ex in examples])
    y = np.array([ex.label for ex in examples], dtype=np.int8)
    return float((classifier.predict(X) != y).mean())

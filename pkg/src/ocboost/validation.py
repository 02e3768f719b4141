"""Input validation helpers.

Every public entry point funnels its array-like inputs through one of these so
error messages are uniform and the numeric code can assume clean arrays.
"""

from __future__ import annotations

import numpy as np


def as_margin_matrix(margins) -> np.ndarray:
    """Validate and return an (n, J) int8 matrix with entries in {+1, -1}."""
    m = np.asarray(margins)
    if m.ndim != 2:
        raise ValueError(f"margin matrix must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"margin matrix must be non-empty, got shape {m.shape}")
    if not np.isin(m, (-1, 1)).all():
        bad = m[~np.isin(m, (-1, 1))].ravel()[0]
        raise ValueError(f"margin entries must be +1 or -1, found {bad!r}")
    return m.astype(np.int8, copy=False)


def as_margin_row(row, n_coordinates: int | None = None) -> np.ndarray:
    """Validate one margin row; optionally check its width."""
    r = np.asarray(row)
    if r.ndim != 1 or r.size < 1:
        raise ValueError(f"margin row must be a non-empty 1-D vector, got shape {r.shape}")
    if not np.isin(r, (-1, 1)).all():
        raise ValueError("margin row entries must be +1 or -1")
    if n_coordinates is not None and r.size != n_coordinates:
        raise ValueError(f"margin row has {r.size} entries, expected {n_coordinates}")
    return r.astype(np.int8, copy=False)


def as_feature_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"feature vector must be 1-D, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("feature vector contains non-finite values")
    return x


def as_feature_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"feature matrix must be 2-D and non-empty, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains non-finite values")
    return X


def as_signed_labels(y, n: int | None = None) -> np.ndarray:
    """Validate binary labels in {+1, -1}, returned as int8."""
    y = np.asarray(y)
    if y.ndim != 1 or y.size < 1:
        raise ValueError(f"labels must be a non-empty 1-D vector, got shape {y.shape}")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be +1 or -1")
    if n is not None and y.size != n:
        raise ValueError(f"got {y.size} labels for {n} examples")
    return y.astype(np.int8, copy=False)


def as_weights(w, n: int | None = None) -> np.ndarray:
    """Validate non-negative finite example weights with a positive total."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size < 1:
        raise ValueError(f"weights must be a non-empty 1-D vector, got shape {w.shape}")
    if n is not None and w.size != n:
        raise ValueError(f"got {w.size} weights for {n} examples")
    if not np.isfinite(w).all() or (w < 0).any():
        raise ValueError("weights must be finite and non-negative")
    if w.sum() <= 0:
        raise ValueError("weights must not sum to zero")
    return w


def as_probabilities(p) -> np.ndarray:
    """Validate a vector of probabilities in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"probabilities must be a non-empty 1-D vector, got shape {p.shape}")
    if not np.isfinite(p).all() or (p < 0).any() or (p > 1).any():
        raise ValueError("probabilities must lie in [0, 1]")
    return p

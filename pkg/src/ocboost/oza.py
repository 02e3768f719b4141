"""Per-coordinate online boosting baseline.

Keeps one running (W+, W-) pair per coordinate and no cross-coordinate
corrections.  Two reweighting modes:

- "averaged": after coordinate j, a correct example's weight is scaled by
  (W+ + W-)/(2 W+) and an incorrect one's by (W+ + W-)/(2 W-), i.e. the
  weight is averaged with its exponentially reweighted self (see
  ``consolidated_reweight``).
- "exponential": the plain exp(-alpha * margin) factor.  This mode is
  operation-for-operation the order-0 coordinate booster, and tests hold the
  two to exact float equality.

Update order per coordinate matches the coordinate booster: add the example's
weight to the matching sum, recompute alpha, then reweight the example.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from .batch import fit_weights, weight_matrix
from .core import AlphaTrajectory, StrongClassifier
from .errors import ConfigError, NumericOverflowError
from .validation import (
    as_feature_matrix,
    as_margin_matrix,
    as_margin_row,
    as_signed_labels,
)

MODES = ("averaged", "exponential")


def consolidated_reweight(weight, alpha, margin):
    """Averaged-mode reweight in closed form: (d + d*exp(-2*alpha*m)) / 2.

    Works elementwise on arrays.  Equals the two-case sum-ratio rule exactly
    in real arithmetic and to rounding in floats, and never drops below the
    exponential rule's result (their gap is a square).
    """
    w = np.asarray(weight, dtype=np.float64)
    a = np.asarray(alpha, dtype=np.float64)
    m = np.asarray(margin, dtype=np.float64)
    out = (w + w * np.exp(-2.0 * a * m)) / 2.0
    return float(out) if out.ndim == 0 else out


class OzaBooster(BaseEstimator):
    """Streaming per-coordinate booster over a fixed hypothesis pool.

    Parameters mirror OnlineCoordinateBooster where they overlap; see module
    docstring for the two reweighting modes.
    """

    def __init__(self, mode: str = "averaged", smoothing: float = 0.01,
                 overflow_limit: float = 1e100, hypotheses=None):
        self.mode = mode
        self.smoothing = smoothing
        self.overflow_limit = overflow_limit
        self.hypotheses = hypotheses

    def _check_config(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.smoothing < 0:
            raise ConfigError(f"smoothing must be >= 0, got {self.smoothing}")
        if not self.overflow_limit > 0:
            raise ConfigError(f"overflow_limit must be > 0, got {self.overflow_limit}")

    def _allocate(self, n_coordinates: int):
        if n_coordinates < 1:
            raise ConfigError(f"need at least one coordinate, got {n_coordinates}")
        self.n_coordinates_ = n_coordinates
        size = n_coordinates + 1  # slot 0 unused; keeps coordinates 1-based
        self.wplus_ = np.zeros(size)
        self.wminus_ = np.zeros(size)
        self.alphas_ = np.zeros(size)
        self.examples_seen_ = 0

    def start_cold(self, n_coordinates: int):
        self._check_config()
        if self.smoothing <= 0:
            raise ConfigError(f"cold start needs smoothing > 0, got {self.smoothing}")
        self._allocate(n_coordinates)
        self.wplus_[1:] = self.smoothing
        self.wminus_[1:] = self.smoothing
        return self

    def start_from_batch(self, margins):
        """Warm start: per-coordinate sums of the batch fit's entering weights."""
        self._check_config()
        m = as_margin_matrix(margins)
        fit = fit_weights(m, smoothing=self.smoothing)
        self._allocate(m.shape[1])
        d = weight_matrix(m, fit.alphas)
        plus = (m > 0).astype(np.float64)
        self.wplus_[1:] = (plus * d).sum(axis=0) + self.smoothing
        self.wminus_[1:] = ((1.0 - plus) * d).sum(axis=0) + self.smoothing
        self.alphas_[1:] = fit.alphas
        self.examples_seen_ = m.shape[0]
        return self

    def _require_state(self):
        if not hasattr(self, "wplus_"):
            raise ConfigError("learner not initialized; call start_cold or start_from_batch")

    def process_margins(self, row) -> np.ndarray:
        self._require_state()
        r = as_margin_row(row, self.n_coordinates_)
        limit = float(self.overflow_limit)
        index = self.examples_seen_ + 1
        averaged = self.mode == "averaged"
        d = 1.0
        for j in range(1, self.n_coordinates_ + 1):
            if r[j - 1] > 0:
                self.wplus_[j] += d
            else:
                self.wminus_[j] += d
            w_plus = self.wplus_[j]
            w_minus = self.wminus_[j]
            if not (w_plus < limit and w_minus < limit):
                raise NumericOverflowError(
                    f"weight sum overflow at example {index}, coordinate {j}",
                    coordinate=j, example_index=index,
                )
            if w_plus > 0 and w_minus > 0:
                new_alpha = 0.5 * math.log(w_plus / w_minus)
            else:
                new_alpha = math.inf
            if not math.isfinite(new_alpha):
                raise NumericOverflowError(
                    f"alpha diverged at example {index}, coordinate {j}",
                    coordinate=j, example_index=index,
                )
            self.alphas_[j] = new_alpha
            if averaged:
                total = w_plus + w_minus
                d = d * (total / (2.0 * w_plus) if r[j - 1] > 0 else total / (2.0 * w_minus))
            else:
                d = d * math.exp(-new_alpha * r[j - 1])
            if not d < limit:
                raise NumericOverflowError(
                    f"example weight overflow at example {index}, coordinate {j}",
                    coordinate=j, example_index=index,
                )
        self.examples_seen_ = index
        return self.alphas_[1:].copy()

    def run_margins(self, margins) -> AlphaTrajectory:
        self._require_state()
        m = as_margin_matrix(margins)
        start = self.examples_seen_ + 1
        out = np.empty((m.shape[0], self.n_coordinates_))
        for i in range(m.shape[0]):
            out[i] = self.process_margins(m[i])
        return AlphaTrajectory(start=start, alphas=out)

    def current_alphas(self) -> np.ndarray:
        self._require_state()
        return self.alphas_[1:].copy()

    # -- sklearn facade ------------------------------------------------------

    def _pool(self):
        if not self.hypotheses:
            raise ConfigError("this method needs the estimator built with a hypothesis pool")
        return tuple(self.hypotheses)

    def fit(self, X, y):
        self.start_cold(len(self._pool()))
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        if not hasattr(self, "wplus_"):
            self.start_cold(len(self._pool()))
        pool = self._pool()
        X = as_feature_matrix(X)
        y = as_signed_labels(y, X.shape[0])
        outputs = np.stack([np.asarray(h.batch(X), dtype=np.int8) for h in pool], axis=1)
        for row in outputs * y[:, None]:
            self.process_margins(row)
        return self

    def to_classifier(self) -> StrongClassifier:
        return StrongClassifier(hypotheses=self._pool(), alphas=self.current_alphas())

    def decision_function(self, X):
        self._require_state()
        return self.to_classifier().decision_function(as_feature_matrix(X))

    def predict(self, X):
        self._require_state()
        return self.to_classifier().predict(as_feature_matrix(X))

    # -- persistence ---------------------------------------------------------

    def save(self, path):
        self._require_state()
        from .ocb import STATE_FORMAT

        lines = [
            STATE_FORMAT,
            "kind=oza",
            f"n_coordinates={self.n_coordinates_}",
            f"mode={self.mode}",
            f"smoothing={float(self.smoothing)!r}",
            f"examples_seen={self.examples_seen_}",
            " ".join(repr(float(v)) for v in self.wplus_[1:]),
            " ".join(repr(float(v)) for v in self.wminus_[1:]),
            " ".join(repr(float(v)) for v in self.alphas_[1:]),
        ]
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "OzaBooster":
        from .io import read_state_header
        from .ocb import _floats

        header, rest = read_state_header(path, expected_kind="oza")
        n = int(header["n_coordinates"])
        est = cls(mode=header["mode"], smoothing=float(header["smoothing"]))
        est._allocate(n)
        est.examples_seen_ = int(header["examples_seen"])
        if len(rest) != 3:
            from .errors import DataFormatError

            raise DataFormatError(f"{path}: bad state snapshot: expected 3 value rows")
        est.wplus_[1:] = _floats(rest[0], n, path)
        est.wminus_[1:] = _floats(rest[1], n, path)
        est.alphas_[1:] = _floats(rest[2], n, path)
        return est

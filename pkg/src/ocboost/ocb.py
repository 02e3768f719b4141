"""Online coordinate boosting.

The batch fit touches every example once per coordinate, so a naive online
version would re-run the whole fit after each arrival.  This learner instead
keeps, for every ordered coordinate pair (j, k <= j) and each margin sign, a
running weight sum

    W[j, k]^sign  ~=  sum over seen examples with margin sign at both j and k
                      of the example's weight entering coordinate j,

and corrects those sums when an earlier alpha moves.  The correction is a
truncated product over the last ``order`` coordinates: a cell whose fraction q
of weight sits on examples the moved coordinate got right shrinks by
q*exp(-dalpha) + (1-q)*exp(+dalpha).  Order 0 applies no corrections and
collapses to the exponential-update baseline; larger orders track the batch
fit more closely at higher cost.

Indexing note: coordinates are 1-based everywhere, with slot 0 a sentinel so
the correction window max(0, j-order)..j-1 is well defined at j=1.  The
sentinel's delta-alpha is pinned at zero, which makes its correction factor
exactly one, so the implementation simply starts each window at k=1.
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

CONVENTIONS = ("as_written", "theorem_consistent")
DEFAULT_SMOOTHING = 0.01
DEFAULT_OVERFLOW_LIMIT = 1e100

STATE_FORMAT = "ocboost-state v1"


def correction_factors(fractions, delta_alphas, flip: bool = False) -> np.ndarray:
    """Per-coordinate correction factors q*exp(-da) + (1-q)*exp(+da).

    ``flip`` swaps the roles of q and 1-q; the negative-sign product under the
    ``theorem_consistent`` convention wants the *complement* of the stored
    fraction weighting exp(-da).
    """
    q = np.asarray(fractions, dtype=np.float64)
    da = np.asarray(delta_alphas, dtype=np.float64)
    if flip:
        q = 1.0 - q
    return q * np.exp(-da) + (1.0 - q) * np.exp(da)


class OnlineCoordinateBooster(BaseEstimator):
    """Streaming approximation to the batch fit over a fixed hypothesis pool.

    Parameters
    ----------
    order : int or None
        How many preceding coordinates each correction product looks back at.
        None means the full history (clamped to the pool size either way).
    smoothing : float
        Initial value of every weight cell on a cold start, and the log-ratio
        pad used by a warm start's internal batch fit.  Cold starts need it
        strictly positive.
    negative_sum_convention : str
        "as_written" uses the stored negative-sign fraction as the weight on
        exp(-dalpha) in the negative correction product; "theorem_consistent"
        uses its complement, which is the fraction of *positive* margins the
        correction's derivation asks for.  The two differ in first order.
        The default is "theorem_consistent": measured against the exact
        incremental oracle on the drifting-stream suite (5 seeds, 3x1000
        examples, 20 hypotheses), its mean normalized approximation error
        improves as the order grows (0.067 at order 0, 0.060 at 5, 0.049 at
        20) while "as_written" degrades (0.067, 0.105, 0.140), so only the
        complement form behaves like a correction.
    overflow_limit : float
        Weight cells or example weights beyond this raise NumericOverflowError.
    rescale_on_overflow : bool
        Instead of raising on a cell overflow, divide the row pair (both
        signs) by its largest diagonal.  Alphas and fractions are unchanged at
        that instant, but later additive updates land on the rescaled rows, so
        the trajectory departs from the vanilla update.  Off by default.
    hypotheses : sequence or None
        Optional fixed pool enabling the fit/partial_fit/predict facade.

    Margin-space methods (``start_cold``/``start_from_batch``/
    ``process_margins``/``run_margins``) are the primary interface; the
    experiments feed precomputed margin rows.
    """

    def __init__(self, order: int | None = None, smoothing: float = DEFAULT_SMOOTHING,
                 negative_sum_convention: str = "theorem_consistent",
                 overflow_limit: float = DEFAULT_OVERFLOW_LIMIT,
                 rescale_on_overflow: bool = False, hypotheses=None):
        self.order = order
        self.smoothing = smoothing
        self.negative_sum_convention = negative_sum_convention
        self.overflow_limit = overflow_limit
        self.rescale_on_overflow = rescale_on_overflow
        self.hypotheses = hypotheses

    # -- lifecycle -----------------------------------------------------------

    def _check_config(self):
        if self.negative_sum_convention not in CONVENTIONS:
            raise ConfigError(
                f"negative_sum_convention must be one of {CONVENTIONS}, "
                f"got {self.negative_sum_convention!r}"
            )
        if self.order is not None and self.order < 0:
            raise ConfigError(f"order must be >= 0, got {self.order}")
        if self.smoothing < 0:
            raise ConfigError(f"smoothing must be >= 0, got {self.smoothing}")
        if not self.overflow_limit > 0:
            raise ConfigError(f"overflow_limit must be > 0, got {self.overflow_limit}")

    def _allocate(self, n_coordinates: int):
        if n_coordinates < 1:
            raise ConfigError(f"need at least one coordinate, got {n_coordinates}")
        self.n_coordinates_ = n_coordinates
        # effective window, clamped to the pool size
        self.order_ = n_coordinates if self.order is None else min(self.order, n_coordinates)
        size = n_coordinates + 1  # slot 0 is the sentinel
        self.wplus_ = np.zeros((size, size))
        self.wminus_ = np.zeros((size, size))
        self.alphas_ = np.zeros(size)
        self.delta_alphas_ = np.zeros(size)
        self.examples_seen_ = 0

    def start_cold(self, n_coordinates: int):
        """Initialize every weight cell to ``smoothing`` (must be > 0)."""
        self._check_config()
        if self.smoothing <= 0:
            raise ConfigError(
                f"cold start needs smoothing > 0, got {self.smoothing}"
            )
        self._allocate(n_coordinates)
        # only the lower triangle (k <= j) is real state; the rest stays 0
        tri = np.tril(np.full_like(self.wplus_, self.smoothing))
        self.wplus_[:] = tri
        self.wminus_[:] = tri
        return self

    def start_from_batch(self, margins):
        """Warm start from a batch fit on a margin prefix.

        Alphas come from the batch fit; cell (j, k) gets ``smoothing`` plus the
        sum, over prefix examples whose margins at j and k share the cell's
        sign, of the example's batch weight entering coordinate j.
        """
        self._check_config()
        m = as_margin_matrix(margins)
        fit = fit_weights(m, smoothing=self.smoothing)
        self._allocate(m.shape[1])
        d = weight_matrix(m, fit.alphas)  # (n, J): weight entering coordinate j
        plus = (m > 0).astype(np.float64)  # (n, J)
        minus = 1.0 - plus
        # cell sums: W[j,k]^+ = sum_i plus[i,j] * plus[i,k] * d[i,j]
        self.wplus_[1:, 1:] = np.tril((plus * d).T @ plus + self.smoothing)
        self.wminus_[1:, 1:] = np.tril((minus * d).T @ minus + self.smoothing)
        # sentinel column: every example "matches" slot 0, so the cell equals
        # the diagonal; keeps all stored fractions inside [0, 1]
        diag = np.arange(1, m.shape[1] + 1)
        self.wplus_[diag, 0] = self.wplus_[diag, diag]
        self.wminus_[diag, 0] = self.wminus_[diag, diag]
        self.wplus_[0, 0] = self.smoothing
        self.wminus_[0, 0] = self.smoothing
        self.alphas_[1:] = fit.alphas
        self.examples_seen_ = m.shape[0]
        return self

    def _require_state(self):
        if not hasattr(self, "wplus_"):
            raise ConfigError("learner not initialized; call start_cold or start_from_batch")

    # -- streaming core ------------------------------------------------------

    def correction_product(self, coordinate: int, sign: int) -> float:
        """Truncated correction product for one coordinate and margin sign.

        Multiplies the correction factors of the window
        max(0, coordinate-order)..coordinate-1 using the current stored
        fractions and delta-alphas.  The sentinel factor at k=0 is identically
        one and is skipped.
        """
        self._require_state()
        j = coordinate
        if not 1 <= j <= self.n_coordinates_:
            raise ValueError(f"coordinate must be in [1, {self.n_coordinates_}], got {j}")
        if sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {sign!r}")
        lo = max(1, j - self.order_)
        if lo >= j:
            return 1.0
        cells = self.wplus_ if sign == 1 else self.wminus_
        q = cells[j, lo:j] / cells[j, j]
        flip = sign == -1 and self.negative_sum_convention == "theorem_consistent"
        return float(np.prod(correction_factors(q, self.delta_alphas_[lo:j], flip=flip)))

    def process_margins(self, row) -> np.ndarray:
        """Absorb one margin row; returns the updated alpha vector (copy)."""
        self._require_state()
        r = as_margin_row(row, self.n_coordinates_)
        wp, wm = self.wplus_, self.wminus_
        alphas, deltas = self.alphas_, self.delta_alphas_
        limit = float(self.overflow_limit)
        index = self.examples_seen_ + 1

        plus_row = np.zeros(self.n_coordinates_ + 1)
        plus_row[1:] = r > 0
        minus_row = np.zeros(self.n_coordinates_ + 1)
        minus_row[1:] = r < 0

        flip = self.negative_sum_convention == "theorem_consistent"
        d = 1.0
        for j in range(1, self.n_coordinates_ + 1):
            lo = max(1, j - self.order_)
            if lo < j:
                window = slice(lo, j)
                da = deltas[window]
                qp = wp[j, window] / wp[j, j]
                qm = wm[j, window] / wm[j, j]
                pi_plus = float(np.prod(correction_factors(qp, da)))
                pi_minus = float(np.prod(correction_factors(qm, da, flip=flip)))
                wp[j, 1:j + 1] *= pi_plus
                wm[j, 1:j + 1] *= pi_minus
            if r[j - 1] > 0:
                wp[j, 1:j + 1] += d * plus_row[1:j + 1]
            else:
                wm[j, 1:j + 1] += d * minus_row[1:j + 1]

            w_plus = wp[j, j]
            w_minus = wm[j, j]
            # off-diagonals never exceed the diagonal, so checking it bounds the row
            if not (w_plus < limit and w_minus < limit):
                if self.rescale_on_overflow:
                    scale = max(w_plus, w_minus)
                    wp[j, :] /= scale
                    wm[j, :] /= scale
                    w_plus = wp[j, j]
                    w_minus = wm[j, j]
                else:
                    raise NumericOverflowError(
                        f"weight cell overflow at example {index}, coordinate {j}",
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
            deltas[j] = new_alpha - alphas[j]
            alphas[j] = new_alpha
            d = d * math.exp(-new_alpha * r[j - 1])
            if not d < limit:
                raise NumericOverflowError(
                    f"example weight overflow at example {index}, coordinate {j}",
                    coordinate=j, example_index=index,
                )
        self.examples_seen_ = index
        return alphas[1:].copy()

    def run_margins(self, margins) -> AlphaTrajectory:
        """Absorb rows in order; trajectory entry i is the alphas after row i."""
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

    def _margin_rows(self, X, y):
        pool = self._pool()
        X = as_feature_matrix(X)
        y = as_signed_labels(y, X.shape[0])
        outputs = np.stack([np.asarray(h.batch(X), dtype=np.int8) for h in pool], axis=1)
        return outputs * y[:, None]

    def fit(self, X, y):
        """Cold-start on the pool, then stream (X, y) in order."""
        self.start_cold(len(self._pool()))
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        if not hasattr(self, "wplus_"):
            self.start_cold(len(self._pool()))
        for row in self._margin_rows(X, y):
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
        """Write a versioned text snapshot of config + learned state.

        Delta-alphas are recomputed before first read on every processed
        example, so they are not persisted.
        """
        self._require_state()
        lines = [
            STATE_FORMAT,
            "kind=ocb",
            f"n_coordinates={self.n_coordinates_}",
            f"order={self.order_}",
            f"smoothing={float(self.smoothing)!r}",
            f"convention={self.negative_sum_convention}",
            f"examples_seen={self.examples_seen_}",
        ]
        for j in range(self.n_coordinates_ + 1):
            lines.append(" ".join(repr(float(v)) for v in self.wplus_[j, :j + 1]))
        for j in range(self.n_coordinates_ + 1):
            lines.append(" ".join(repr(float(v)) for v in self.wminus_[j, :j + 1]))
        lines.append(" ".join(repr(float(v)) for v in self.alphas_[1:]))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "OnlineCoordinateBooster":
        from .io import read_state_header  # deferred; io imports nothing from here

        header, rest = read_state_header(path, expected_kind="ocb")
        n = int(header["n_coordinates"])
        est = cls(
            order=int(header["order"]),
            smoothing=float(header["smoothing"]),
            negative_sum_convention=header["convention"],
        )
        est._allocate(n)
        est.examples_seen_ = int(header["examples_seen"])
        rows_needed = 2 * (n + 1) + 1
        if len(rest) != rows_needed:
            raise _state_error(path, f"expected {rows_needed} value rows, got {len(rest)}")
        for j in range(n + 1):
            est.wplus_[j, :j + 1] = _floats(rest[j], j + 1, path)
        for j in range(n + 1):
            est.wminus_[j, :j + 1] = _floats(rest[n + 1 + j], j + 1, path)
        est.alphas_[1:] = _floats(rest[-1], n, path)
        return est


def _floats(line: str, count: int, path) -> np.ndarray:
    parts = line.split()
    if len(parts) != count:
        raise _state_error(path, f"expected {count} values per row, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise _state_error(path, str(exc)) from exc


def _state_error(path, detail):
    from .errors import DataFormatError

    return DataFormatError(f"{path}: bad state snapshot: {detail}")


def brute_force_q_error(weights, margins_j, in_subset, delta_alpha: float, q):
    """Squared correction error of a candidate fraction q on explicit data.

    For the examples selected by ``in_subset`` (the fixed-sign subset at the
    later coordinate), each contributes weight * delta^2 times (1-q)^2 if its
    margin at the moved coordinate is +1, else q^2, where
    delta = exp(-delta_alpha) - exp(+delta_alpha).  Grid-minimizing this in q
    must land on the stored-fraction formula; tests use it as the oracle.
    ``q`` may be a scalar or a 1-D grid; the result matches its shape.
    """
    w = np.asarray(weights, dtype=np.float64)
    mj = np.asarray(margins_j)
    mask = np.asarray(in_subset, dtype=bool)
    if not (w.shape == mj.shape == mask.shape):
        raise ValueError("weights, margins_j and in_subset must share a shape")
    delta_sq = (math.exp(-delta_alpha) - math.exp(delta_alpha)) ** 2
    q_arr = np.asarray(q, dtype=np.float64)[..., np.newaxis]
    per = np.where(mj > 0, (1.0 - q_arr) ** 2, q_arr ** 2) * w * delta_sq
    total = per[..., mask].sum(axis=-1)
    return float(total) if np.ndim(q) == 0 else total


def optimal_q(weights, margins_j, in_subset) -> float:
    """The error-minimizing fraction: weighted share of +1 margins in the subset."""
    w = np.asarray(weights, dtype=np.float64)
    mj = np.asarray(margins_j)
    mask = np.asarray(in_subset, dtype=bool)
    total = w[mask].sum()
    if total <= 0:
        raise ValueError("subset weight must be positive")
    return float(w[mask & (mj > 0)].sum() / total)

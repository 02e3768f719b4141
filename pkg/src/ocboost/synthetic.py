"""Synthetic margin streams with abrupt concept drift.

Each hypothesis column k has a probability p_k of producing a +1 margin;
cells are drawn independently.  A stream is a concatenation of segments, each
segment's probability vector obtained by perturbing the previous one with
clamped Gaussian noise, so every boundary is an abrupt distribution change.

All randomness flows through numpy's default_rng (PCG64), which is seeded,
portable, and stable across platforms; one generator per stream makes the
whole artifact a pure function of the spec.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import as_probabilities

DEFAULT_PERTURB_SCALE = 0.1


@dataclass(frozen=True)
class ColumnProbs:
    """Per-column probabilities of a +1 margin."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", as_probabilities(self.probs))

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class DriftSpec:
    """Shape and seed of a drifting margin stream."""

    segments: int
    rows_per_segment: int
    n_hypotheses: int
    perturb_scale: float = DEFAULT_PERTURB_SCALE
    seed: int = 0

    def __post_init__(self):
        if self.segments < 1 or self.rows_per_segment < 1 or self.n_hypotheses < 1:
            raise ValueError("segments, rows_per_segment and n_hypotheses must be >= 1")
        if self.perturb_scale < 0:
            raise ValueError(f"perturb_scale must be >= 0, got {self.perturb_scale}")


@dataclass(frozen=True)
class DriftStream:
    """A generated stream: margins plus the distribution that produced them."""

    margins: np.ndarray = field(repr=False)
    boundaries: tuple[int, ...]
    segment_probs: tuple[ColumnProbs, ...]
    spec: DriftSpec


def _uniform_probs(n_hypotheses: int, rng) -> ColumnProbs:
    return ColumnProbs(rng.uniform(0.0, 1.0, size=n_hypotheses))


def _perturb(probs: ColumnProbs, scale: float, rng) -> ColumnProbs:
    shifted = probs.probs + scale * rng.standard_normal(probs.probs.size)
    return ColumnProbs(np.clip(shifted, 0.0, 1.0))


def gen_probs(n_hypotheses: int, seed: int) -> ColumnProbs:
    """Fresh uniform [0, 1] probability per column."""
    if n_hypotheses < 1:
        raise ValueError(f"n_hypotheses must be >= 1, got {n_hypotheses}")
    return _uniform_probs(n_hypotheses, np.random.default_rng(seed))


def drift_probs(probs: ColumnProbs, perturb_scale: float, seed: int) -> ColumnProbs:
    """Perturb each probability with scaled Gaussian noise, clamped to [0, 1]."""
    if perturb_scale < 0:
        raise ValueError(f"perturb_scale must be >= 0, got {perturb_scale}")
    return _perturb(probs, perturb_scale, np.random.default_rng(seed))


def sample_margins(probs: ColumnProbs, rows: int, rng) -> np.ndarray:
    """Draw an (rows, J) int8 matrix; cell is +1 with its column's probability."""
    if rows < 1:
        raise ValueError(f"rows must be >= 1, got {rows}")
    draws = rng.random((rows, len(probs)))
    return np.where(draws < probs.probs, 1, -1).astype(np.int8)


def gen_drift_stream(spec: DriftSpec) -> DriftStream:
    """Generate the whole stream from one seeded generator.

    Returns the concatenated margins, the row indices where a new segment
    starts (exclusive of 0), and each segment's probability vector.
    """
    rng = np.random.default_rng(spec.seed)
    probs = _uniform_probs(spec.n_hypotheses, rng)
    segment_probs = [probs]
    blocks = [sample_margins(probs, spec.rows_per_segment, rng)]
    for _ in range(spec.segments - 1):
        probs = _perturb(probs, spec.perturb_scale, rng)
        segment_probs.append(probs)
        blocks.append(sample_margins(probs, spec.rows_per_segment, rng))
    boundaries = tuple(
        spec.rows_per_segment * s for s in range(1, spec.segments)
    )
    return DriftStream(
        margins=np.concatenate(blocks, axis=0),
        boundaries=boundaries,
        segment_probs=tuple(segment_probs),
        spec=spec,
    )

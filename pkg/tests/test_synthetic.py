"""Drifting margin streams: shapes, determinism, and distribution checks."""

import numpy as np
import pytest

from ocboost.synthetic import (
    ColumnProbs,
    DriftSpec,
    drift_probs,
    gen_drift_stream,
    gen_probs,
    sample_margins,
)


def test_stream_shape_and_boundaries():
    spec = DriftSpec(segments=3, rows_per_segment=40, n_hypotheses=7, seed=5)
    stream = gen_drift_stream(spec)
    assert stream.margins.shape == (120, 7)
    assert stream.margins.dtype == np.int8
    assert set(np.unique(stream.margins)) <= {-1, 1}
    assert stream.boundaries == (40, 80)
    assert len(stream.segment_probs) == 3
    assert stream.spec == spec


def test_single_segment_has_no_boundaries():
    stream = gen_drift_stream(DriftSpec(segments=1, rows_per_segment=10, n_hypotheses=2))
    assert stream.boundaries == ()


def test_same_seed_reproduces_exactly():
    spec = DriftSpec(segments=2, rows_per_segment=50, n_hypotheses=5, seed=123)
    a = gen_drift_stream(spec)
    b = gen_drift_stream(spec)
    assert np.array_equal(a.margins, b.margins)
    for pa, pb in zip(a.segment_probs, b.segment_probs):
        assert np.array_equal(pa.probs, pb.probs)


def test_different_seeds_differ():
    base = DriftSpec(segments=1, rows_per_segment=100, n_hypotheses=10, seed=0)
    other = DriftSpec(segments=1, rows_per_segment=100, n_hypotheses=10, seed=1)
    assert not np.array_equal(gen_drift_stream(base).margins,
                              gen_drift_stream(other).margins)


def test_spec_validation():
    with pytest.raises(ValueError):
        DriftSpec(segments=0, rows_per_segment=10, n_hypotheses=2)
    with pytest.raises(ValueError):
        DriftSpec(segments=1, rows_per_segment=10, n_hypotheses=2, perturb_scale=-0.5)
    with pytest.raises(ValueError):
        ColumnProbs(np.array([0.5, 1.2]))
    with pytest.raises(ValueError):
        sample_margins(ColumnProbs(np.array([0.5])), rows=0, rng=np.random.default_rng(0))


def test_empirical_frequencies_track_probs():
    probs = ColumnProbs(np.array([0.1, 0.5, 0.9]))
    m = sample_margins(probs, 20_000, np.random.default_rng(0))
    freq = (m > 0).mean(axis=0)
    assert freq == pytest.approx([0.1, 0.5, 0.9], abs=0.02)


def test_gen_probs_is_uniform_on_average():
    probs = gen_probs(5000, seed=4)
    assert (probs.probs >= 0).all() and (probs.probs <= 1).all()
    assert probs.probs.mean() == pytest.approx(0.5, abs=0.05)


def test_drift_moves_probs_by_folded_gaussian_amounts():
    base = gen_probs(20_000, seed=6)
    moved = drift_probs(base, perturb_scale=0.1, seed=7)
    shifts = np.abs(moved.probs - base.probs)
    # mean |N(0, 0.1)| is 0.1 * sqrt(2/pi) ~ 0.0798; clamping only shrinks it
    assert 0.06 < shifts.mean() < 0.10
    assert np.array_equal(drift_probs(base, 0.1, seed=7).probs, moved.probs)


def test_segments_share_one_generator():
    # consecutive segments must differ (drift actually applied)
    spec = DriftSpec(segments=2, rows_per_segment=5, n_hypotheses=50, seed=9,
                     perturb_scale=0.3)
    stream = gen_drift_stream(spec)
    first, second = stream.segment_probs
    assert not np.array_equal(first.probs, second.probs)
    assert (np.abs(first.probs - second.probs) > 0).any()

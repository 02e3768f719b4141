"""The online coordinate booster against hand traces and a literal scalar
transcription of its update rule.

The scalar reference below is deliberately naive (nested Python loops, plain
floats) so that any disagreement points at the vectorized implementation's
bookkeeping: window bounds, stale delta-alphas, convention handling, or the
add-after-scale order.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from conftest import random_margins
from ocboost.batch import fit_weights
from ocboost.errors import ConfigError, DataFormatError, NumericOverflowError
from ocboost.ocb import (
    CONVENTIONS,
    OnlineCoordinateBooster,
    brute_force_q_error,
    correction_factors,
    optimal_q,
)
from ocboost.oza import OzaBooster


def reference_run(margins, eps, order, convention):
    """Cold-start scalar transcription of the per-example update."""
    n_coords = margins.shape[1]
    k_eff = min(order, n_coords)
    wp = [[eps] * (j + 1) for j in range(n_coords + 1)]
    wm = [[eps] * (j + 1) for j in range(n_coords + 1)]
    alphas = [0.0] * (n_coords + 1)
    deltas = [0.0] * (n_coords + 1)
    out = []
    for row in margins:
        d = 1.0
        for j in range(1, n_coords + 1):
            pi_plus = 1.0
            pi_minus = 1.0
            for k in range(max(0, j - k_eff), j):
                if k == 0:
                    # sentinel: matches every example and never moves, so its
                    # factor is exactly one
                    continue
                da = deltas[k]
                qp = wp[j][k] / wp[j][j]
                qm = wm[j][k] / wm[j][j]
                if convention == "theorem_consistent":
                    qm = 1.0 - qm
                pi_plus *= qp * math.exp(-da) + (1.0 - qp) * math.exp(da)
                pi_minus *= qm * math.exp(-da) + (1.0 - qm) * math.exp(da)
            for k in range(1, j + 1):
                wp[j][k] = wp[j][k] * pi_plus + d * (row[k - 1] > 0) * (row[j - 1] > 0)
                wm[j][k] = wm[j][k] * pi_minus + d * (row[k - 1] < 0) * (row[j - 1] < 0)
            new_alpha = 0.5 * math.log(wp[j][j] / wm[j][j])
            deltas[j] = new_alpha - alphas[j]
            alphas[j] = new_alpha
            d *= math.exp(-new_alpha * row[j - 1])
        out.append(list(alphas[1:]))
    return np.array(out)


# -- initialization ------------------------------------------------------------

def test_cold_start_state():
    est = OnlineCoordinateBooster(smoothing=0.5).start_cold(3)
    lower = np.tril_indices(4)
    assert (est.wplus_[lower] == 0.5).all()
    assert (est.wminus_[lower] == 0.5).all()
    assert np.triu(est.wplus_, k=1).sum() == 0.0
    assert (est.alphas_ == 0).all() and (est.delta_alphas_ == 0).all()
    assert est.examples_seen_ == 0


def test_cold_start_requires_smoothing():
    with pytest.raises(ConfigError):
        OnlineCoordinateBooster(smoothing=0.0).start_cold(3)


def test_config_validation():
    with pytest.raises(ConfigError):
        OnlineCoordinateBooster(negative_sum_convention="bogus").start_cold(2)
    with pytest.raises(ConfigError):
        OnlineCoordinateBooster(order=-1).start_cold(2)
    with pytest.raises(ConfigError):
        OnlineCoordinateBooster(smoothing=-0.1).start_cold(2)
    with pytest.raises(ConfigError):
        OnlineCoordinateBooster().process_margins([1])  # not started


def test_warm_start_cells_hand_fixture():
    # worked by hand: batch weights entering coordinate 2 are
    # (1/sqrt2, 1/sqrt2, sqrt2)
    m = np.array([[1, 1], [1, -1], [-1, 1]], dtype=np.int8)
    est = OnlineCoordinateBooster(smoothing=0.0).start_from_batch(m)
    assert est.wplus_[1, 1] == pytest.approx(2.0, abs=1e-12)
    assert est.wminus_[1, 1] == pytest.approx(1.0, abs=1e-12)
    assert est.wplus_[2, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert est.wminus_[2, 1] == 0.0  # no example has both margins -1
    assert est.wplus_[2, 2] == pytest.approx(3 / math.sqrt(2), abs=1e-12)
    assert est.wminus_[2, 2] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    # sentinel column mirrors the diagonal; every example "matches" slot 0
    assert est.wplus_[1, 0] == est.wplus_[1, 1]
    assert est.wplus_[2, 0] == est.wplus_[2, 2]
    assert est.examples_seen_ == 3


def test_warm_start_alphas_are_batch_alphas():
    rng = np.random.default_rng(8)
    m = random_margins(rng, 50, 6, both_signs=True)
    est = OnlineCoordinateBooster(smoothing=0.01).start_from_batch(m)
    assert np.array_equal(est.current_alphas(), fit_weights(m, 0.01).alphas)
    assert (np.diag(est.wplus_)[1:] > 0).all()


# -- correction products -------------------------------------------------------

def test_correction_factor_single_term():
    # one factor, q = 1/3, dalpha = ln 2
    val = correction_factors([1 / 3], [math.log(2)])
    assert val == pytest.approx([1.5], abs=1e-12)
    flipped = correction_factors([1 / 3], [math.log(2)], flip=True)
    assert flipped == pytest.approx([1.0], abs=1e-12)
    # zero delta makes the factor one regardless of q
    assert correction_factors([0.123], [0.0]) == pytest.approx([1.0], abs=0)


def test_correction_product_conventions():
    for conv, expected in (("as_written", 1.5), ("theorem_consistent", 1.0)):
        est = OnlineCoordinateBooster(
            smoothing=0.5, negative_sum_convention=conv
        ).start_cold(2)
        est.wminus_[2, 1] = 1.0
        est.wminus_[2, 2] = 3.0
        est.delta_alphas_[1] = math.log(2)
        assert est.correction_product(2, -1) == pytest.approx(expected, abs=1e-12)
        # the positive-sign product never flips
        est.wplus_[2, 1] = 1.0
        est.wplus_[2, 2] = 3.0
        assert est.correction_product(2, 1) == pytest.approx(1.5, abs=1e-12)


def test_correction_product_trivial_cases():
    est = OnlineCoordinateBooster(order=0, smoothing=0.5).start_cold(3)
    assert est.correction_product(2, 1) == 1.0  # order 0: empty window
    full = OnlineCoordinateBooster(smoothing=0.5).start_cold(3)
    assert full.correction_product(1, 1) == 1.0  # only the sentinel precedes j=1
    assert full.correction_product(3, -1) == 1.0  # all deltas still zero
    with pytest.raises(ValueError):
        full.correction_product(0, 1)
    with pytest.raises(ValueError):
        full.correction_product(1, 0)


# -- streaming updates ---------------------------------------------------------

def test_single_coordinate_hand_trace():
    est = OnlineCoordinateBooster(smoothing=0.5).start_cold(1)
    est.process_margins([1])
    assert est.wplus_[1, 1] == 1.5 and est.wminus_[1, 1] == 0.5
    assert est.current_alphas() == pytest.approx([0.5 * math.log(3)], abs=1e-12)
    est.process_margins([-1])
    assert est.wplus_[1, 1] == 1.5 and est.wminus_[1, 1] == 1.5
    assert est.current_alphas() == pytest.approx([0.0], abs=1e-15)


@pytest.mark.parametrize("convention", CONVENTIONS)
@pytest.mark.parametrize("order", [0, 2, 4])
def test_matches_scalar_reference(convention, order):
    rng = np.random.default_rng(order * 10 + len(convention))
    m = random_margins(rng, 40, 4)
    est = OnlineCoordinateBooster(
        order=order, smoothing=0.25, negative_sum_convention=convention
    ).start_cold(4)
    traj = est.run_margins(m)
    expected = reference_run(m, 0.25, order, convention)
    assert np.allclose(traj.alphas, expected, rtol=1e-12, atol=1e-13)


def test_order_clamps_to_pool_size():
    rng = np.random.default_rng(2)
    m = random_margins(rng, 30, 3)
    exact = OnlineCoordinateBooster(order=3, smoothing=0.1).start_cold(3)
    clamped = OnlineCoordinateBooster(order=13, smoothing=0.1).start_cold(3)
    t1 = exact.run_margins(m)
    t2 = clamped.run_margins(m)
    assert np.array_equal(t1.alphas, t2.alphas)
    assert np.array_equal(exact.wplus_, clamped.wplus_)
    assert np.array_equal(exact.wminus_, clamped.wminus_)
    assert clamped.order_ == 3


def test_order_none_means_full_history():
    est = OnlineCoordinateBooster(smoothing=0.1).start_cold(7)
    assert est.order_ == 7


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 30), st.integers(2, 5), st.integers(0, 5))
def test_stored_fractions_stay_in_unit_interval(seed, n, j, order):
    """With a uniform cold start every off-diagonal cell sums a subset of its
    diagonal's examples, so the q ratios must stay inside [0, 1] even after
    arbitrarily many multiplicative corrections."""
    rng = np.random.default_rng(seed)
    m = random_margins(rng, n, j)
    est = OnlineCoordinateBooster(order=order, smoothing=0.3).start_cold(j)
    est.run_margins(m)
    for cells in (est.wplus_, est.wminus_):
        for row in range(1, j + 1):
            assert (cells[row, 1:row + 1] >= 0).all()
            assert (cells[row, 1:row] <= cells[row, row] + 1e-15).all()
    # the diagonal ratio is the alpha, by construction
    diag_alpha = 0.5 * np.log(np.diag(est.wplus_)[1:] / np.diag(est.wminus_)[1:])
    assert np.allclose(est.current_alphas(), diag_alpha, rtol=1e-12)


def test_trajectory_start_tracks_examples_seen():
    rng = np.random.default_rng(4)
    m = random_margins(rng, 20, 2)
    est = OnlineCoordinateBooster(smoothing=0.1).start_cold(2)
    first = est.run_margins(m[:8])
    second = est.run_margins(m[8:])
    assert first.start == 1 and second.start == 9
    assert est.examples_seen_ == 20


# -- overflow handling ---------------------------------------------------------

def test_cell_overflow_raises_with_location():
    est = OnlineCoordinateBooster(order=0, smoothing=0.5, overflow_limit=30.0)
    est.start_cold(1)
    with pytest.raises(NumericOverflowError) as exc:
        for _ in range(100):
            est.process_margins([1])
    assert exc.value.coordinate == 1
    assert exc.value.example_index == 30  # cell 0.5 + n crosses 30 there


def test_rescale_mode_survives_overflow():
    est = OnlineCoordinateBooster(order=0, smoothing=0.5, overflow_limit=30.0,
                                  rescale_on_overflow=True)
    est.start_cold(1)
    for _ in range(100):
        est.process_margins([1])
    assert est.examples_seen_ == 100
    assert np.isfinite(est.current_alphas()).all()
    assert est.wplus_[1, 1] < 30.0 and est.wminus_[1, 1] < 30.0


def test_zeroed_diagonal_raises_overflow_error():
    est = OnlineCoordinateBooster(smoothing=0.5).start_cold(1)
    est.wminus_[1, 1] = 0.0
    with pytest.raises(NumericOverflowError):
        est.process_margins([1])


# -- q estimate analysis -------------------------------------------------------

def test_brute_force_error_hand_values():
    w = np.ones(3)
    mj = np.array([1, -1, -1])
    subset = np.ones(3, dtype=bool)
    da = math.log(2)  # delta = 1/2 - 2 = -3/2, delta^2 = 9/4
    assert brute_force_q_error(w, mj, subset, da, 1 / 3) == pytest.approx(1.5, abs=1e-12)
    assert optimal_q(w, mj, subset) == pytest.approx(1 / 3, abs=1e-15)
    grid = np.linspace(0, 1, 101)
    errs = brute_force_q_error(w, mj, subset, da, grid)
    assert errs.shape == grid.shape
    assert abs(grid[np.argmin(errs)] - 1 / 3) <= 0.01


def test_optimal_q_respects_weights_and_subset():
    w = np.array([1.0, 3.0, 1.0, 2.0])
    mj = np.array([1, 1, -1, -1])
    subset = np.array([True, True, True, False])
    assert optimal_q(w, mj, subset) == pytest.approx(4 / 5, abs=1e-15)
    with pytest.raises(ValueError):
        optimal_q(w, mj, np.zeros(4, dtype=bool))


# -- persistence ---------------------------------------------------------------

def test_save_load_resumes_exactly(tmp_path):
    rng = np.random.default_rng(13)
    m = random_margins(rng, 60, 4)
    est = OnlineCoordinateBooster(order=2, smoothing=0.05,
                                  negative_sum_convention="as_written")
    est.start_cold(4)
    est.run_margins(m[:30])
    path = tmp_path / "mid.state"
    est.save(path)
    revived = OnlineCoordinateBooster.load(path)
    assert revived.examples_seen_ == 30
    assert revived.order_ == 2 and revived.negative_sum_convention == "as_written"
    assert np.array_equal(revived.wplus_, est.wplus_)
    assert np.array_equal(revived.wminus_, est.wminus_)
    t1 = est.run_margins(m[30:])
    t2 = revived.run_margins(m[30:])
    assert np.array_equal(t1.alphas, t2.alphas)
    assert t2.start == 31


def test_load_rejects_corrupt_snapshots(tmp_path):
    bad = tmp_path / "bad.state"
    bad.write_text("something else\n")
    with pytest.raises(DataFormatError):
        OnlineCoordinateBooster.load(bad)
    est = OzaBooster(smoothing=0.5).start_cold(2)
    oza_path = tmp_path / "oza.state"
    est.save(oza_path)
    with pytest.raises(DataFormatError):
        OnlineCoordinateBooster.load(oza_path)  # kind mismatch
    ocb = OnlineCoordinateBooster(smoothing=0.5).start_cold(2)
    good = tmp_path / "good.state"
    ocb.save(good)
    truncated = tmp_path / "trunc.state"
    truncated.write_text("\n".join(good.read_text().splitlines()[:-1]) + "\n")
    with pytest.raises(DataFormatError):
        OnlineCoordinateBooster.load(truncated)


# -- estimator facade ----------------------------------------------------------

def test_facade_fit_predict():
    from ocboost.weak import DecisionStump

    rng = np.random.default_rng(17)
    X = np.concatenate([rng.normal(-1, 0.3, (30, 1)), rng.normal(1, 0.3, (30, 1))])
    y = np.array([-1] * 30 + [1] * 30)
    pool = [DecisionStump(0, t, 1) for t in (-0.5, 0.0, 0.5)]
    est = OnlineCoordinateBooster(smoothing=0.1, hypotheses=pool).fit(X, y)
    assert (est.predict(X) == y).mean() > 0.95
    fresh = clone(est)  # params round-trip through get_params
    assert fresh.smoothing == 0.1 and len(fresh.hypotheses) == 3
    with pytest.raises(ConfigError):
        OnlineCoordinateBooster().fit(X, y)  # no pool given


def test_cold_state_predicts_plus_one():
    from ocboost.weak import DecisionStump

    pool = [DecisionStump(0, 0.0, 1)]
    est = OnlineCoordinateBooster(smoothing=0.5, hypotheses=pool).start_cold(1)
    X = np.array([[1.0], [-1.0]])
    assert np.array_equal(est.decision_function(X), [0.0, 0.0])
    assert np.array_equal(est.predict(X), [1, 1])

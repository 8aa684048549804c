import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cleanselect import (
    SelectionResult,
    consistency_select,
    intersect,
    loss_select,
    rank_auc,
    selection_quality,
)
from cleanselect.selection import SelectionError

import oracles


def rows_from_scores(scores):
    scores = np.asarray(scores, dtype=np.float64)
    return SelectionResult(scores, scores >= 0.5, "test", 0.5)


def test_consistency_hand_row():
    probs = np.array([[0.6, 0.3, 0.1]])
    res = consistency_select(probs, np.array([1]), threshold=0.5)
    assert res.scores[0] == 0.5
    assert res.mask[0]


def test_consistency_theta_one_equals_argmax_agreement():
    rng = np.random.default_rng(0)
    probs = rng.dirichlet(np.ones(4), size=50)
    labels = rng.integers(0, 4, size=50)
    res = consistency_select(probs, labels, threshold=1.0)
    assert np.array_equal(res.mask, probs.argmax(axis=1) == labels)


def test_consistency_uniform_row_scores_one():
    probs = np.full((1, 4), 0.25)
    res = consistency_select(probs, np.array([2]), threshold=1.0)
    assert res.scores[0] == 1.0
    assert res.mask[0]


def test_consistency_score_one_iff_label_attains_max():
    rng = np.random.default_rng(1)
    probs = rng.dirichlet(np.ones(3), size=100)
    labels = rng.integers(0, 3, size=100)
    res = consistency_select(probs, labels)
    attains = probs[np.arange(100), labels] == probs.max(axis=1)
    assert np.array_equal(res.scores == 1.0, attains)
    assert np.all(res.scores > 0.0)
    assert np.all(res.scores <= 1.0)


def test_consistency_threshold_bounds():
    probs = np.full((1, 2), 0.5)
    with pytest.raises(SelectionError):
        consistency_select(probs, np.array([0]), threshold=0.0)
    with pytest.raises(SelectionError):
        consistency_select(probs, np.array([0]), threshold=1.5)


def test_loss_select_bimodal_saturates():
    # two confidence groups: p ~ 1 and p ~ 1e-4 (losses ~ 0 and ~ 9)
    rng = np.random.default_rng(2)
    n = 200
    good = 1.0 - 10.0 ** rng.uniform(-7, -6, n)
    bad = 10.0 ** rng.uniform(-4.1, -3.9, n)
    p_label = np.concatenate([good, bad])
    probs = np.column_stack([p_label, 1.0 - p_label])
    labels = np.zeros(2 * n, dtype=np.int64)
    res = loss_select(probs, labels, threshold=0.5, mode="single")
    assert np.all(res.scores[:n] > 0.99)
    assert np.all(res.scores[n:] < 0.01)
    assert np.all(res.mask[:n])
    assert not res.mask[n:].any()


def test_loss_select_per_class_degenerate_falls_back():
    # class 1's losses are all identical: it must fall back to the global fit
    p0 = np.array([0.9, 0.1, 0.6, 0.2, 0.85, 0.15])
    probs = np.column_stack([p0, 1.0 - p0])
    labels = np.array([0, 0, 0, 0, 1, 1])
    probs[4] = probs[5] = [0.3, 0.7]
    res = loss_select(probs, labels, mode="per_class")
    assert res.warnings
    assert "class 1" in res.warnings[0]
    assert np.all(np.isfinite(res.scores))


def test_loss_select_theta_zero_selects_all():
    rng = np.random.default_rng(3)
    probs = rng.dirichlet(np.ones(3), size=60)
    labels = rng.integers(0, 3, size=60)
    res = loss_select(probs, labels, threshold=0.0)
    assert res.mask.all()


def test_loss_select_floors_zero_probabilities():
    probs = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0], [0.9, 0.1]])
    labels = np.array([1, 0, 0, 0])
    res = loss_select(probs, labels, mode="single")
    assert np.all(np.isfinite(res.scores))


def test_intersect_identity_and_idempotence():
    rng = np.random.default_rng(4)
    scores = rng.random(20)
    x = SelectionResult(scores, scores >= 0.5, "x", 0.5)
    all_true = SelectionResult(np.ones(20), np.ones(20, dtype=bool), "true", 0.0)
    assert np.array_equal(intersect([x, all_true]).mask, x.mask)
    assert np.array_equal(intersect([x, x]).mask, x.mask)
    assert np.array_equal(intersect([x, x]).scores, x.scores)


def test_intersect_truth_table():
    a = SelectionResult(np.array([1.0, 1, 0, 0]), np.array([True, True, False, False]), "a", 0.5)
    b = SelectionResult(np.array([1.0, 0, 1, 0]), np.array([True, False, True, False]), "b", 0.5)
    out = intersect([a, b])
    assert np.array_equal(out.mask, [True, False, False, False])
    assert np.array_equal(out.scores, [1.0, 0.0, 0.0, 0.0])


def test_intersect_length_mismatch():
    a = rows_from_scores([0.1, 0.9])
    b = rows_from_scores([0.1, 0.9, 0.5])
    with pytest.raises(SelectionError):
        intersect([a, b])


def test_quality_perfect_selector():
    noisy = np.array([0, 1, 0, 1])
    truth = np.array([0, 0, 0, 0])
    clean = (noisy == truth).astype(np.float64)
    res = SelectionResult(clean, clean.astype(bool), "perfect", 0.5)
    q = selection_quality(res, noisy, truth)
    assert q.precision == 1.0
    assert q.recall == 1.0
    assert q.roc_auc == 1.0


def test_quality_constant_scores_auc_half():
    noisy = np.array([0, 1, 0, 1])
    truth = np.array([0, 0, 0, 0])
    res = SelectionResult(np.full(4, 0.3), np.zeros(4, dtype=bool), "const", 0.5)
    q = selection_quality(res, noisy, truth)
    assert q.roc_auc == 0.5


def test_quality_four_sample_hand_case():
    # scores [.9,.8,.2,.1], clean [1,0,1,0]: 3 of 4 pairs ordered -> 0.75
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    noisy = np.array([0, 1, 0, 1])
    truth = np.array([0, 0, 0, 0])
    res = SelectionResult(scores, scores >= 0.5, "hand", 0.5)
    q = selection_quality(res, noisy, truth)
    clean = noisy == truth
    assert q.roc_auc == oracles.pairwise_auc(scores, clean) == 0.75


def test_quality_empty_selection_reports_none():
    noisy = np.array([0, 1])
    truth = np.array([0, 0])
    res = SelectionResult(np.zeros(2), np.zeros(2, dtype=bool), "none", 1.0)
    q = selection_quality(res, noisy, truth)
    assert q.precision is None  # distinguished no-selection value, not 0
    assert q.recall == 0.0


def test_quality_per_class_counts_sum():
    rng = np.random.default_rng(5)
    noisy = rng.integers(0, 3, size=40)
    truth = rng.integers(0, 3, size=40)
    scores = rng.random(40)
    res = SelectionResult(scores, scores >= 0.4, "r", 0.4)
    q = selection_quality(res, noisy, truth)
    assert q.per_class_selected_counts.sum() == res.n_selected


def test_rank_auc_matches_pairwise_oracle_exactly():
    rng = np.random.default_rng(6)
    for trial in range(30):
        n = int(rng.integers(5, 60))
        scores = rng.choice([0.1, 0.2, 0.5, 0.7, 0.9], size=n)  # force ties
        pos = rng.random(n) < 0.5
        if pos.all() or not pos.any():
            continue
        assert rank_auc(scores, pos) == oracles.pairwise_auc(scores, pos)


def test_rank_auc_degenerate_groups_none():
    assert rank_auc(np.array([0.1, 0.2]), np.array([True, True])) is None
    assert rank_auc(np.array([0.1, 0.2]), np.array([False, False])) is None


# --- selector algebra properties ---


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), data=st.data())
def test_threshold_monotone_shrinkage(seed, data):
    rng = np.random.default_rng(seed)
    n, k = 30, 4
    probs = rng.dirichlet(np.ones(k), size=n)
    labels = rng.integers(0, k, size=n)
    lo = data.draw(st.floats(0.05, 0.95))
    hi = data.draw(st.floats(lo, 1.0))
    low = consistency_select(probs, labels, threshold=lo)
    high = consistency_select(probs, labels, threshold=hi)
    assert high.mask.sum() <= low.mask.sum()
    assert np.all(low.mask[high.mask])  # higher threshold selects a subset


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_intersect_subset_of_operands(seed):
    rng = np.random.default_rng(seed)
    n = 25
    results = []
    for i in range(int(rng.integers(2, 5))):
        scores = rng.random(n)
        results.append(SelectionResult(scores, scores >= rng.random(), f"s{i}", 0.5))
    combined = intersect(results)
    for r in results:
        assert np.all(r.mask[combined.mask])


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), transform=st.sampled_from(["affine", "cube", "sigmoid", "exp"]))
def test_auc_invariant_under_strictly_monotone_transform(seed, transform):
    rng = np.random.default_rng(seed)
    n = 40
    scores = np.round(rng.random(n), 2)  # rounding forces some ties
    pos = rng.random(n) < 0.5
    if pos.all() or not pos.any():
        return
    fn = {
        "affine": lambda s: 3.0 * s + 1.0,
        "cube": lambda s: s**3,
        "sigmoid": lambda s: 1.0 / (1.0 + np.exp(-5.0 * s)),
        "exp": lambda s: np.exp(s),
    }[transform]
    assert rank_auc(scores, pos) == rank_auc(fn(scores), pos)

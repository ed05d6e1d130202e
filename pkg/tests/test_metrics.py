from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domainid.metrics import ConfusionCounts, baccu, count_confusion
from oracles import naive_confusion


class TestCountConfusion:
    def test_hand_count(self):
        counts = count_confusion([1, 1, 0, 0], [1, 0, 0, 1])
        assert (counts.tp, counts.tn, counts.p, counts.n) == (1, 1, 2, 2)

    def test_perfect_predictions(self):
        truths = [1, 0, 1, 1, 0]
        counts = count_confusion(truths, truths)
        assert counts.tp == counts.p == 3
        assert counts.tn == counts.n == 2

    def test_matches_naive_recount_on_random_pairs(self):
        rng = np.random.default_rng(0)
        preds = rng.integers(0, 2, size=1000)
        truths = rng.integers(0, 2, size=1000)
        counts = count_confusion(preds, truths)
        assert (counts.tp, counts.tn, counts.p, counts.n) == naive_confusion(preds, truths)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            count_confusion([1, 0], [1])

    def test_empty_input(self):
        with pytest.raises(ValueError, match="empty"):
            count_confusion([], [])

    def test_non_binary_values_rejected(self):
        with pytest.raises(ValueError, match="only 0 and 1"):
            count_confusion([2, 0], [1, 0])


class TestBaccu:
    def test_perfect_classifier_scores_one(self):
        assert baccu(ConfusionCounts(tp=5, tn=9, p=5, n=9)) == 1.0

    def test_direct_substitution(self):
        assert baccu(ConfusionCounts(tp=8, tn=6, p=10, n=10)) == pytest.approx(0.7, abs=0)

    def test_all_ood_predictor_scores_half(self):
        assert baccu(ConfusionCounts(tp=0, tn=7, p=4, n=7)) == 0.5

    def test_all_wrong_scores_zero(self):
        assert baccu(ConfusionCounts(tp=0, tn=0, p=3, n=5)) == 0.0

    def test_missing_side_is_an_error(self):
        with pytest.raises(ValueError, match="undefined"):
            baccu(ConfusionCounts(tp=0, tn=2, p=0, n=2))
        with pytest.raises(ValueError, match="undefined"):
            baccu(ConfusionCounts(tp=2, tn=0, p=2, n=0))

    def test_counts_validated(self):
        with pytest.raises(ValueError):
            ConfusionCounts(tp=3, tn=0, p=2, n=1)
        with pytest.raises(ValueError):
            ConfusionCounts(tp=0, tn=-1, p=2, n=1)


counts_strategy = st.integers(min_value=1, max_value=10_000).flatmap(
    lambda p: st.tuples(
        st.integers(0, p),
        st.just(p),
        st.integers(min_value=1, max_value=10_000),
    ).flatmap(
        lambda tpp: st.tuples(
            st.just(tpp[0]), st.just(tpp[1]), st.integers(0, tpp[2]), st.just(tpp[2])
        )
    )
)


@settings(max_examples=200, deadline=None)
@given(counts_strategy)
def test_duplicating_negatives_leaves_score_unchanged(counts):
    tp, p, tn, n = counts
    base = ConfusionCounts(tp=tp, tn=tn, p=p, n=n)
    doubled = ConfusionCounts(tp=tp, tn=2 * tn, p=p, n=2 * n)
    assert baccu(base) == baccu(doubled)


@settings(max_examples=200, deadline=None)
@given(counts_strategy)
def test_swapping_label_convention_preserves_score(counts):
    tp, p, tn, n = counts
    assert baccu(ConfusionCounts(tp=tp, tn=tn, p=p, n=n)) == baccu(
        ConfusionCounts(tp=tn, tn=tp, p=n, n=p)
    )


def test_constant_predictor_scores_exactly_half():
    preds = np.ones(100, dtype=int)
    truths = np.array([1] * 30 + [0] * 70)
    assert baccu(count_confusion(preds, truths)) == 0.5


def test_counts_addition():
    total = ConfusionCounts(1, 2, 3, 4) + ConfusionCounts(2, 1, 4, 3)
    assert total == ConfusionCounts(3, 3, 7, 7)

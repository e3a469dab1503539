"""Order statistics on cup states, against hand-computed values."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cupgame.rational import rat
from cupgame.state import CupState, harmonic_number, harmonic_tail


@st.composite
def cup_states(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    fills = draw(
        st.lists(
            st.fractions(min_value=0, max_value=8, max_denominator=12),
            min_size=n,
            max_size=n,
        )
    )
    return CupState(fills)


class TestRankQueries:
    def test_ranks_with_tie_broken_by_id(self):
        state = CupState.from_mapping(4, {1: rat(1, 2), 2: 2, 3: rat(1, 2), 4: 1})
        assert [state.rank_cup(i) for i in (1, 2, 3, 4)] == [2, 4, 1, 3]
        assert state.rank_fill(1) == 2
        assert state.rank_fill(3) == rat(1, 2)
        assert state.backlog() == 2

    def test_top_cups_matches_rank_order(self):
        state = CupState.from_mapping(5, {2: 3, 4: 3, 5: 1})
        assert state.top_cups(3) == (2, 4, 5)
        assert state.top_cups(0) == ()

    def test_rank_out_of_range(self):
        state = CupState.zeros(3)
        with pytest.raises(ValueError):
            state.rank_fill(0)
        with pytest.raises(ValueError):
            state.rank_fill(4)

    @given(cup_states())
    def test_rank_fills_nonincreasing(self, state):
        fills = [state.rank_fill(i) for i in range(1, state.n + 1)]
        assert all(a >= b for a, b in zip(fills, fills[1:]))
        assert sorted(state.rank_cup(i) for i in range(1, state.n + 1)) == list(
            range(1, state.n + 1)
        )

    @given(cup_states(), st.integers(0, 9))
    def test_top_cups_agrees_with_full_ranking(self, state, k):
        k = min(k, state.n)
        assert state.top_cups(k) == tuple(
            state.rank_cup(i) for i in range(1, k + 1)
        )


class TestPrefixAndSubsetStats:
    def test_prefix_stats_examples(self):
        state = CupState.from_mapping(3, {1: 1, 2: 5, 3: 2})
        assert state.prefix_stats(2) == (7, rat(7, 2))
        state = CupState([4, 3, 2, 1])
        assert state.prefix_stats(4) == (10, rat(5, 2))
        assert state.prefix_stats(1) == (4, 4)

    def test_subset_stats(self):
        state = CupState.from_mapping(3, {1: 1, 2: 5, 3: 2})
        assert state.subset_stats({2, 3}) == (7, rat(7, 2))
        assert state.subset_stats([1]) == (1, 1)
        with pytest.raises(ValueError):
            state.subset_stats(set())
        with pytest.raises(ValueError):
            state.subset_stats({0, 1})

    @given(cup_states())
    def test_prefix_sum_consistency(self, state):
        total, average = state.prefix_stats(state.n)
        assert total == state.total()
        assert average * state.n == total
        for i in range(1, state.n):
            assert state.prefix_stats(i + 1)[0] - state.prefix_stats(i)[0] == (
                state.rank_fill(i + 1)
            )


class TestSkewedAverage:
    def test_examples(self):
        state = CupState([4, 3, 2, 1])
        assert state.skewed_average(2, 3, 2) == 2
        assert state.skewed_average(2, 6, 2) == 0
        assert state.skewed_average(1, 0, 3) == 10

    def test_range_errors(self):
        state = CupState([4, 3, 2, 1])
        with pytest.raises(ValueError):
            state.skewed_average(3, 3, 2)
        with pytest.raises(ValueError):
            state.skewed_average(0, 3, 2)
        with pytest.raises(ValueError):
            state.skewed_average(1, -1, 2)
        with pytest.raises(ValueError):
            state.skewed_average(1, 3, 0)

    @given(cup_states(), st.integers(0, 8), st.integers(0, 8))
    def test_nonincreasing_in_truncation(self, state, n_small, n_large):
        lo, hi = sorted((n_small, n_large))
        p = 1
        if state.n <= p:
            return
        for k in range(1, state.n - p + 1):
            assert state.skewed_average(k, hi, p) <= state.skewed_average(k, lo, p)

    @given(cup_states())
    def test_zero_truncation_is_plain_average(self, state):
        p = 1
        if state.n <= p:
            return
        for k in range(1, state.n - p + 1):
            total, _ = state.prefix_stats(p + k)
            assert state.skewed_average(k, 0, p) == total / k


class TestHarmonics:
    def test_harmonic_tail_examples(self):
        assert harmonic_tail(1, 3) == rat(11, 6)
        assert harmonic_tail(2, 4) == rat(19, 12)
        assert harmonic_tail(5, 5) == 1
        with pytest.raises(ValueError):
            harmonic_tail(0, 5)
        with pytest.raises(ValueError):
            harmonic_tail(6, 5)

    def test_harmonic_number(self):
        assert harmonic_number(0) == 0
        assert harmonic_number(1) == 1
        assert harmonic_number(4) == rat(25, 12)
        # the lower-bound target for n=8, p=1 play
        assert harmonic_number(8) - 1 == rat(481, 280)

    def test_tail_and_number_consistent(self):
        for n in range(1, 12):
            for k in range(1, n + 1):
                assert harmonic_tail(k, n) == 1 + harmonic_number(n) - harmonic_number(k)


class TestStateBasics:
    def test_negative_fill_rejected(self):
        with pytest.raises(ValueError):
            CupState([1, rat(-1, 2)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            CupState([])

    def test_equality_and_hash(self):
        a = CupState([1, rat(1, 2)])
        b = CupState([rat(2, 2), rat(2, 4)])
        assert a == b
        assert hash(a) == hash(b)

    def test_from_mapping_validates_ids(self):
        with pytest.raises(ValueError):
            CupState.from_mapping(2, {3: 1})

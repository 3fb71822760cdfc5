"""Board state: claims, counters, trouble flags, fingerprints."""

import pytest
from hypothesis import given, settings, strategies as st

from hamgame.board import (
    BREAKER,
    MAKER,
    Board,
    BoardError,
    GameConfig,
    bits,
    default_bias,
    default_hub_size,
    kth_set_bit,
)


def small_cfg(n=12, b=2, thr=4.0, **kw):
    kw.setdefault("quota", 2)
    kw.setdefault("hub_size", 4)
    kw.setdefault("max_turns", 4 * n)
    return GameConfig(n=n, b=b, trouble_threshold=thr, **kw)


class TestConfig:
    def test_validation_rejects_bad_fields(self):
        with pytest.raises(BoardError):
            GameConfig(n=2, b=1, trouble_threshold=1.0)
        with pytest.raises(BoardError):
            small_cfg(b=0)
        with pytest.raises(BoardError):
            small_cfg(b=11)          # n-2 = 10 is the cap
        with pytest.raises(BoardError):
            small_cfg(thr=0.0)
        with pytest.raises(BoardError):
            small_cfg(thr=12.0)      # must stay below n
        with pytest.raises(BoardError):
            small_cfg(hub_size=12)
        with pytest.raises(BoardError):
            GameConfig(n=12, b=2, trouble_threshold=4.0, max_turns=11)

    def test_scaled_clamps_threshold_below_n(self):
        # 2n/sqrt(ln n) > n-1 at small n; the clamp keeps configs legal.
        cfg = GameConfig.scaled(20, seed=0)
        assert cfg.trouble_threshold == 19.0
        cfg = GameConfig.scaled(4000, seed=0)
        assert cfg.trouble_threshold < 3999

    def test_scaled_bias_rule(self):
        import math

        for n in (500, 1000, 2000, 4000):
            assert GameConfig.scaled(n).b == int(0.25 * n / math.log(n))
        assert default_bias(10) >= 1

    def test_hub_sizing_supports_internal_wiring(self):
        # Each hub needs quota out-edges aimed at other hubs.
        for n in (40, 100, 1000):
            for quota in (2, 4):
                h = default_hub_size(n, 0.15, quota)
                assert h * quota <= h * (h - 1) // 2
                assert h < n

    def test_hub_vertices_sit_at_top(self):
        cfg = small_cfg()
        assert list(cfg.hub_vertices()) == [8, 9, 10, 11]


class TestClaims:
    def test_claim_and_ownership_symmetry(self):
        board = Board(small_cfg())
        board.claim_edge(3, 7, MAKER)
        assert board.owner(3, 7) == MAKER
        assert board.owner(7, 3) == MAKER
        board.claim_edge(7, 5, BREAKER)
        assert board.owner(5, 7) == BREAKER

    def test_double_claim_rejected(self):
        board = Board(small_cfg())
        board.claim_edge(0, 1, MAKER)
        with pytest.raises(BoardError):
            board.claim_edge(0, 1, BREAKER)
        with pytest.raises(BoardError):
            board.claim_edge(1, 0, MAKER)

    def test_self_loop_rejected(self):
        board = Board(small_cfg())
        with pytest.raises(BoardError):
            board.claim_edge(4, 4, MAKER)

    def test_directed_bookkeeping_is_tail_only(self):
        board = Board(small_cfg())
        board.claim_edge(2, 9, MAKER)
        assert board.out_deg[2] == 1
        assert board.out_deg[9] == 0
        assert board.out_heads[2] == [9]
        assert board.maker_deg[2] == board.maker_deg[9] == 1

    def test_served_splits_on_trouble_flag(self):
        board = Board(small_cfg(thr=1.5))
        board.claim_edge(0, 1, MAKER)            # calm tail
        assert (board.out_calm[0], board.served[0]) == (1, 0)
        for w in (2, 3):
            board.claim_edge(0, w, BREAKER)
        board.turn = 5
        assert board.refresh_troublesome() == [0]
        assert board.trouble_onset[0] == 5
        board.claim_edge(0, 4, MAKER)            # troublesome tail
        assert (board.out_calm[0], board.served[0]) == (1, 1)
        assert board.out_deg[0] == 2

    def test_deg_le1_mask_tracks_maker_degree(self):
        board = Board(small_cfg())
        assert board.deg_le1_mask == board.full_mask
        board.claim_edge(0, 1, MAKER)
        assert board.deg_le1_mask == board.full_mask
        board.claim_edge(1, 2, MAKER)
        assert not (board.deg_le1_mask >> 1) & 1
        assert (board.deg_le1_mask >> 0) & 1


class TestTrouble:
    def test_threshold_is_strict(self):
        board = Board(small_cfg(thr=2.0))
        board.claim_edge(0, 1, BREAKER)
        board.claim_edge(0, 2, BREAKER)
        assert board.refresh_troublesome() == []   # exactly 2 is not > 2
        board.claim_edge(0, 3, BREAKER)
        assert board.refresh_troublesome() == [0]

    def test_flags_are_monotone_and_fresh_only_once(self):
        board = Board(small_cfg(thr=1.0))
        for w in (1, 2):
            board.claim_edge(0, w, BREAKER)
        assert board.refresh_troublesome() == [0]
        board.claim_edge(0, 3, BREAKER)
        assert board.refresh_troublesome() == []
        assert board.troublesome[0] == 1

    def test_fresh_sorted_and_untouched_skipped(self):
        board = Board(small_cfg(thr=1.0))
        for v in (5, 3, 9):
            board.claim_edge(v, (v + 1) % 12, BREAKER)
            board.claim_edge(v, (v + 2) % 12, BREAKER)
        fresh = board.refresh_troublesome()
        assert fresh == sorted(fresh)
        assert 3 in fresh and 5 in fresh and 9 in fresh

    def test_danger_formula(self):
        board = Board(small_cfg(b=2, thr=1.0))
        for w in (1, 2, 3):
            board.claim_edge(0, w, BREAKER)
        board.refresh_troublesome()
        board.claim_edge(0, 4, MAKER)
        assert board.danger(0) == 3 - 2 * 1


class TestCounters:
    def test_recompute_matches_incremental(self):
        import random

        rng = random.Random(7)
        board = Board(small_cfg(thr=3.0))
        vertices = list(range(12))
        for _ in range(40):
            u, v = rng.sample(vertices, 2)
            if board.owner(u, v):
                continue
            board.claim_edge(u, v, rng.choice((MAKER, BREAKER)))
            board.refresh_troublesome()
        re = board.recompute_counters()
        assert re["breaker_deg"] == board.breaker_deg
        assert re["maker_deg"] == board.maker_deg
        assert re["out_deg"] == board.out_deg

    def test_unclaimed_pairs_accounting(self):
        board = Board(small_cfg())
        total = 12 * 11 // 2
        assert board.unclaimed_pairs() == total
        board.claim_edge(0, 1, MAKER)
        board.claim_edge(2, 3, BREAKER)
        assert board.unclaimed_pairs() == total - 2

    def test_fingerprint_changes_with_state(self):
        a, b = Board(small_cfg()), Board(small_cfg())
        assert a.fingerprint_fields() == b.fingerprint_fields()
        a.claim_edge(0, 1, MAKER)
        assert a.fingerprint_fields() != b.fingerprint_fields()
        b.claim_edge(0, 1, MAKER)
        assert a.fingerprint_fields() == b.fingerprint_fields()
        # Direction matters to the fingerprint even on the same pair.
        a.claim_edge(4, 5, MAKER)
        b.claim_edge(5, 4, MAKER)
        assert a.fingerprint_fields() != b.fingerprint_fields()


class TestBitHelpers:
    def test_bits_ascending(self):
        assert list(bits(0)) == []
        assert list(bits(0b101001)) == [0, 3, 5]

    @given(st.integers(min_value=1, max_value=(1 << 200) - 1))
    def test_kth_set_bit_agrees_with_enumeration(self, mask):
        positions = list(bits(mask))
        for k, want in enumerate(positions):
            assert kth_set_bit(mask, k) == want


@settings(max_examples=60, deadline=None)
@given(st.lists(
    st.tuples(st.integers(0, 13), st.integers(0, 13), st.booleans()),
    max_size=60))
def test_random_claim_sequences_keep_counters_exact(moves):
    board = Board(GameConfig(n=14, b=3, trouble_threshold=3.0,
                             quota=2, hub_size=4, max_turns=56))
    for turn, (u, v, maker) in enumerate(moves, 1):
        if u == v or board.owner(u, v):
            continue
        board.turn = turn
        board.claim_edge(u, v, MAKER if maker else BREAKER)
        board.refresh_troublesome()
    re = board.recompute_counters()
    assert re["breaker_deg"] == board.breaker_deg
    assert re["maker_deg"] == board.maker_deg
    assert re["out_deg"] == board.out_deg
    for v in range(14):
        assert board.out_calm[v] + board.served[v] == board.out_deg[v]
        if board.troublesome[v]:
            assert board.breaker_deg[v] > 3.0

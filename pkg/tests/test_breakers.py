"""Breaker policies: decode math, targeting rules, scripted replay."""

from itertools import combinations
from random import Random
from types import SimpleNamespace

import pytest

from hamgame.board import BREAKER, MAKER, UNCLAIMED, Board, GameConfig
from hamgame.breakers import (
    IsolatorBreaker,
    MaxDangerBreaker,
    PairKillerBreaker,
    RandomBreaker,
    ReplayError,
    ScriptedBreaker,
    make_policy,
    pair_from_index,
)
from hamgame.rotation import TrackedPath


def fresh_board(n=10, b=3, thr=5.0, quota=2, hub_size=3):
    cfg = GameConfig(n=n, b=b, trouble_threshold=thr, quota=quota,
                     hub_size=hub_size, max_turns=8 * n)
    return Board(cfg)


class TestPairIndex:
    @pytest.mark.parametrize("n", [3, 4, 5, 8, 13])
    def test_decodes_every_index_in_lex_order(self, n):
        want = list(combinations(range(n), 2))
        got = [pair_from_index(n, t) for t in range(n * (n - 1) // 2)]
        assert got == want


class TestRandomBreaker:
    def test_claims_k_distinct_unclaimed_pairs(self):
        board = fresh_board()
        out = RandomBreaker().take_turn(board, Random(1), 5)
        assert len(out) == 5
        assert len(set(out)) == 5
        assert board.breaker_edges == 5
        for u, v in out:
            assert board.owner(u, v) == BREAKER

    def test_same_stream_same_edges(self):
        a = RandomBreaker().take_turn(fresh_board(), Random(7), 4)
        b = RandomBreaker().take_turn(fresh_board(), Random(7), 4)
        assert a == b

    def test_nearly_full_board_still_fills_the_turn(self):
        board = fresh_board(n=4, b=1, thr=2.0, hub_size=2)
        pairs = list(combinations(range(4), 2))
        for u, v in pairs[:-1]:
            board.claim_edge(u, v, MAKER)
        out = RandomBreaker().take_turn(board, Random(3), 1)
        assert out == [pairs[-1]]


class TestIsolator:
    def test_buys_out_one_star_then_moves_on(self):
        board = fresh_board()
        pol = IsolatorBreaker()
        rng = Random(0)
        assert pol.take_turn(board, rng, 3) == [(0, 1), (0, 2), (0, 3)]
        pol.take_turn(board, rng, 3)
        pol.take_turn(board, rng, 3)
        # ceil((n-1)/b) = 3 turns kill the star at vertex 0
        assert board.breaker_deg[0] == 9
        nxt = pol.take_turn(board, rng, 3)
        assert nxt[0][0] == 1

    def test_maker_touch_forces_retarget(self):
        board = fresh_board()
        pol = IsolatorBreaker()
        rng = Random(0)
        pol.take_turn(board, rng, 3)
        board.claim_edge(5, 0, MAKER)   # Maker reaches the target
        nxt = pol.take_turn(board, rng, 3)
        # Untouched vertices still have all 9 edges free; 4 is the least.
        assert nxt[0][0] == 4
        assert all(u == 4 for u, v in nxt)


class TestMaxDanger:
    def test_warmup_piles_on_one_vertex(self):
        board = fresh_board()
        pol = MaxDangerBreaker()
        out = pol.take_turn(board, Random(2), 3)
        assert out == [(0, 1), (0, 2), (0, 3)]
        again = pol.take_turn(board, Random(2), 3)
        assert all(u == 0 for u, v in again)  # highest degree stays 0

    def test_troubled_vertex_with_max_danger_wins(self):
        board = fresh_board()
        board.claim_edge(7, 0, BREAKER)
        board.claim_edge(7, 1, BREAKER)
        board.claim_edge(3, 0, BREAKER)
        pol = MaxDangerBreaker()
        pol.note_trouble([3, 7])
        out = pol.take_turn(board, Random(2), 2)
        assert out[0][0] == 7

    def test_danger_tie_prefers_lower_index(self):
        board = fresh_board()
        board.claim_edge(3, 0, BREAKER)
        board.claim_edge(7, 0, BREAKER)
        pol = MaxDangerBreaker()
        pol.note_trouble([7, 3])
        out = pol.take_turn(board, Random(2), 1)
        assert out[0][0] == 3

    def test_served_out_vertices_drop_from_the_trouble_list(self):
        board = fresh_board(quota=1)
        board.claim_edge(4, 0, BREAKER)
        board.served[4] = 1
        pol = MaxDangerBreaker()
        pol.note_trouble([4])
        pol.take_turn(board, Random(2), 1)
        assert pol.trouble == []

    def test_full_turn_claimed_even_when_nothing_qualifies(self):
        board = fresh_board(quota=1)
        for v in range(board.n):
            board.served[v] = 1  # warmup heap prunes everything
        out = MaxDangerBreaker().take_turn(board, Random(2), 3)
        assert len(out) == 3
        assert board.breaker_edges == 3


class TestPairKiller:
    def phase2_maker(self, board):
        for e in [(0, 1), (1, 2)]:
            board.claim_edge(*e, MAKER)
        tracked = TrackedPath(order=[0, 1, 2], mask=0b111)
        return SimpleNamespace(phase=2, tracked=tracked,
                               _pivot_mask=lambda: 0b111)

    def test_phase1_is_pure_random(self):
        board = fresh_board()
        out = PairKillerBreaker().take_turn(
            board, Random(5), 3, SimpleNamespace(phase=1, tracked=None))
        assert len(out) == 3

    def test_burns_the_closing_pair_first(self):
        board = fresh_board()
        maker = self.phase2_maker(board)
        pol = PairKillerBreaker()
        out = pol.take_turn(board, Random(5), 2, maker)
        assert out[0] == (0, 2)
        assert board.owner(0, 2) == BREAKER
        assert len(out) == 2
        assert pol._stamp == (board.turn, board.maker_edges)

    def test_closed_cycle_leaves_nothing_to_burn(self):
        board = fresh_board()
        maker = self.phase2_maker(board)
        maker.tracked.cycle_closed = True
        pol = PairKillerBreaker()
        pol.take_turn(board, Random(5), 2, maker)
        assert pol._pairs == []


class TestScripted:
    def test_replays_turn_lists_in_order(self):
        board = fresh_board()
        pol = ScriptedBreaker([[(0, 1)], [(2, 3), (2, 4)]])
        assert pol.take_turn(board, Random(0), 1) == [(0, 1)]
        assert pol.take_turn(board, Random(0), 2) == [(2, 3), (2, 4)]
        assert board.owner(2, 4) == BREAKER

    def test_exhausted_script_raises(self):
        board = fresh_board()
        pol = ScriptedBreaker([[(0, 1)]])
        pol.take_turn(board, Random(0), 1)
        board.turn = 2
        with pytest.raises(ReplayError, match="turn 2: script exhausted"):
            pol.take_turn(board, Random(0), 1)

    def test_conflicting_claim_raises(self):
        board = fresh_board()
        board.claim_edge(0, 1, MAKER)
        board.turn = 1
        pol = ScriptedBreaker([[(0, 1)]])
        with pytest.raises(ReplayError, match=r"\(0, 1\) already claimed"):
            pol.take_turn(board, Random(0), 1)

    def test_from_file_keeps_original_policy_name(self, tmp_path):
        log = tmp_path / "game.log"
        log.write_text(
            '{"meta": {"n": 10, "breaker": "maxdanger"}}\n'
            '{"turn": 1, "player": "B", "edges": [[0, 1], [0, 2]], '
            '"case": null, "promoted": []}\n'
            '{"turn": 1, "player": "M", "edges": [[5, 6]], '
            '"case": "P1.C2", "promoted": [6]}\n'
            '{"turn": 2, "player": "B", "edges": [], '
            '"case": null, "promoted": []}\n',
            encoding="utf-8")
        pol = ScriptedBreaker.from_file(str(log))
        assert pol.name == "maxdanger"
        assert pol.turns == [[(0, 1), (0, 2)], []]

    def test_bare_constructor_keeps_default_name(self):
        assert ScriptedBreaker([]).name == "scripted"


class TestFactory:
    def test_known_names(self):
        assert isinstance(make_policy("random"), RandomBreaker)
        assert isinstance(make_policy("isolator"), IsolatorBreaker)

    def test_scripted_needs_a_file(self):
        with pytest.raises(ValueError):
            make_policy("scripted")

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="bogus"):
            make_policy("bogus")

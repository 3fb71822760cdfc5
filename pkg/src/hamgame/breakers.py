"""Breaker adversaries.

Every policy claims up to k edges directly on the board and returns the
list it claimed, in claim order.  k is min(bias, pairs remaining); the
runner enforces that and logs the result.  Policies are stateful per
game and deterministic given the rng stream they are handed.
"""

from __future__ import annotations

import heapq
import json
from random import Random

from .board import BREAKER, Board, bits
from .rotation import endpoint_pairs_scan


class ReplayError(RuntimeError):
    """A scripted claim conflicts with the live board."""

    def __init__(self, turn: int, message: str) -> None:
        super().__init__(f"turn {turn}: {message}")
        self.turn = turn


def pair_from_index(n: int, t: int) -> tuple[int, int]:
    """Decode t in [0, C(n,2)) to the t-th pair (u, v), u < v, in
    lexicographic order."""
    # cum(u) = number of pairs whose first element is < u
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * (2 * n - mid - 1) // 2 <= t:
            lo = mid
        else:
            hi = mid - 1
    u = lo
    return u, u + 1 + (t - u * (2 * n - u - 1) // 2)


class BreakerPolicy:
    name = "base"

    def note_trouble(self, fresh: list[int]) -> None:
        """Hook: vertices newly flagged troublesome since the last turn."""

    def take_turn(self, board: Board, rng: Random, k: int,
                  maker=None) -> list[tuple[int, int]]:
        raise NotImplementedError


class RandomBreaker(BreakerPolicy):
    """Uniform unclaimed pairs, without replacement within the turn."""

    name = "random"

    def take_turn(self, board: Board, rng: Random, k: int,
                  maker=None) -> list[tuple[int, int]]:
        n = board.n
        total = n * (n - 1) // 2
        out: list[tuple[int, int]] = []
        misses = 0
        while len(out) < k:
            u, v = pair_from_index(n, rng.randrange(total))
            if board.owner(u, v) == 0:
                board.claim_edge(u, v, BREAKER)
                out.append((u, v))
                misses = 0
            else:
                misses += 1
                if misses > 64:
                    # Board nearly full: enumerate what is left instead of
                    # grinding the rejection loop.
                    rest = [
                        (a, c) for a in range(n) for c in bits(
                            ~(board.maker_adj[a] | board.breaker_adj[a])
                            & board.full_mask & ~((1 << (a + 1)) - 1))
                    ]
                    for a, c in rng.sample(rest, k - len(out)):
                        board.claim_edge(a, c, BREAKER)
                        out.append((a, c))
                    break
        return out


class IsolatorBreaker(BreakerPolicy):
    """Buys out all edges at one vertex, then moves to the next.

    Target choice: minimize Maker degree, then maximize the number of
    unclaimed incident edges, then lowest index.  A target is dead once
    Maker touches it or its star is exhausted.
    """

    name = "isolator"

    def __init__(self) -> None:
        self.target: int | None = None

    def _dead(self, board: Board, v: int) -> bool:
        if board.maker_deg[v] > 0:
            return True
        return board.breaker_deg[v] + board.maker_deg[v] >= board.n - 1

    def _retarget(self, board: Board) -> int | None:
        best = None
        best_key = None
        for v in range(board.n):
            free = board.n - 1 - board.breaker_deg[v] - board.maker_deg[v]
            if free == 0:
                continue
            key = (board.maker_deg[v], -free, v)
            if best_key is None or key < best_key:
                best, best_key = v, key
        return best

    def take_turn(self, board: Board, rng: Random, k: int,
                  maker=None) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        while len(out) < k:
            if self.target is None or self._dead(board, self.target):
                self.target = self._retarget(board)
                if self.target is None:
                    break
            t = self.target
            free = (~(board.maker_adj[t] | board.breaker_adj[t])
                    & board.full_mask & ~(1 << t))
            if not free:
                self.target = None
                continue
            for w in bits(free):
                board.claim_edge(t, w, BREAKER)
                out.append((t, w))
                if len(out) == k:
                    break
        return out


class MaxDangerBreaker(BreakerPolicy):
    """Pile onto the vertex Maker most urgently needs to serve.

    While no vertex is troublesome the policy warms up on the highest
    Breaker degree (that is what danger reduces to); once troublesome
    vertices exist it plays on those still under quota.  Falls back to
    random when nothing qualifies.
    """

    name = "maxdanger"

    def __init__(self) -> None:
        self.trouble: list[int] = []
        self.heap: list[tuple[int, int]] = []   # (-breaker_deg, v) warmup
        self.fallback = RandomBreaker()

    def note_trouble(self, fresh: list[int]) -> None:
        self.trouble.extend(fresh)

    def _pick(self, board: Board) -> int | None:
        quota = board.cfg.quota
        if self.trouble:
            best = None
            best_d = 0
            keep = []
            for v in self.trouble:
                if board.served[v] >= quota:
                    continue
                if board.breaker_deg[v] + board.maker_deg[v] >= board.n - 1:
                    continue
                keep.append(v)
                d = board.danger(v)
                if best is None or d > best_d or (d == best_d and v < best):
                    best, best_d = v, d
            self.trouble = keep
            if best is not None:
                return best
        # Warmup: danger == breaker_deg while served == 0 everywhere.
        h = self.heap
        while h:
            negd, v = h[0]
            if board.served[v]:          # no longer a pure-degree case
                heapq.heappop(h)
                continue
            if -negd != board.breaker_deg[v]:
                heapq.heappop(h)
                heapq.heappush(h, (-board.breaker_deg[v], v))
                continue
            if board.breaker_deg[v] + board.maker_deg[v] >= board.n - 1:
                heapq.heappop(h)
                continue
            return v
        return None

    def take_turn(self, board: Board, rng: Random, k: int,
                  maker=None) -> list[tuple[int, int]]:
        if not self.heap:
            self.heap = [(0, v) for v in range(board.n)]
        out: list[tuple[int, int]] = []
        while len(out) < k:
            v = self._pick(board)
            if v is None:
                out.extend(self.fallback.take_turn(board, rng, k - len(out)))
                break
            free = (~(board.maker_adj[v] | board.breaker_adj[v])
                    & board.full_mask & ~(1 << v))
            while free and len(out) < k:
                w = (free & -free).bit_length() - 1
                board.claim_edge(v, w, BREAKER)
                out.append((v, w))
                free &= free - 1
            heapq.heappush(self.heap, (-board.breaker_deg[v], v))
        return out


class PairKillerBreaker(BreakerPolicy):
    """Burns the endpoint pairs Maker's rotation engine would use to
    close her tracked path, random elsewhere.

    Pair recomputation is capped at once per turn and budgeted; before
    Phase 2 there is nothing to kill and the policy is pure random.
    """

    name = "pairkiller"

    def __init__(self, budget: int = 256) -> None:
        self.budget = budget
        self.fallback = RandomBreaker()
        self._stamp: tuple[int, int] | None = None
        self._pairs: list[tuple[int, int]] = []

    def _refresh(self, board: Board, maker) -> None:
        stamp = (board.turn, board.maker_edges)
        if stamp == self._stamp:
            return
        self._stamp = stamp
        tracked = maker.tracked
        if tracked.cycle_closed or len(tracked) < 3:
            self._pairs = []
            return
        pairs, _ = endpoint_pairs_scan(
            board.maker_adj, maker._pivot_mask(), tracked.order,
            max_states=self.budget, total_states=4 * self.budget)
        self._pairs = sorted(pairs)

    def take_turn(self, board: Board, rng: Random, k: int,
                  maker=None) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        if maker is not None and maker.phase == 2 and maker.tracked is not None:
            self._refresh(board, maker)
            for u, v in self._pairs:
                if len(out) == k:
                    break
                if board.owner(u, v) == 0:
                    board.claim_edge(u, v, BREAKER)
                    out.append((u, v))
        if len(out) < k:
            out.extend(self.fallback.take_turn(board, rng, k - len(out)))
        return out


class ScriptedBreaker(BreakerPolicy):
    """Replays a fixed per-turn edge list; any conflict is a replay error."""

    name = "scripted"

    def __init__(self, turns: list[list[tuple[int, int]]],
                 name: str | None = None) -> None:
        self.turns = turns
        self.cursor = 0
        if name is not None:
            # Replays keep the original policy name so the rerun log is
            # byte-identical to the one it replays.
            self.name = name

    @classmethod
    def from_file(cls, path: str) -> "ScriptedBreaker":
        """Accepts a move-log file and extracts the Breaker records."""
        turns: list[list[tuple[int, int]]] = []
        name = None
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if "meta" in rec:
                    name = rec["meta"].get("breaker", name)
                elif rec.get("player") == "B":
                    turns.append([(u, v) for u, v in rec["edges"]])
        return cls(turns, name=name)

    def take_turn(self, board: Board, rng: Random, k: int,
                  maker=None) -> list[tuple[int, int]]:
        if self.cursor >= len(self.turns):
            raise ReplayError(board.turn, "script exhausted")
        moves = self.turns[self.cursor]
        self.cursor += 1
        out: list[tuple[int, int]] = []
        for u, v in moves:
            if board.owner(u, v) != 0:
                raise ReplayError(
                    board.turn, f"scripted edge ({u}, {v}) already claimed")
            board.claim_edge(u, v, BREAKER)
            out.append((u, v))
        return out


POLICIES: dict[str, type] = {
    "random": RandomBreaker,
    "isolator": IsolatorBreaker,
    "maxdanger": MaxDangerBreaker,
    "pairkiller": PairKillerBreaker,
}


def make_policy(name: str, script_path: str | None = None) -> BreakerPolicy:
    if name == "scripted":
        if script_path is None:
            raise ValueError("scripted breaker needs a script file")
        return ScriptedBreaker.from_file(script_path)
    try:
        return POLICIES[name]()
    except KeyError:
        raise ValueError(f"unknown breaker policy {name!r}") from None

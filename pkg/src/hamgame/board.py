"""Board state for the biased Maker-Breaker edge game on a complete graph.

Breaker claims up to `b` edges per turn and moves first; Maker claims
exactly one directed edge per turn (direction is bookkeeping; ownership
is undirected).  The board tracks per-vertex degree counters, the
trouble flags Maker's strategy keys on, and enough adjacency structure
(byte matrix + bitmask rows) for the strategy and audit layers to run
fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

UNCLAIMED = 0
MAKER = 1
BREAKER = 2

PLAYER_NAMES = {MAKER: "M", BREAKER: "B"}


class AuditLevel(str, Enum):
    OFF = "off"
    CHEAP = "cheap"
    FULL = "full"


class BoardError(ValueError):
    """Raised on an illegal claim or malformed configuration."""


def scale_root(n: int) -> float:
    """The n/sqrt(ln n) yardstick all desk-scale constants are measured in."""
    return n / math.sqrt(math.log(n))


def default_bias(n: int, beta: float = 0.25) -> int:
    """Breaker bias floor(beta * n / ln n), at least 1."""
    return max(1, int(beta * n / math.log(n)))


def default_hub_size(n: int, coeff: float = 0.15, quota: int = 4) -> int:
    # Floor: hubs top up among themselves, so the hub set must carry
    # hub_size*quota directed edges inside C(hub_size, 2) pairs with
    # room for Breaker interference.  3*quota gives capacity ~1.4x need.
    size = math.ceil(coeff * scale_root(n))
    return min(max(3 * quota, min(size, n // 3)), n - 2)


def default_trouble_threshold(n: int, coeff: float = 1.0) -> float:
    return coeff * 2.0 * scale_root(n)


@dataclass(frozen=True)
class GameConfig:
    """Resolved numeric parameters of one game.

    Attributes:
        n: number of vertices (complete graph).
        b: edges Breaker claims per turn.
        trouble_threshold: strict lower bound on Breaker degree beyond
            which a vertex is flagged troublesome.
        quota: per-vertex out-degree target / service cap.
        hub_size: size of the fixed hub set Maker wires into.
        max_turns: hard stop; exceeding it is a Timeout outcome.
        seed: master seed for this game's RNG streams.
        audit_level: how much online checking the runner performs.
        limited_only: restrict rotation pivots to settled vertices.
        closure_budget: max path states per rotation search (0 = exact,
            unbounded).  Caps worst-case turn cost; truncated searches
            are flagged in the log, never silently wrong.
        audit_samples: random subsets drawn per expansion audit.
    """

    n: int
    b: int
    trouble_threshold: float
    quota: int = 4
    hub_size: int = 8
    max_turns: int = 0
    seed: int = 0
    audit_level: AuditLevel = AuditLevel.CHEAP
    limited_only: bool = True
    closure_budget: int = 0
    audit_samples: int = 10_000

    def __post_init__(self) -> None:
        if self.n < 3:
            raise BoardError(f"n must be >= 3, got {self.n}")
        if not (1 <= self.b <= self.n - 2):
            raise BoardError(f"b must be in [1, n-2], got {self.b}")
        if not (0 < self.trouble_threshold < self.n):
            raise BoardError(
                f"trouble_threshold must be in (0, n), got {self.trouble_threshold}"
            )
        if self.quota < 1:
            raise BoardError(f"quota must be >= 1, got {self.quota}")
        if not (0 < self.hub_size < self.n):
            raise BoardError(f"hub_size must be in (0, n), got {self.hub_size}")
        if self.max_turns < self.n:
            raise BoardError(f"max_turns must be >= n, got {self.max_turns}")
        if self.closure_budget < 0:
            raise BoardError(
                f"closure_budget must be >= 0, got {self.closure_budget}")
        if self.audit_samples < 0:
            raise BoardError(
                f"audit_samples must be >= 0, got {self.audit_samples}")

    @classmethod
    def scaled(
        cls,
        n: int,
        *,
        b: int | None = None,
        beta: float = 0.25,
        tau_coeff: float = 1.0,
        s0_coeff: float = 0.15,
        quota: int = 4,
        max_turns: int | None = None,
        seed: int = 0,
        audit_level: AuditLevel | str = AuditLevel.CHEAP,
        limited_only: bool = True,
        closure_budget: int | None = None,
        audit_samples: int = 10_000,
    ) -> "GameConfig":
        """Build a config from the desk-scale shape coefficients.

        The threshold shape 2n/sqrt(ln n) exceeds n-1 for small n; it is
        clamped to n-1, which means the same thing (Breaker degree can
        never exceed n-1, so no vertex ever turns troublesome there).
        """
        if b is None:
            b = default_bias(n, beta)
        tau = min(default_trouble_threshold(n, tau_coeff), float(n - 1))
        return cls(
            n=n,
            b=b,
            trouble_threshold=tau,
            quota=quota,
            hub_size=default_hub_size(n, s0_coeff, quota),
            max_turns=8 * n if max_turns is None else max_turns,
            seed=seed,
            audit_level=AuditLevel(audit_level),
            limited_only=limited_only,
            closure_budget=4096 if closure_budget is None else closure_budget,
            audit_samples=audit_samples,
        )

    def hub_vertices(self) -> range:
        # Hubs sit at the top of the index range: greedy Breaker policies
        # break ties toward low indices, so their early blast radius
        # misses the hubs.
        return range(self.n - self.hub_size, self.n)


class Board:
    """Mutable game state: ownership, degrees, trouble flags.

    Ownership lives twice: a flat n*n byte matrix for O(1) membership and
    per-vertex bitmask rows (`maker_adj`, `breaker_adj`) for set algebra.
    `deg_le1_mask` keeps the vertices whose Maker degree is still <= 1
    (the joinable-endpoint filter).
    """

    __slots__ = (
        "cfg", "n", "own", "maker_adj", "breaker_adj", "out_heads",
        "breaker_deg", "maker_deg", "out_deg", "out_calm", "served",
        "troublesome", "trouble_onset", "turn", "mover",
        "maker_edges", "breaker_edges", "deg_le1_mask", "_touched",
        "full_mask",
    )

    def __init__(self, cfg: GameConfig) -> None:
        n = cfg.n
        self.cfg = cfg
        self.n = n
        self.own = bytearray(n * n)
        self.maker_adj = [0] * n
        self.breaker_adj = [0] * n
        self.out_heads: list[list[int]] = [[] for _ in range(n)]
        self.breaker_deg = [0] * n
        self.maker_deg = [0] * n
        self.out_deg = [0] * n
        self.out_calm = [0] * n
        self.served = [0] * n
        self.troublesome = bytearray(n)
        self.trouble_onset = [-1] * n
        self.turn = 0
        self.mover = BREAKER
        self.maker_edges = 0
        self.breaker_edges = 0
        self.full_mask = (1 << n) - 1
        self.deg_le1_mask = self.full_mask
        self._touched: set[int] = set()

    # -- claims ---------------------------------------------------------

    def owner(self, u: int, v: int) -> int:
        return self.own[u * self.n + v]

    def claim_edge(self, tail: int, head: int, player: int) -> None:
        """Claim the edge {tail, head} for `player`.

        For Maker the order (tail, head) is recorded as a directed edge
        and the tail's out-degree counters move; `served` bumps when the
        tail is troublesome at claim time, `out_calm` otherwise.
        """
        n = self.n
        if tail == head or not (0 <= tail < n and 0 <= head < n):
            raise BoardError(f"bad edge ({tail}, {head})")
        idx = tail * n + head
        if self.own[idx] != UNCLAIMED:
            raise BoardError(
                f"edge ({tail}, {head}) already owned by {self.own[idx]}"
            )
        self.own[idx] = player
        self.own[head * n + tail] = player
        tb, hb = 1 << tail, 1 << head
        if player == BREAKER:
            self.breaker_adj[tail] |= hb
            self.breaker_adj[head] |= tb
            self.breaker_deg[tail] += 1
            self.breaker_deg[head] += 1
            self.breaker_edges += 1
            self._touched.add(tail)
            self._touched.add(head)
        elif player == MAKER:
            self.maker_adj[tail] |= hb
            self.maker_adj[head] |= tb
            self.maker_deg[tail] += 1
            self.maker_deg[head] += 1
            if self.maker_deg[tail] == 2:
                self.deg_le1_mask &= ~tb
            if self.maker_deg[head] == 2:
                self.deg_le1_mask &= ~hb
            self.out_heads[tail].append(head)
            self.out_deg[tail] += 1
            if self.troublesome[tail]:
                self.served[tail] += 1
            else:
                self.out_calm[tail] += 1
            self.maker_edges += 1
        else:
            raise BoardError(f"bad player {player}")

    def unclaimed_pairs(self) -> int:
        return self.n * (self.n - 1) // 2 - self.maker_edges - self.breaker_edges

    # -- trouble tracking -------------------------------------------------

    def danger(self, v: int) -> int:
        """Breaker pressure minus service credit: breaker_deg - b*served."""
        return self.breaker_deg[v] - self.cfg.b * self.served[v]

    def refresh_troublesome(self) -> list[int]:
        """Flag vertices whose Breaker degree crossed the threshold.

        Strictly greater than the threshold; flags are monotone (never
        cleared) and onset records the turn of first crossing.  Returns
        newly flagged vertices in increasing order.
        """
        if not self._touched:
            return []
        thr = self.cfg.trouble_threshold
        fresh = [
            v for v in self._touched
            if not self.troublesome[v] and self.breaker_deg[v] > thr
        ]
        self._touched.clear()
        fresh.sort()
        for v in fresh:
            self.troublesome[v] = 1
            self.trouble_onset[v] = self.turn
        return fresh

    # -- invariant support -------------------------------------------------

    def recompute_counters(self) -> dict[str, list[int]]:
        """Rebuild all degree counters from the ownership matrix.

        Used by the audit layer: the result must match the incrementally
        maintained fields.  Directed counters are rebuilt from out_heads
        plus the trouble onset ordering, so this is a genuine cross-check
        of the bookkeeping, not a re-read of the same fields.
        """
        n = self.n
        bdeg = [0] * n
        mdeg = [0] * n
        for u in range(n):
            row = u * n
            for v in range(u + 1, n):
                o = self.own[row + v]
                if o == BREAKER:
                    bdeg[u] += 1
                    bdeg[v] += 1
                elif o == MAKER:
                    mdeg[u] += 1
                    mdeg[v] += 1
        out = [len(h) for h in self.out_heads]
        return {"breaker_deg": bdeg, "maker_deg": mdeg, "out_deg": out}

    def fingerprint_fields(self) -> tuple:
        """Everything replay equality is judged on."""
        return (
            bytes(self.own),
            tuple(self.breaker_deg),
            tuple(self.maker_deg),
            tuple(self.out_deg),
            tuple(self.out_calm),
            tuple(self.served),
            bytes(self.troublesome),
            tuple(self.trouble_onset),
            self.turn,
            self.maker_edges,
            self.breaker_edges,
        )


def new_game(cfg: GameConfig) -> Board:
    return Board(cfg)


def bits(mask: int):
    """Iterate set bit positions of a Python int, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def kth_set_bit(mask: int, k: int) -> int:
    """Position of the k-th (0-based) set bit, ascending. Assumes it exists."""
    # Walk 64-bit words first so big masks don't cost a Python loop per bit.
    pos = 0
    while True:
        word = (mask >> pos) & 0xFFFFFFFFFFFFFFFF
        c = word.bit_count()
        if c > k:
            break
        k -= c
        pos += 64
    word = (mask >> pos) & 0xFFFFFFFFFFFFFFFF
    while True:
        low = word & -word
        if k == 0:
            return pos + low.bit_length() - 1
        word ^= low
        k -= 1

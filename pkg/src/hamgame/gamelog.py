"""Move log: one JSON object per line, deterministic bytes.

Layout: a header line carrying the game parameters, one line per
half-move, and a final end line with the outcome and (for wins) the
cycle certificate plus a state fingerprint.  Key order is fixed at
construction so identical games serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .board import Board, GameConfig, MAKER, BREAKER, AuditLevel


@dataclass
class MoveRecord:
    turn: int
    player: str                       # "B" or "M"
    edges: list[tuple[int, int]]
    case: str | None = None           # Maker records only
    promoted: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        body: dict = {"turn": self.turn, "player": self.player,
                      "edges": [[u, v] for u, v in self.edges]}
        if self.case is not None:
            body["case"] = self.case
        if self.promoted:
            body["promoted"] = self.promoted
        return json.dumps(body, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "MoveRecord":
        return cls(
            turn=obj["turn"],
            player=obj["player"],
            edges=[(u, v) for u, v in obj["edges"]],
            case=obj.get("case"),
            promoted=list(obj.get("promoted", ())),
        )


def config_meta(cfg: GameConfig, breaker: str) -> dict:
    return {
        "n": cfg.n, "b": cfg.b, "tau": cfg.trouble_threshold,
        "quota": cfg.quota, "hub_size": cfg.hub_size,
        "max_turns": cfg.max_turns, "seed": cfg.seed,
        "audit_level": cfg.audit_level.value,
        "limited_only": cfg.limited_only,
        "closure_budget": cfg.closure_budget,
        "audit_samples": cfg.audit_samples,
        "breaker": breaker,
    }


def config_from_meta(meta: dict) -> GameConfig:
    return GameConfig(
        n=meta["n"], b=meta["b"], trouble_threshold=meta["tau"],
        quota=meta["quota"], hub_size=meta["hub_size"],
        max_turns=meta["max_turns"], seed=meta["seed"],
        audit_level=AuditLevel(meta["audit_level"]),
        limited_only=meta["limited_only"],
        closure_budget=meta["closure_budget"],
        audit_samples=meta.get("audit_samples", 10_000),
    )


def board_fingerprint(board: Board) -> str:
    h = hashlib.sha256()
    for part in board.fingerprint_fields():
        h.update(repr(part).encode())
        h.update(b"|")
    return h.hexdigest()


@dataclass
class GameLog:
    meta: dict
    records: list[MoveRecord] = field(default_factory=list)
    end: dict | None = None

    def dumps(self) -> str:
        lines = [json.dumps({"meta": self.meta}, separators=(",", ":"))]
        lines.extend(r.to_json() for r in self.records)
        if self.end is not None:
            lines.append(json.dumps({"end": self.end}, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def parse(cls, text: str) -> "GameLog":
        meta: dict | None = None
        records: list[MoveRecord] = []
        end = None
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if "meta" in obj:
                meta = obj["meta"]
            elif "end" in obj:
                end = obj["end"]
            else:
                records.append(MoveRecord.from_json(obj))
        if meta is None:
            raise ValueError("log has no header line")
        return cls(meta=meta, records=records, end=end)

    @classmethod
    def load(cls, path: str) -> "GameLog":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())


class LogReplayError(ValueError):
    def __init__(self, turn: int, message: str) -> None:
        super().__init__(f"turn {turn}: {message}")
        self.turn = turn


def apply_log(log: GameLog) -> Board:
    """Re-apply every recorded claim to a fresh board.

    Recomputes the troublesome promotions after each Breaker record and
    insists they match what was logged; this makes the log a replayable
    witness rather than a transcript taken on faith.
    """
    cfg = config_from_meta(log.meta)
    board = Board(cfg)
    for rec in log.records:
        board.turn = rec.turn
        if rec.player == "B":
            for u, v in rec.edges:
                board.claim_edge(u, v, BREAKER)
            fresh = board.refresh_troublesome()
            if fresh != sorted(rec.promoted):
                raise LogReplayError(
                    rec.turn,
                    f"promotions {fresh} != logged {sorted(rec.promoted)}")
        elif rec.player == "M":
            for u, v in rec.edges:
                board.claim_edge(u, v, MAKER)
        else:
            raise LogReplayError(rec.turn, f"bad player {rec.player!r}")
    return board

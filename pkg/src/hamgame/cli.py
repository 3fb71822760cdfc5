"""Command-line front end.

Four subcommands: `run` plays one seeded game, `sweep` runs an
(n, seed) grid and writes CSV + manifest, `replay` re-derives a saved
game from its log and checks byte identity, `audit` re-verifies a saved
log offline.  A key=value config file can hold any flag's value; flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .audit import potential_audit, turn_accounting, verify_hamilton
from .board import AuditLevel, GameConfig
from .gamelog import GameLog, config_from_meta
from .runner import SweepSpec, game_rng, run_game, run_sweep

_INT_KEYS = {"n", "b", "seed", "quota", "max_turns", "seeds",
             "closure_budget", "audit_samples", "master_seed", "workers"}
_FLOAT_KEYS = {"beta", "tau_coeff", "s0_coeff"}
_BOOL_KEYS = {"limited_only", "keep_logs"}


def _coerce(key: str, raw: str):
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _BOOL_KEYS:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return raw


def load_config_file(path: str) -> dict:
    """key=value lines; '#' starts a comment; keys use flag spelling."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, raw = line.split("=", 1)
            key = key.strip().replace("-", "_")
            values[key] = _coerce(key, raw.strip())
    return values


def _add_game_flags(p: argparse.ArgumentParser, n_is_list: bool = False) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    if n_is_list:
        p.add_argument("--n", type=str, default="100",
                       help="comma-separated list of n values")
    else:
        p.add_argument("--n", type=int, default=100)
    p.add_argument("--b", type=int, default=None,
                   help="absolute Breaker bias; default uses --beta")
    p.add_argument("--beta", type=float, default=0.25,
                   help="bias rule b = floor(beta*n/ln n)")
    p.add_argument("--breaker", default="random",
                   choices=["random", "isolator", "maxdanger", "pairkiller",
                            "scripted"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quota", type=int, default=4)
    p.add_argument("--tau-coeff", type=float, default=1.0)
    p.add_argument("--s0-coeff", type=float, default=0.15)
    p.add_argument("--audit-level", default="cheap",
                   choices=[lvl.value for lvl in AuditLevel])
    p.add_argument("--max-turns", type=int, default=None)
    p.add_argument("--limited-only", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--closure-budget", type=int, default=None)
    p.add_argument("--audit-samples", type=int, default=10_000)


def _apply_config_file(parser: argparse.ArgumentParser,
                       argv: list[str]) -> argparse.Namespace:
    # Two-pass parse so file values act as defaults under real flags.
    # Defaults must land on the chosen subcommand's parser: subparsers
    # fill a fresh namespace, so root-level set_defaults never survives.
    probe, _ = parser.parse_known_args(argv)
    if getattr(probe, "config", None):
        values = load_config_file(probe.config)
        parser.set_defaults(**values)
        chosen = parser.subcommand_parsers.get(probe.command)
        if chosen is not None:
            chosen.set_defaults(**values)
    return parser.parse_args(argv)


def _game_config(args: argparse.Namespace) -> GameConfig:
    return GameConfig.scaled(
        args.n, b=args.b, beta=args.beta, tau_coeff=args.tau_coeff,
        s0_coeff=args.s0_coeff, quota=args.quota, max_turns=args.max_turns,
        seed=args.seed, audit_level=args.audit_level,
        limited_only=args.limited_only, closure_budget=args.closure_budget,
        audit_samples=args.audit_samples,
    )


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _game_config(args)
    result = run_game(cfg, args.breaker, script_path=args.script)
    if args.out:
        result.log.write(args.out)
    line = f"{result.outcome} n={cfg.n} b={cfg.b} turns={result.maker_turns}"
    if result.reason:
        line += f" reason={result.reason!r}"
    print(line)
    print(json.dumps(result.stats, default=str, sort_keys=True))
    return 0 if result.outcome != "Aborted" else 2


def cmd_sweep(args: argparse.Namespace) -> int:
    n_values = [int(x) for x in str(args.n).split(",")]
    spec = SweepSpec(
        n_values=n_values, seeds=args.seeds, breaker=args.breaker,
        b=args.b, beta=args.beta, tau_coeff=args.tau_coeff,
        s0_coeff=args.s0_coeff, quota=args.quota,
        master_seed=args.seed, audit_level=args.audit_level,
        limited_only=args.limited_only, closure_budget=args.closure_budget,
        max_turns=args.max_turns, audit_samples=args.audit_samples,
    )
    rows, _ = run_sweep(spec, out_dir=args.out, keep_logs=args.keep_logs,
                        workers=args.workers)
    wins = sum(1 for r in rows if r["outcome"] == "MakerWin")
    print(f"{len(rows)} games, {wins} MakerWin"
          + (f", wrote {args.out}" if args.out else ""))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    from .gamelog import apply_log, board_fingerprint

    log = GameLog.load(args.log)
    board = apply_log(log)
    fp = board_fingerprint(board)
    want = (log.end or {}).get("fingerprint")
    if want is None:
        print("log has no final fingerprint")
        return 2
    if fp != want:
        print(f"MISMATCH replayed={fp} logged={want}")
        return 1
    # Re-run the full engine against the logged Breaker moves and
    # demand byte-identical output.
    cfg = config_from_meta(log.meta)
    result = run_game(cfg, "scripted", script_path=args.log)
    if result.log.dumps() != log.dumps():
        print("MISMATCH: engine rerun diverged from saved log")
        return 1
    print(f"OK fingerprint={fp}")
    return 0


def cmd_audit(args: argparse.Namespace) -> int:
    log = GameLog.load(args.log)
    failures = 0
    outcome = (log.end or {}).get("outcome")
    print(f"outcome: {outcome}")
    if outcome == "MakerWin":
        ok = verify_hamilton(log)
        print(f"hamilton-cycle: {'PASS' if ok else 'FAIL'}")
        failures += 0 if ok else 1
    runs = potential_audit(log)
    bad = [r for r in runs if not r.ok]
    print(f"potential: {len(runs)} runs, "
          f"{'PASS' if not bad else f'{len(bad)} FAIL'}")
    failures += len(bad)
    acct = turn_accounting(log)
    for key in ("trouble_ok", "booster_ok", "case_sum_ok", "growth_ok"):
        if key in acct:
            print(f"{key}: {'PASS' if acct[key] else 'FAIL'}")
            failures += 0 if acct[key] else 1
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"accounting": acct,
                       "potential_runs": len(runs),
                       "potential_failures": len(bad)},
                      fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamgame",
        description="Biased Maker-Breaker Hamilton cycle game simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="play one seeded game")
    _add_game_flags(p_run)
    p_run.add_argument("--script", default=None,
                       help="log file with Breaker moves (breaker=scripted)")
    p_run.add_argument("--out", default=None, help="write the game log here")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run an (n, seed) grid")
    _add_game_flags(p_sweep, n_is_list=True)
    p_sweep.add_argument("--seeds", type=int, default=10,
                         help="games per n value")
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.add_argument("--keep-logs", action="store_true")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_replay = sub.add_parser("replay", help="verify a saved log replays")
    p_replay.add_argument("log")
    p_replay.set_defaults(func=cmd_replay)

    p_audit = sub.add_parser("audit", help="offline checks on a saved log")
    p_audit.add_argument("log")
    p_audit.add_argument("--out", default=None, help="write a JSON report")
    p_audit.set_defaults(func=cmd_audit)
    parser.subcommand_parsers = {"run": p_run, "sweep": p_sweep,
                                 "replay": p_replay, "audit": p_audit}
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = _apply_config_file(parser, list(sys.argv[1:] if argv is None
                                           else argv))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

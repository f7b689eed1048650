#!/usr/bin/env python3
"""Seed soak: run many full bot games, audit every log, report failures.

Usage:
    python scripts/soak.py [--seeds 1000] [--players 3] [--policy random]
                           [--targets 8]

Exits nonzero if any game fails to terminate or any invariant audit
finds a violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from miboard import bots  # noqa: E402
from miboard.corpus import load_corpus  # noqa: E402
from miboard.model import GameConfig, TurnPhase  # noqa: E402


def synthetic_corpus(n_targets: int):
    doc = {
        "title": f"Soak text ({n_targets} targets)",
        "sentences": [{"text": "Opening sentence for context.", "target": False}]
        + [{"text": f"Soak target sentence {i}.", "target": True} for i in range(n_targets)],
    }
    return load_corpus(json.dumps(doc))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=1000)
    parser.add_argument("--players", type=int, default=3, choices=(3, 4))
    parser.add_argument("--policy", default="random")
    parser.add_argument("--targets", type=int, default=8)
    args = parser.parse_args()

    corpus = synthetic_corpus(args.targets)
    config = GameConfig()
    failures: list[str] = []
    totals = {"rounds": 0, "debates": 0, "chat_messages": 0, "forfeits": 0, "events": 0}
    started = time.monotonic()

    for seed in range(args.seeds):
        policies = [
            bots.make_policy(args.policy, seed, seat) for seat in range(args.players)
        ]
        transcript = bots.simulate_game(policies, config, corpus, seed)
        if transcript.final_state.phase != TurnPhase.GAME_OVER:
            failures.append(f"seed {seed}: did not terminate")
            continue
        report = bots.audit_log(transcript.log_text)
        if not report.ok:
            failures.append(f"seed {seed}: {report.violations[:3]}")
        stats = transcript.stats
        totals["rounds"] += stats["rounds"]
        totals["debates"] += stats["debates"]
        totals["chat_messages"] += stats["chat_messages"]
        totals["forfeits"] += stats["forfeits"]
        totals["events"] += stats["events_logged"]
        if seed and seed % 200 == 0:
            print(f"  ... {seed} games, {len(failures)} failures", file=sys.stderr)

    elapsed = time.monotonic() - started
    print(json.dumps({
        "v": 1,
        "games": args.seeds,
        "policy": args.policy,
        "players": args.players,
        "failures": len(failures),
        "totals": totals,
        "wall_seconds": round(elapsed, 2),
    }, indent=2))
    for line in failures[:20]:
        print("FAIL:", line, file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

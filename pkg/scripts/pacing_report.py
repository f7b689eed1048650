#!/usr/bin/env python3
"""Pacing comparison across table compositions.

Game pace is the quantity desk studies of this game design care about:
how long players sit idle, how often votes collapse into debates, how
much of the chat budget actually gets used. This script simulates a
batch of games per table mix and prints one row per mix with the
pace-relevant aggregates (simulated minutes per game, debates per
round, chat usage, forfeits).

Usage:
    python scripts/pacing_report.py [--games 50] [--targets 10]
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from miboard import bots  # noqa: E402
from miboard.corpus import load_corpus  # noqa: E402
from miboard.model import GameConfig  # noqa: E402

MIXES = {
    "honest-table": ["honest", "honest", "honest"],
    "one-slow-reader": ["stall:120000", "honest", "honest"],
    "one-absent-player": ["stall", "honest", "honest"],
    "argumentative": ["contrarian", "contrarian", "contrarian"],
    "casual-random": ["random", "random", "random"],
}


def synthetic_corpus(n_targets: int):
    doc = {
        "title": "Pacing text",
        "sentences": [{"text": "Context opener.", "target": False}]
        + [{"text": f"Pacing target {i}.", "target": True} for i in range(n_targets)],
    }
    return load_corpus(json.dumps(doc))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--games", type=int, default=50)
    parser.add_argument("--targets", type=int, default=10)
    args = parser.parse_args()

    corpus = synthetic_corpus(args.targets)
    config = GameConfig()
    rows = []
    for mix_name, specs in MIXES.items():
        sim_minutes, debates, chats, forfeits, rounds, matched = [], 0, 0, 0, 0, 0
        for seed in range(args.games):
            policies = [bots.make_policy(s, seed, i) for i, s in enumerate(specs)]
            t = bots.simulate_game(policies, config, corpus, seed)
            stats = t.stats
            sim_minutes.append(stats["sim_duration_ms"] / 60_000)
            debates += stats["debates"]
            chats += stats["chat_messages"]
            forfeits += stats["forfeits"]
            rounds += stats["rounds"]
            matched += stats["matched_rounds"]
        rows.append({
            "mix": mix_name,
            "games": args.games,
            "sim_minutes_per_game_mean": round(statistics.mean(sim_minutes), 2),
            "sim_minutes_per_game_max": round(max(sim_minutes), 2),
            "debates_per_round": round(debates / rounds, 3),
            "chat_messages_per_debate": round(chats / debates, 2) if debates else 0.0,
            "forfeit_rate": round(forfeits / rounds, 3),
            "match_rate": round(matched / rounds, 3),
        })

    width = max(len(r["mix"]) for r in rows)
    header = (
        f"{'mix':<{width}}  sim-min/game  worst  debates/rd  chats/debate  "
        f"forfeit%  match%"
    )
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r['mix']:<{width}}  {r['sim_minutes_per_game_mean']:>12.2f}  "
            f"{r['sim_minutes_per_game_max']:>5.1f}  {r['debates_per_round']:>10.3f}  "
            f"{r['chat_messages_per_debate']:>12.2f}  "
            f"{100 * r['forfeit_rate']:>7.1f}%  {100 * r['match_rate']:>5.1f}%"
        )
    print()
    print(json.dumps({"v": 1, "rows": rows}))
    return 0


if __name__ == "__main__":
    sys.exit(main())

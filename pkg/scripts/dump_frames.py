#!/usr/bin/env python3
"""Dump real per-seat frame streams as fixtures for the frontend tests.

The browser client's unit tests replay these exact server frames, so the
TypeScript view model is tested against what the engine actually emits,
not against hand-written approximations.

Usage:
    python scripts/dump_frames.py [outdir]   # default frontend/test/fixtures
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from miboard import bots, engine, protocol  # noqa: E402
from miboard.corpus import load_corpus  # noqa: E402
from miboard.model import GameConfig  # noqa: E402
from miboard.room import LogWriter, RoomCore, make_header  # noqa: E402


def small_corpus():
    return load_corpus(json.dumps({
        "title": "Fixture text",
        "sentences": [
            {"text": "Context sentence before everything.", "target": False},
            {"text": "First target sentence.", "target": True},
            {"text": "Second target sentence.", "target": True},
            {"text": "Third target sentence.", "target": True},
        ],
    }))


def frames_fixture(policies, seed: int) -> dict:
    transcript = bots.simulate_game(policies, GameConfig(), small_corpus(), seed)
    return {
        "seed": seed,
        "policies": [p.name for p in policies],
        "final_hash": transcript.final_hash,
        "frames": {
            str(seat): [json.loads(raw) for _ms, raw in frames]
            for seat, frames in transcript.frames.items()
        },
        "stats": transcript.stats,
    }


def reconnect_fixture() -> dict:
    """Drive a room to mid-debate by hand; capture seat 2's frames, then
    the reattach snapshot the server would send on reconnect."""
    corpus = small_corpus()
    config = GameConfig()
    names = ["alice", "bob", "cara"]
    state = engine.new_game(config, names, corpus, seed=12)
    core = RoomCore(
        state, corpus, LogWriter(make_header(12, config, corpus, names)),
        now_ms=lambda: 0, room_id="FIXTUR",
    )
    frames: list[dict] = []

    def deliver(outcome):
        for d in outcome.deliveries:
            if d.seats is None or 2 in d.seats:
                frames.append(json.loads(protocol.encode(d.event)))

    deliver(core.start_effects())
    assigned = core.state.round.assigned_strategy.value
    wrong = next(s for s in protocol.STRATEGY_NAMES if s != assigned)
    deliver(core.handle_command(0, protocol.Ready(1)))
    deliver(core.handle_command(0, protocol.SubmitSelfExplanation(2, "It connects the two parts of the text.")))
    deliver(core.handle_command(1, protocol.CastVote(1, assigned)))
    deliver(core.handle_command(2, protocol.CastVote(1, wrong)))  # forces the debate
    deliver(core.handle_command(1, protocol.Chat(2, "I am sure about my pick.")))
    deliver(core.handle_command(2, protocol.Chat(2, "I read it another way.")))
    assert core.state.phase.value == "Debating"
    snapshot = core.build_snapshot(2, token="fixture-token")
    return {
        "description": "seat 2 frames up to mid-debate, plus the reattach snapshot",
        "frames_seat2": frames,
        "reattach_snapshot": snapshot,
        "assigned": assigned,
    }


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    fixtures = {
        "honest_game.json": frames_fixture(
            [bots.HonestPolicy() for _ in range(3)], seed=7
        ),
        "contrarian_game.json": frames_fixture(
            [bots.ContrarianPolicy() for _ in range(3)], seed=11
        ),
        "reconnect_debate.json": reconnect_fixture(),
    }
    for name, data in fixtures.items():
        path = out_dir / name
        path.write_text(json.dumps(data, indent=1))
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

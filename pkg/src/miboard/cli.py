"""Single entry point: serve, simulate, replay, validate-corpus.

Exit codes: 0 success, 1 domain error (invalid corpus, divergent or
corrupt replay, failed simulation), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bots, engine
from .corpus import load_corpus
from .errors import CorpusError, LogError, MiBoardError
from .model import GameConfig, state_hash
from .room import replay_log


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import ServerSettings, run_server

    settings = ServerSettings.from_env(
        port=args.port,
        data_dir=Path(args.data_dir) if args.data_dir else None,
        corpus_dir=Path(args.corpus_dir) if args.corpus_dir else None,
        timer_scale=args.timer_scale,
    )
    print(
        f"miboard server on {settings.host}:{settings.port} "
        f"(data={settings.data_dir}, corpora={settings.corpus_dir})",
        file=sys.stderr,
    )
    run_server(settings)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        corpus = load_corpus(Path(args.corpus).read_bytes())
    except (OSError, CorpusError) as exc:
        print(f"cannot load corpus: {exc}", file=sys.stderr)
        return 1
    specs = args.policy.split(",") if args.policy else []
    if len(specs) == 1:
        specs = specs * args.players
    if len(specs) != args.players:
        print(
            f"--policy needs 1 or {args.players} entries, got {len(specs)}",
            file=sys.stderr,
        )
        return 2
    try:
        policies = [bots.make_policy(spec, args.seed, seat) for seat, spec in enumerate(specs)]
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    config = GameConfig()
    try:
        transcript = bots.simulate_game(policies, config, corpus, args.seed)
    except MiBoardError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"game-{args.seed}.jsonl").write_text(transcript.log_text)
        (out / f"game-{args.seed}.stats.json").write_text(
            json.dumps(transcript.stats, indent=2)
        )
    print(json.dumps(transcript.stats, indent=2))
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        text = Path(args.log).read_text()
    except OSError as exc:
        print(f"cannot read log: {exc}", file=sys.stderr)
        return 1
    try:
        final = replay_log(text)
    except LogError as exc:
        print("DIVERGED" if exc.code == "DivergentReplay" else f"ERROR {exc.code}: {exc.detail}")
        return 1
    print("MATCH")
    print(json.dumps({
        "final_hash": state_hash(final),
        "rounds_played": final.round_number - 1,
        "phase": final.phase.value,
        "standings": engine.standings(final),
    }, indent=2))
    return 0


def _cmd_validate_corpus(args: argparse.Namespace) -> int:
    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        print(f"cannot read file: {exc}", file=sys.stderr)
        return 1
    try:
        corpus = load_corpus(data)
    except CorpusError as exc:
        print(f"INVALID ({exc.code}): {exc.detail}")
        return 1
    targets = len(corpus.target_indices())
    print(
        f"OK: {corpus.title!r}, {len(corpus.sentences)} sentences, "
        f"{targets} targets, checksum {corpus.checksum[:12]}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="miboard")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the room server")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--data-dir", default=None)
    serve.add_argument("--corpus-dir", default=None)
    serve.add_argument(
        "--timer-scale", type=float, default=None,
        help="multiply real timer durations (testing aid; 1.0 = game time)",
    )
    serve.set_defaults(func=_cmd_serve)

    simulate = sub.add_parser("simulate", help="run a headless bot game")
    simulate.add_argument("--players", type=int, default=3, choices=(3, 4))
    simulate.add_argument(
        "--policy", default="honest",
        help="comma-separated per-seat policies: honest|random|contrarian|stall[:ms]",
    )
    simulate.add_argument("--corpus", required=True)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", default=None, help="directory for log + stats files")
    simulate.set_defaults(func=_cmd_simulate)

    replay = sub.add_parser("replay", help="verify a recorded game log")
    replay.add_argument("--log", required=True)
    replay.set_defaults(func=_cmd_replay)

    validate = sub.add_parser("validate-corpus", help="check a corpus file")
    validate.add_argument("file")
    validate.set_defaults(func=_cmd_validate_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

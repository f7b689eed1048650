"""CLI subcommands: machine-readable output and exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from miboard.cli import main

from util import corpus_obj


@pytest.fixture()
def corpus_file(tmp_path) -> Path:
    path = tmp_path / "text.json"
    path.write_text(json.dumps(corpus_obj(n_targets=4)))
    return path


def run_cli(argv, capsys) -> tuple[int, str, str]:
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_honest_simulation_prints_stats(self, corpus_file, capsys, tmp_path):
        out_dir = tmp_path / "out"
        code, out, _ = run_cli(
            [
                "simulate", "--players", "3", "--policy", "honest,honest,honest",
                "--corpus", str(corpus_file), "--seed", "7", "--out", str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        stats = json.loads(out)
        assert stats["v"] == 1
        assert stats["rounds"] == 4
        assert stats["debates"] == 0
        assert (out_dir / "game-7.jsonl").exists()
        assert (out_dir / "game-7.stats.json").exists()

    def test_single_policy_replicated(self, corpus_file, capsys):
        code, out, _ = run_cli(
            ["simulate", "--policy", "contrarian", "--corpus", str(corpus_file), "--seed", "2"],
            capsys,
        )
        assert code == 0
        stats = json.loads(out)
        assert stats["policies"] == ["contrarian"] * 3
        assert stats["debates"] == stats["rounds"]

    def test_policy_count_mismatch_is_usage_error(self, corpus_file, capsys):
        code, _, err = run_cli(
            ["simulate", "--policy", "honest,honest", "--corpus", str(corpus_file)],
            capsys,
        )
        assert code == 2
        assert "--policy" in err

    def test_unknown_policy_is_usage_error(self, corpus_file, capsys):
        code, _, err = run_cli(
            ["simulate", "--policy", "psychic", "--corpus", str(corpus_file)], capsys
        )
        assert code == 2

    def test_missing_corpus_is_domain_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            ["simulate", "--corpus", str(tmp_path / "nope.json")], capsys
        )
        assert code == 1


class TestReplay:
    def test_untampered_log_matches(self, corpus_file, capsys, tmp_path):
        out_dir = tmp_path / "out"
        run_cli(
            ["simulate", "--corpus", str(corpus_file), "--seed", "9", "--out", str(out_dir)],
            capsys,
        )
        code, out, _ = run_cli(["replay", "--log", str(out_dir / "game-9.jsonl")], capsys)
        assert code == 0
        assert out.splitlines()[0] == "MATCH"
        summary = json.loads("\n".join(out.splitlines()[1:]))
        assert summary["phase"] == "GameOver"
        assert len(summary["standings"]) == 3

    def test_tampered_log_diverges(self, corpus_file, capsys, tmp_path):
        out_dir = tmp_path / "out"
        run_cli(
            ["simulate", "--corpus", str(corpus_file), "--seed", "9", "--out", str(out_dir)],
            capsys,
        )
        log_path = out_dir / "game-9.jsonl"
        lines = log_path.read_text().strip().split("\n")
        record = json.loads(lines[2])
        record["event"]["seat"] = (record["event"].get("seat", 0) + 1) % 3
        lines[2] = json.dumps(record)
        log_path.write_text("\n".join(lines) + "\n")
        code, out, _ = run_cli(["replay", "--log", str(log_path)], capsys)
        assert code == 1
        first = out.splitlines()[0]
        assert first == "DIVERGED" or first.startswith("ERROR")

    def test_seq_gap_reports_corrupt(self, corpus_file, capsys, tmp_path):
        out_dir = tmp_path / "out"
        run_cli(
            ["simulate", "--corpus", str(corpus_file), "--seed", "9", "--out", str(out_dir)],
            capsys,
        )
        log_path = out_dir / "game-9.jsonl"
        lines = log_path.read_text().strip().split("\n")
        del lines[4]
        log_path.write_text("\n".join(lines) + "\n")
        code, out, _ = run_cli(["replay", "--log", str(log_path)], capsys)
        assert code == 1
        assert "CorruptLog" in out


class TestValidateCorpus:
    def test_valid_file(self, corpus_file, capsys):
        code, out, _ = run_cli(["validate-corpus", str(corpus_file)], capsys)
        assert code == 0
        assert out.startswith("OK:")

    def test_no_targets_diagnostic(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "title": "t", "sentences": [{"text": "x.", "target": False}]
        }))
        code, out, _ = run_cli(["validate-corpus", str(bad)], capsys)
        assert code == 1
        assert "NoTargetSentences" in out

    def test_empty_sentence_diagnostic_names_field(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "title": "t",
            "sentences": [{"text": "ok.", "target": True}, {"text": " ", "target": False}],
        }))
        code, out, _ = run_cli(["validate-corpus", str(bad)], capsys)
        assert code == 1
        assert "sentences[1]" in out


def test_usage_error_exits_2():
    result = subprocess.run(
        [sys.executable, "-m", "miboard.cli", "frobnicate"],
        capture_output=True, text=True,
    )
    assert result.returncode == 2
    assert "usage" in result.stderr.lower()


def test_replay_over_http_log_equivalence(corpus_file, capsys, tmp_path):
    # A log written by simulate and re-read through the CLI ends MATCH;
    # this is the same path `miboard replay` uses on server-written logs.
    out_dir = tmp_path / "out"
    run_cli(
        ["simulate", "--policy", "random", "--corpus", str(corpus_file),
         "--seed", "31", "--out", str(out_dir)],
        capsys,
    )
    code, out, _ = run_cli(["replay", "--log", str(out_dir / "game-31.jsonl")], capsys)
    assert code == 0 and out.splitlines()[0] == "MATCH"

"""Bot policies, the in-process simulator, and dual-path equivalence."""

import json

import pytest

from miboard import bots, protocol
from miboard.model import GameConfig, TurnPhase, state_hash
from miboard.room import replay_log

from util import corpus_obj, make_corpus, running_server


def simulate(policies, seed, n_targets=5, config=None):
    return bots.simulate_game(policies, config or GameConfig(), make_corpus(n_targets), seed)


class TestHonestGames:
    def test_five_target_game_seed_7(self):
        t = simulate([bots.HonestPolicy() for _ in range(3)], seed=7, n_targets=5)
        assert t.stats["rounds"] == 5
        assert t.stats["debates"] == 0
        assert any(r["points"] > 0 for r in t.stats["standings"])

    @pytest.mark.parametrize("seed", range(8))
    def test_honest_games_never_debate(self, seed):
        t = simulate([bots.HonestPolicy() for _ in range(3)], seed=seed)
        assert t.stats["debates"] == 0
        assert t.stats["forfeits"] == 0
        assert t.stats["matched_rounds"] == t.stats["rounds"]

    def test_four_player_game(self):
        t = simulate([bots.HonestPolicy() for _ in range(4)], seed=3)
        assert t.final_state.seat_count() == 4
        assert t.stats["rounds"] == 5


class TestContrarianGames:
    def test_every_round_debates(self):
        t = simulate([bots.ContrarianPolicy() for _ in range(3)], seed=11, n_targets=6)
        assert t.stats["debates"] == t.stats["rounds"] == 6
        assert t.stats["matched_rounds"] == 0

    def test_chat_cap_enforced_and_limit_rejections_observed(self):
        t = simulate([bots.ContrarianPolicy() for _ in range(3)], seed=11, n_targets=6)
        # 2 voters x 3 messages x 6 rounds, and not one message more
        assert t.stats["chat_messages"] == 36
        rejections = [r for r in t.rejections if r["command"] == "chat"]
        assert rejections and all(r["code"] == "ChatLimitReached" for r in rejections)

    def test_debates_bounded_by_cap(self):
        t = simulate([bots.ContrarianPolicy() for _ in range(3)], seed=11, n_targets=6)
        assert all(d <= 180_000 for d in t.stats["debate_durations_ms"])


class TestStallGames:
    def test_all_rounds_forfeit_via_timers(self):
        t = simulate([bots.StallPolicy() for _ in range(3)], seed=1, n_targets=4)
        assert t.stats["forfeits"] == t.stats["rounds"] == 4
        assert all(r["points"] == 0 for r in t.stats["standings"])
        # each forfeited round consumes exactly the self-explain timer
        assert t.stats["sim_duration_ms"] == 4 * 300 * 1000

    def test_finite_delay_stall_acts_after_delay(self):
        policies = [bots.StallPolicy(delay_ms=5_000), bots.HonestPolicy(), bots.HonestPolicy()]
        t = simulate(policies, seed=2, n_targets=3)
        assert t.stats["forfeits"] == 0  # slow but not absent
        assert t.stats["rounds"] == 3
        assert t.stats["sim_duration_ms"] >= 5_000

    def test_one_dead_seat_blocks_majorities_in_three_player_games(self):
        # Strict majority of 2 voters needs both; a permanent abstainer
        # therefore starves everyone of points (abstentions count against).
        policies = [bots.StallPolicy(), bots.HonestPolicy(), bots.HonestPolicy()]
        t = simulate(policies, seed=2, n_targets=6)
        assert t.stats["forfeits"] == 2  # seat 0 read rounds 1 and 4
        assert t.stats["matched_rounds"] == 0
        assert all(r["points"] == 0 for r in t.stats["standings"])

    def test_stall_reader_forfeits_but_others_score_with_four_players(self):
        # With 3 voters, 2 matching votes beat one abstention.
        policies = [bots.StallPolicy()] + [bots.HonestPolicy() for _ in range(3)]
        t = simulate(policies, seed=2, n_targets=8)
        standings = {r["seat"]: r for r in t.stats["standings"]}
        assert t.stats["forfeits"] == 2  # seat 0's two reading turns
        assert standings[0]["points"] == 0
        assert all(standings[s]["points"] > 0 for s in (1, 2, 3))


class TestDeterminism:
    def test_same_seed_same_log_and_hash(self):
        a = simulate([bots.RandomPolicy(5), bots.RandomPolicy(6), bots.RandomPolicy(7)], seed=123)
        b = simulate([bots.RandomPolicy(5), bots.RandomPolicy(6), bots.RandomPolicy(7)], seed=123)
        assert a.final_hash == b.final_hash
        assert a.log_text == b.log_text

    def test_transcripts_replayable(self):
        t = simulate(
            [bots.RandomPolicy(1), bots.ContrarianPolicy(), bots.HonestPolicy()], seed=55
        )
        final = replay_log(t.log_text)
        assert state_hash(final) == t.final_hash

    def test_random_soak_1000_seeds_terminate_and_audit_clean(self):
        corpus = make_corpus(6)
        config = GameConfig()
        bound = config.max_rounds + 1
        for seed in range(1000):
            policies = [bots.RandomPolicy(seed * 3 + i) for i in range(3)]
            t = bots.simulate_game(policies, config, corpus, seed)
            assert t.final_state.phase == TurnPhase.GAME_OVER, f"seed {seed} did not end"
            assert t.final_state.round_number <= bound
            report = bots.audit_log(t.log_text)
            assert report.ok, (seed, report.violations[:5])


class TestPolicyUnit:
    def test_honest_votes_the_embedded_tag(self):
        view = bots.ClientView(1)
        view.phase = TurnPhase.VOTING.value
        view.round_number = 1
        view.reader_seat = 0
        view.se_text = "[Bridging] because the two parts connect."
        command = bots.HonestPolicy().decide(view)
        assert isinstance(command, protocol.CastVote)
        assert command.strategy == "Bridging"

    def test_contrarian_never_votes_its_belief(self):
        view = bots.ClientView(1)
        view.phase = TurnPhase.VOTING.value
        view.round_number = 1
        view.reader_seat = 0
        view.se_text = "[Prediction] what happens next is rain."
        command = bots.ContrarianPolicy().decide(view)
        assert isinstance(command, protocol.CastVote)
        assert command.strategy != "Prediction"

    def test_stall_emits_nothing(self):
        view = bots.ClientView(0)
        view.phase = TurnPhase.SELF_EXPLAINING.value
        view.reader_seat = 0
        assert bots.StallPolicy().decide(view) is None

    def test_decisions_deterministic_across_replayed_observations(self):
        t = simulate([bots.RandomPolicy(9), bots.RandomPolicy(10), bots.RandomPolicy(11)], seed=77)
        # feed seat 0's recorded frames through two fresh policies
        outputs = []
        for _ in range(2):
            policy = bots.RandomPolicy(9)
            view = bots.ClientView(0)
            decisions = []
            for _ms, frame in t.frames[0]:
                view.observe(protocol.decode(frame))
                command = policy.decide(view)
                if command is not None:
                    view.note_sent(command)
                    decisions.append(protocol.encode(command))
            outputs.append(decisions)
        assert outputs[0] == outputs[1]


class TestSocketPath:
    def test_dual_path_same_final_hash(self):
        cobj = corpus_obj(n_targets=4)
        fast = bots.simulate_game(
            [bots.HonestPolicy() for _ in range(3)],
            GameConfig(), make_corpus(4), seed=42,
        )
        with running_server(timer_scale=1.0) as (base_url, _settings):
            _room, log_text, socket_bots = bots.run_socket_game(
                base_url, [bots.HonestPolicy() for _ in range(3)], seed=42, corpus_obj=cobj,
            )
        final = replay_log(log_text)
        assert state_hash(final) == fast.final_hash
        # every socket bot saw the game end
        assert all(b.view.game_over for b in socket_bots)

    def test_socket_contrarians_never_post_past_the_cap(self):
        cobj = corpus_obj(n_targets=3)
        with running_server(timer_scale=1.0) as (base_url, _settings):
            _room, log_text, socket_bots = bots.run_socket_game(
                base_url, [bots.ContrarianPolicy() for _ in range(3)], seed=9, corpus_obj=cobj,
            )
        # Every 4th attempt is rejected; over sockets the attempt may race
        # past the debate's auto-end, in which case the code is ChatClosed.
        rejected = [
            json.loads(f) for b in socket_bots for f in b.frames
            if json.loads(f)["t"] == "chat_rejected"
        ]
        assert rejected
        assert all(r["reason"] in ("ChatLimitReached", "ChatClosed") for r in rejected)
        # the hard invariant: no seat ever has a 4th message posted per debate
        for bot in socket_bots:
            per_debate: dict[int, dict[int, int]] = {}
            debate_index = 0
            for frame in bot.frames:
                obj = json.loads(frame)
                if obj["t"] == "phase_changed" and obj["phase"] == "Debating":
                    debate_index += 1
                elif obj["t"] == "chat_posted":
                    counts = per_debate.setdefault(debate_index, {})
                    counts[obj["seat"]] = counts.get(obj["seat"], 0) + 1
            for counts in per_debate.values():
                assert all(n <= 3 for n in counts.values()), counts
        final = replay_log(log_text)
        assert final.phase == TurnPhase.GAME_OVER

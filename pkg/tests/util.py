"""Shared helpers for the test suite."""

from __future__ import annotations

import json
from typing import Optional

from miboard import engine
from miboard.corpus import TextCorpus, load_corpus
from miboard.events import (
    CastVoteEvent, ReadyEvent, SubmitSelfExplanationEvent, TimerFiredEvent,
)
from miboard.model import GameConfig, GameState, Strategy, TurnPhase


def make_corpus(
    n_targets: int = 5, title: str = "Test text", leading_context: int = 1
) -> TextCorpus:
    sentences = []
    for i in range(leading_context):
        sentences.append({"text": f"Background sentence {i}.", "target": False})
    for i in range(n_targets):
        sentences.append({"text": f"Target sentence {i}.", "target": True})
    return load_corpus(json.dumps({"title": title, "sentences": sentences}))


def corpus_obj(n_targets: int = 5, leading_context: int = 1) -> dict:
    c = make_corpus(n_targets, leading_context=leading_context)
    return c.to_json_obj()


def fresh_game(
    n_players: int = 3,
    n_targets: int = 5,
    seed: int = 1,
    config: Optional[GameConfig] = None,
) -> GameState:
    ids = [f"p{i}" for i in range(n_players)]
    return engine.new_game(config or GameConfig(), ids, make_corpus(n_targets), seed)


def to_voting(state: GameState, se_text: str = "Because of the earlier part.") -> GameState:
    """Drive a StrategyAssigned state to Voting (ack + submission)."""
    assert state.phase == TurnPhase.STRATEGY_ASSIGNED
    reader = state.round.reader_seat
    state, _ = engine.apply_event(state, ReadyEvent(reader))
    state, _ = engine.apply_event(state, SubmitSelfExplanationEvent(reader, se_text))
    return state


def cast_all_votes(
    state: GameState, strategy_for: dict[int, Optional[Strategy]]
) -> tuple[GameState, list]:
    """Cast the given votes in seat order; missing/None seats stay silent
    and the ballot is closed by the vote timer."""
    effects = []
    for seat in sorted(strategy_for):
        vote = strategy_for[seat]
        if vote is None:
            continue
        state, eff = engine.apply_event(state, CastVoteEvent(seat, vote))
        effects += eff
    if state.phase in (TurnPhase.VOTING, TurnPhase.REVOTING):
        state, eff = engine.apply_event(state, TimerFiredEvent("vote"))
        effects += eff
    return state, effects


def other_strategy(strategy: Strategy) -> Strategy:
    from miboard.model import ALL_STRATEGIES

    for s in ALL_STRATEGIES:
        if s != strategy:
            return s
    raise AssertionError


import contextlib
import socket
import tempfile
import threading
import time
from pathlib import Path


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@contextlib.contextmanager
def running_server(timer_scale: float = 1.0, data_dir: Optional[Path] = None):
    """In-process uvicorn server on a free port; yields (base_url, settings)."""
    import uvicorn

    from miboard.server import ServerSettings, create_app

    tmp = Path(tempfile.mkdtemp(prefix="miboard-test-"))
    settings = ServerSettings(
        host="127.0.0.1",
        port=free_port(),
        data_dir=data_dir or tmp / "data",
        corpus_dir=tmp / "corpora",
        timer_scale=timer_scale,
    )
    app = create_app(settings)
    server = uvicorn.Server(
        uvicorn.Config(app, host=settings.host, port=settings.port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    try:
        yield f"http://127.0.0.1:{settings.port}", settings
    finally:
        server.should_exit = True
        thread.join(timeout=5)


def phase_chain(effects: list) -> list[str]:
    """Phases announced by PhaseChanged broadcasts, in effect order."""
    from miboard import protocol
    from miboard.events import Broadcast

    return [
        e.payload.phase
        for e in effects
        if isinstance(e, Broadcast) and isinstance(e.payload, protocol.PhaseChanged)
    ]


_OPEN_WS_SESSIONS: list = []


def close_all_ws_sessions() -> None:
    while _OPEN_WS_SESSIONS:
        client = _OPEN_WS_SESSIONS.pop()
        client.close()


class WsClient:
    """Seat-level driver for a TestClient websocket session."""

    def __init__(self, session):
        self.ws = session
        self.seq = 0
        self.history = []
        self._closed = False
        _OPEN_WS_SESSIONS.append(self)

    def send(self, command):
        import dataclasses

        from miboard import protocol

        self.seq += 1
        command = dataclasses.replace(command, seq=self.seq)
        self.ws.send_text(protocol.encode(command).decode())
        return command

    def send_raw(self, text: str):
        self.ws.send_text(text)

    def recv(self):
        from miboard import protocol

        event = protocol.decode(self.ws.receive_text())
        self.history.append(event)
        return event

    def recv_until(self, predicate, limit: int = 300):
        for _ in range(limit):
            event = self.recv()
            if predicate(event):
                return event
        raise AssertionError(f"no matching event within {limit} frames")

    def recv_phase(self, phase: str):
        from miboard import protocol

        return self.recv_until(
            lambda e: isinstance(e, protocol.PhaseChanged) and e.phase == phase
        )

    def close(self):
        if self._closed:
            return
        self._closed = True
        # __exit__ both closes the socket and joins the app-side task;
        # plain .close() leaves the task running and TestClient teardown
        # then hangs waiting on the portal.
        try:
            self.ws.__exit__(None, None, None)
        except Exception:
            pass
        if self in _OPEN_WS_SESSIONS:
            _OPEN_WS_SESSIONS.remove(self)


def open_room(http, corpus_document: dict, seed: int = 1, config: Optional[dict] = None) -> str:
    body = {"corpus": corpus_document, "corpus_id": "inline", "seed": seed}
    if config:
        body["config"] = config
    response = http.post("/rooms", json=body)
    assert response.status_code == 200, response.text
    return response.json()["room_id"]


def join_room(test_client, room_id: str, name: str, token: Optional[str] = None) -> WsClient:
    from miboard import protocol

    url = f"/ws?room={room_id}"
    if token:
        url += f"&token={token}"
    session = test_client.websocket_connect(url)
    session.__enter__()
    client = WsClient(session)
    if token is None:
        client.send(protocol.JoinRoom(0, room_id, name))
    return client


def seat_and_start(test_client, room_id: str, names: list[str]) -> list[WsClient]:
    """Join everyone, ready up, and wait for round 1 to be announced."""
    from miboard import protocol

    clients = [join_room(test_client, room_id, name) for name in names]
    for client in clients:
        client.recv_until(lambda e: isinstance(e, protocol.RoomStateEvent))
    for client in clients:
        client.send(protocol.Ready(0))
    for client in clients:
        client.recv_phase("StrategyAssigned")
    return clients

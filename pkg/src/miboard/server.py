"""Room-hosting WebSocket + HTTP server.

Surfaces:
    GET  /health              -> 200 "ok"
    POST /rooms {config json} -> {"room_id": ...}
    GET  /rooms/{id}/log      -> the JSON-lines event log
    WS   /ws?room={id}&token={t}

Each room's event stream is strictly serialized behind one asyncio lock;
connection I/O is concurrent. Timers are server-authoritative asyncio
tasks; clients only ever receive deadlines. On startup the server scans
its data directory and resumes any game whose log lacks a final
GameOver state (crash recovery), re-arming the current phase's timer at
full duration.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from . import engine, protocol
from .corpus import TextCorpus, load_corpus
from .errors import BadConfig, MiBoardError, ProtocolError
from .model import GameConfig, TurnPhase, TIMER_DEBATE, TIMER_SELF_EXPLAIN, TIMER_VOTE
from .room import LogWriter, Outcome, RoomCore, make_header, read_log, replay_log, state_from_header

log = logging.getLogger("miboard.server")

ROOM_ID_ALPHABET = "23456789ABCDEFGHJKMNPQRSTUVWXYZ"  # no 0/O, 1/I/l
ROOM_ID_LENGTH = 6

PHASE_TIMERS = {
    TurnPhase.STRATEGY_ASSIGNED: (TIMER_SELF_EXPLAIN, "self_explain_seconds"),
    TurnPhase.SELF_EXPLAINING: (TIMER_SELF_EXPLAIN, "self_explain_seconds"),
    TurnPhase.VOTING: (TIMER_VOTE, "vote_seconds"),
    TurnPhase.REVOTING: (TIMER_VOTE, "vote_seconds"),
    TurnPhase.DEBATING: (TIMER_DEBATE, "debate_seconds"),
}


@dataclass
class ServerSettings:
    port: int = 8000
    host: str = "127.0.0.1"
    data_dir: Path = Path("./miboard-data")
    corpus_dir: Path = Path("./corpora")
    timer_scale: float = 1.0

    @staticmethod
    def from_env(**overrides) -> "ServerSettings":
        settings = ServerSettings(
            port=int(os.environ.get("MIBOARD_PORT", 8000)),
            data_dir=Path(os.environ.get("MIBOARD_DATA", "./miboard-data")),
            corpus_dir=Path(os.environ.get("MIBOARD_CORPUS", "./corpora")),
            timer_scale=float(os.environ.get("MIBOARD_TIME_SCALE", 1.0)),
        )
        for name, value in overrides.items():
            if value is not None:
                setattr(settings, name, value)
        return settings


def _now_ms() -> int:
    import time

    return int(time.time() * 1000)


@dataclass
class LobbySeat:
    name: str
    token: str
    ready: bool = False
    ws: Optional[WebSocket] = None


class LiveRoom:
    def __init__(
        self,
        room_id: str,
        settings: ServerSettings,
        corpus: TextCorpus,
        corpus_id: str,
        config: GameConfig,
        seed: int,
    ):
        self.room_id = room_id
        self.settings = settings
        self.corpus = corpus
        self.corpus_id = corpus_id
        self.config = config
        self.seed = seed
        self.lock = asyncio.Lock()
        # Lobby seats compact on pre-game leave; the list is frozen once
        # the game starts (disconnected players keep their seat).
        self.seats: list[LobbySeat] = []
        self.core: Optional[RoomCore] = None
        self.finished = False
        self.timer_tasks: dict[str, asyncio.Task] = {}
        self.lobby_seq = 0

    # -- paths ----------------------------------------------------------

    @property
    def log_path(self) -> Path:
        return self.settings.data_dir / f"{self.room_id}.jsonl"

    @property
    def meta_path(self) -> Path:
        return self.settings.data_dir / f"{self.room_id}.meta.json"

    def log_text(self) -> str:
        if self.core is not None:
            return "\n".join(self.core.log.lines) + "\n"
        if self.log_path.exists():
            return self.log_path.read_text()
        return ""

    # -- lobby ----------------------------------------------------------

    def running(self) -> bool:
        return self.core is not None and not self.finished

    def seat_of_token(self, token: str) -> Optional[int]:
        for i, seat in enumerate(self.seats):
            if secrets.compare_digest(seat.token, token):
                return i
        return None

    async def join(self, ws: WebSocket, display_name: str) -> LobbySeat:
        from .errors import GameAlreadyStarted, RoomFull

        if self.core is not None:
            raise GameAlreadyStarted("reconnect with your token")
        if len(self.seats) >= 4:
            raise RoomFull("either three or four participants")
        seat = LobbySeat(name=display_name, token=secrets.token_hex(8), ws=ws)
        self.seats.append(seat)
        await self.broadcast_lobby()
        return seat

    def seat_index(self, lobby_seat: LobbySeat) -> Optional[int]:
        for i, seat in enumerate(self.seats):
            if seat is lobby_seat:
                return i
        return None

    async def leave_lobby(self, lobby_seat: LobbySeat) -> None:
        """Pre-game leave: the seat vanishes and later seats shift down,
        so three remaining ready players can still start."""
        if lobby_seat in self.seats:
            self.seats.remove(lobby_seat)
            await self.broadcast_lobby()
            await self.maybe_start()

    def _stamp_lobby(self, event: protocol.ServerEvent) -> protocol.ServerEvent:
        import dataclasses

        self.lobby_seq += 1
        return dataclasses.replace(event, seq=self.lobby_seq)

    def lobby_snapshot(self, for_seat: int) -> dict:
        return {
            "room_id": self.room_id,
            "you": for_seat,
            "phase": TurnPhase.LOBBY.value,
            "round_number": 0,
            "players": [
                {
                    "player_id": s.name,
                    "seat": i,
                    "ready": s.ready,
                    "connected": s.ws is not None,
                    "points": 0,
                    "board_position": 0,
                    "frozen_turns": 0,
                    "hand_count": 0,
                }
                for i, s in enumerate(self.seats)
            ],
            "hand": [],
            "config": self.config.to_json_obj(),
            "round": None,
            "pending_extra_turn_for": None,
            "deadlines": {},
            "token": self.seats[for_seat].token,
        }

    async def broadcast_lobby(self) -> None:
        for i, seat in enumerate(self.seats):
            if seat.ws is not None:
                event = self._stamp_lobby(protocol.RoomStateEvent(self.lobby_snapshot(i)))
                await self._send_ws(seat.ws, event, i)

    async def mark_ready(self, lobby_seat: LobbySeat) -> None:
        lobby_seat.ready = True
        await self.broadcast_lobby()
        await self.maybe_start()

    async def maybe_start(self) -> None:
        if self.core is not None:
            return
        if 3 <= len(self.seats) <= 4 and all(s.ready for s in self.seats):
            await self.start_game()

    async def start_game(self) -> None:
        names: list[str] = []
        for i, seat in enumerate(self.seats):
            name = seat.name if seat.name not in names else f"{seat.name}#{i}"
            names.append(name)
        state = engine.new_game(self.config, names, self.corpus, self.seed)
        header = make_header(self.seed, self.config, self.corpus, names, self.room_id)
        self.settings.data_dir.mkdir(parents=True, exist_ok=True)
        sink = open(self.log_path, "w", encoding="utf-8")
        writer = LogWriter(header, sink=sink)
        self.core = RoomCore(
            state, self.corpus, writer, _now_ms,
            room_id=self.room_id, player_names=names,
            timer_scale=self.settings.timer_scale,
        )
        self.core.server_seq = self.lobby_seq
        self._write_meta(finished=False)
        await self.execute(self.core.start_effects())

    def _write_meta(self, finished: bool) -> None:
        meta = {
            "room_id": self.room_id,
            "corpus_id": self.corpus_id,
            "finished": finished,
            "tokens": {str(i): s.token for i, s in enumerate(self.seats)},
            "names": [s.name for s in self.seats],
        }
        self.meta_path.write_text(json.dumps(meta, indent=2))

    # -- running game ----------------------------------------------------

    async def on_command(self, seat: int, command: protocol.ClientCommand) -> None:
        """Caller must hold self.lock."""
        assert self.core is not None
        if isinstance(command, protocol.Leave):
            await self._connection_change(seat, connected=False)
            return
        outcome = self.core.handle_command(seat, command)
        if not outcome.accepted:
            lobby_seat = self.seats[seat]
            if lobby_seat.ws is not None:
                await self._send_ws(lobby_seat.ws, outcome.error, seat)
            return
        await self.execute(outcome)

    async def _connection_change(self, seat: int, connected: bool) -> None:
        if self.core is None or self.finished:
            return
        outcome = self.core.handle_connection_change(seat, connected)
        if outcome.accepted:
            await self.execute(outcome)

    async def execute(self, outcome: Outcome) -> None:
        assert self.core is not None
        for delivery in outcome.deliveries:
            targets = (
                delivery.seats
                if delivery.seats is not None
                else tuple(range(len(self.seats)))
            )
            for seat in targets:
                if seat >= len(self.seats):
                    continue
                lobby_seat = self.seats[seat]
                if lobby_seat.ws is not None:
                    await self._send_ws(lobby_seat.ws, delivery.event, seat)
        for kind in outcome.timer_cancels:
            task = self.timer_tasks.pop(kind, None)
            if task is not None:
                task.cancel()
        for kind, seconds, gen in outcome.timer_arms:
            old = self.timer_tasks.pop(kind, None)
            if old is not None:
                old.cancel()
            delay = seconds * self.settings.timer_scale
            self.timer_tasks[kind] = asyncio.create_task(self._timer_fire(kind, gen, delay))
        if outcome.game_over is not None:
            await self._finish()

    async def _timer_fire(self, kind: str, gen: int, delay: float) -> None:
        try:
            await asyncio.sleep(delay)
        except asyncio.CancelledError:
            return
        async with self.lock:
            if self.core is None or self.finished:
                return
            outcome = self.core.handle_timer(kind, gen)
            if outcome is not None:
                await self.execute(outcome)

    async def _finish(self) -> None:
        self.finished = True
        for task in self.timer_tasks.values():
            task.cancel()
        self.timer_tasks.clear()
        assert self.core is not None
        self.core.log.close()
        self._write_meta(finished=True)
        for seat in self.seats:
            if seat.ws is not None:
                try:
                    await seat.ws.close(code=1000)
                except Exception:
                    pass
                seat.ws = None

    async def _send_ws(self, ws: WebSocket, event: protocol.ServerEvent, seat: int) -> None:
        try:
            await ws.send_text(protocol.encode(event).decode("utf-8"))
        except Exception:
            if seat < len(self.seats):
                self.seats[seat].ws = None
            await self._connection_change(seat, connected=False)

    # -- reconnect / resume ------------------------------------------------

    async def attach(self, ws: WebSocket, seat: int) -> None:
        lobby_seat = self.seats[seat]
        lobby_seat.ws = ws
        if self.core is not None and not self.finished:
            await self._connection_change(seat, connected=True)
            event = self.core._stamp(
                self.core.snapshot_event(seat, token=lobby_seat.token)
            )
            await self._send_ws(ws, event, seat)
        elif self.core is None:
            await self.broadcast_lobby()
        else:  # finished: hand the final standings over
            snapshot = self.core.build_snapshot(seat, token=lobby_seat.token)
            await self._send_ws(ws, protocol.RoomStateEvent(snapshot), seat)

    @classmethod
    def resume_from_disk(
        cls, settings: ServerSettings, log_path: Path, corpora: dict[str, TextCorpus]
    ) -> Optional["LiveRoom"]:
        room_id = log_path.stem
        meta_path = settings.data_dir / f"{room_id}.meta.json"
        chat_cache: list[dict] = []
        round_tracker = [1]

        def collect_chat(record, state, _effects) -> None:
            from .events import ChatEvent

            if state.round_number != round_tracker[0]:
                chat_cache.clear()
                round_tracker[0] = state.round_number
            if isinstance(record.event, ChatEvent):
                chat_cache.append({"seat": record.event.seat, "text": record.event.text})

        try:
            meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
            text = log_path.read_text()
            state = replay_log(text, on_step=collect_chat)
            header, records = read_log(text)
        except MiBoardError as exc:
            log.warning("cannot resume %s: %s", room_id, exc)
            return None
        _, corpus = state_from_header(header)
        # Drop any torn tail left by a crash mid-append before we start
        # appending again, and make sure the file ends with a newline.
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        kept = 1 + len(records)
        if len(lines) != kept or not text.endswith("\n"):
            lines = lines[:kept]
            log_path.write_text("\n".join(lines) + "\n")
        clean_lines = lines
        room = cls(
            room_id, settings, corpus,
            meta.get("corpus_id", "embedded"),
            GameConfig.from_json_obj(header["config"]),
            header["seed"],
        )
        tokens = meta.get("tokens", {})
        names = header["player_ids"]
        room.seats = [
            LobbySeat(name=names[i], token=tokens.get(str(i), secrets.token_hex(8)), ready=True)
            for i in range(len(names))
        ]
        sink = open(log_path, "a", encoding="utf-8")
        writer = LogWriter(header, sink=sink, existing_lines=clean_lines)
        room.core = RoomCore(
            state, corpus, writer, _now_ms,
            room_id=room_id, player_names=list(names),
            timer_scale=settings.timer_scale,
        )
        room.core.chat_log = chat_cache
        if state.phase == TurnPhase.GAME_OVER or meta.get("finished"):
            room.finished = True
            room.core.log.close()
        return room

    async def rearm_after_resume(self) -> None:
        if self.core is None or self.finished:
            return
        timer = PHASE_TIMERS.get(self.core.state.phase)
        if timer is None:
            return
        kind, attr = timer
        from .events import ArmTimer

        outcome = self.core._execute([ArmTimer(kind, getattr(self.config, attr))])
        await self.execute(outcome)


class RoomManager:
    def __init__(self, settings: ServerSettings):
        self.settings = settings
        self.rooms: dict[str, LiveRoom] = {}
        self.corpora: dict[str, TextCorpus] = {}
        self.load_corpora()

    def load_corpora(self) -> None:
        directory = self.settings.corpus_dir
        if not directory.is_dir():
            return
        for path in sorted(directory.glob("*.json")):
            try:
                self.corpora[path.stem] = load_corpus(path.read_bytes())
            except MiBoardError as exc:
                log.warning("skipping corpus %s: %s", path.name, exc)

    def new_room_id(self) -> str:
        while True:
            room_id = "".join(secrets.choice(ROOM_ID_ALPHABET) for _ in range(ROOM_ID_LENGTH))
            if room_id not in self.rooms:
                return room_id

    def create_room(self, body: dict) -> LiveRoom:
        config_obj = body.get("config") or {}
        config = GameConfig.from_json_obj(config_obj) if config_obj else GameConfig()
        corpus_id = body.get("corpus_id")
        if corpus_id is None:
            if len(self.corpora) == 1:
                corpus_id = next(iter(self.corpora))
            elif "corpus" in body:
                corpus_id = "inline"
            else:
                raise KeyError("corpus_id")
        if corpus_id == "inline":
            corpus = load_corpus(json.dumps(body["corpus"]))
        else:
            if corpus_id not in self.corpora:
                raise KeyError(corpus_id)
            corpus = self.corpora[corpus_id]
        seed = body.get("seed")
        if seed is None:
            seed = secrets.randbits(63)
        if not isinstance(seed, int):
            raise BadConfig("seed must be an integer")
        room = LiveRoom(self.new_room_id(), self.settings, corpus, corpus_id, config, seed)
        self.rooms[room.room_id] = room
        return room

    async def recover(self) -> None:
        directory = self.settings.data_dir
        if not directory.is_dir():
            return
        for log_path in sorted(directory.glob("*.jsonl")):
            if log_path.stem in self.rooms:
                continue
            room = LiveRoom.resume_from_disk(self.settings, log_path, self.corpora)
            if room is not None:
                self.rooms[room.room_id] = room
                if not room.finished:
                    await room.rearm_after_resume()
                    log.info("resumed room %s in %s", room.room_id, room.core.state.phase.value)


def create_app(settings: Optional[ServerSettings] = None) -> FastAPI:
    settings = settings or ServerSettings.from_env()
    manager = RoomManager(settings)

    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        await manager.recover()
        yield

    app = FastAPI(title="miboard", lifespan=lifespan)
    app.state.manager = manager

    @app.get("/health")
    def health() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.post("/rooms")
    async def create_room(body: dict) -> JSONResponse:
        try:
            room = manager.create_room(body or {})
        except KeyError as exc:
            return JSONResponse({"error": "UnknownCorpus", "detail": str(exc)}, status_code=404)
        except MiBoardError as exc:
            return JSONResponse({"error": exc.code, "detail": exc.detail}, status_code=400)
        return JSONResponse({"room_id": room.room_id})

    @app.get("/rooms/{room_id}/log")
    def get_log(room_id: str):
        room = manager.rooms.get(room_id)
        if room is None:
            return JSONResponse({"error": "UnknownRoom"}, status_code=404)
        return PlainTextResponse(room.log_text(), media_type="application/x-ndjson")

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        room_id = websocket.query_params.get("room", "")
        token = websocket.query_params.get("token")
        room = manager.rooms.get(room_id)
        if room is None:
            await websocket.send_text(
                protocol.encode(protocol.ErrorEvent("UnknownRoom", room_id)).decode()
            )
            await websocket.close(code=4004)
            return
        # The connection tracks its LobbySeat *object*: lobby seats can
        # compact when someone leaves pre-game, so indices are resolved
        # at dispatch time.
        my_seat: Optional[LobbySeat] = None
        if token:
            async with room.lock:
                index = room.seat_of_token(token)
                if index is None:
                    await websocket.send_text(
                        protocol.encode(protocol.ErrorEvent("BadToken", "")).decode()
                    )
                    await websocket.close(code=4003)
                    return
                my_seat = room.seats[index]
                await room.attach(websocket, index)

        async def refuse(code: str, detail: str) -> None:
            await websocket.send_text(
                protocol.encode(protocol.ErrorEvent(code, detail)).decode()
            )

        last_seq = 0
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    command = protocol.decode(raw)
                except ProtocolError as exc:
                    await refuse(exc.code, exc.detail)
                    continue
                if not protocol.is_command(command):
                    await refuse("IllegalPayload", "expected a command")
                    continue
                if command.seq <= last_seq:
                    await refuse("IllegalPayload", "seq must increase")
                    continue
                last_seq = command.seq

                async with room.lock:
                    seat = room.seat_index(my_seat) if my_seat is not None else None
                    if isinstance(command, protocol.CreateRoom):
                        await refuse("IllegalPayload", "rooms are created via POST /rooms")
                    elif isinstance(command, protocol.JoinRoom):
                        if my_seat is not None:
                            await refuse("IllegalPayload", "already seated")
                            continue
                        try:
                            my_seat = await room.join(websocket, command.display_name)
                        except MiBoardError as exc:
                            await refuse(exc.code, exc.detail)
                    elif seat is None:
                        await refuse("IllegalPayload", "join first")
                    elif room.running():
                        await room.on_command(seat, command)
                    elif room.finished:
                        await refuse("GameAlreadyOver", "")
                    else:  # lobby
                        if isinstance(command, protocol.Ready):
                            await room.mark_ready(my_seat)
                        elif isinstance(command, protocol.Leave):
                            await room.leave_lobby(my_seat)
                            my_seat = None
                            break
                        else:
                            await refuse("WrongPhase", "game not started")
        except WebSocketDisconnect:
            pass
        except RuntimeError:
            pass  # we closed this socket ourselves (e.g. at game end)
        finally:
            if my_seat is not None and my_seat.ws is websocket:
                async with room.lock:
                    my_seat.ws = None
                    seat = room.seat_index(my_seat)
                    if room.running() and seat is not None:
                        await room._connection_change(seat, connected=False)
                    elif room.core is None:
                        await room.leave_lobby(my_seat)

    return app


def run_server(settings: ServerSettings) -> None:
    import uvicorn

    uvicorn.run(
        create_app(settings), host=settings.host, port=settings.port, log_level="warning"
    )

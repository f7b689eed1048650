"""MiBoard: a deterministic multiplayer self-explanation board game.

Pure rules engine (`engine`), corpus loader (`corpus`), JSON wire
protocol (`protocol`), room driver + event log + replay (`room`),
bot harness (`bots`), WebSocket server (`server`), and CLI (`cli`).
"""

__version__ = "0.1.0"

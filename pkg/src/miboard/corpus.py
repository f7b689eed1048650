"""Reading texts: loading, validation, and target-sentence iteration.

File format: a UTF-8 JSON object
    {"title": str, "sentences": [{"text": str, "target": bool}, ...]}
Sentence indices are implied by array order (an explicit "index" field
is accepted but must match). Segmentation is the author's job; the
loader never splits text.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Union

from .errors import DuplicateIndex, EmptySentence, NoTargetSentences, ParseError
from .model import canonical_json


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    is_target: bool

    def to_json_obj(self) -> dict:
        return {"index": self.index, "text": self.text, "target": self.is_target}


@dataclass(frozen=True)
class TextCorpus:
    title: str
    sentences: tuple[Sentence, ...]
    checksum: str

    def target_indices(self) -> list[int]:
        return [s.index for s in self.sentences if s.is_target]

    def to_json_obj(self) -> dict:
        return {
            "title": self.title,
            "sentences": [s.to_json_obj() for s in self.sentences],
        }


def _compute_checksum(title: str, sentences: list[Sentence]) -> str:
    body = canonical_json({
        "title": title,
        "sentences": [s.to_json_obj() for s in sentences],
    })
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def load_corpus(source: Union[bytes, str]) -> TextCorpus:
    """Parse and validate a corpus document; all-or-nothing."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from exc
    try:
        obj = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError("top level: expected a JSON object")
    title = obj.get("title")
    if not isinstance(title, str) or not title.strip():
        raise ParseError("title: expected a non-empty string")
    raw = obj.get("sentences")
    if not isinstance(raw, list) or not raw:
        raise ParseError("sentences: expected a non-empty array")

    sentences: list[Sentence] = []
    seen_indices: set[int] = set()
    for i, entry in enumerate(raw):
        where = f"sentences[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected an object")
        text = entry.get("text")
        if not isinstance(text, str):
            raise ParseError(f"{where}.text: expected a string")
        if not text.strip():
            raise EmptySentence(f"{where}.text: empty or whitespace-only")
        target = entry.get("target", False)
        if not isinstance(target, bool):
            raise ParseError(f"{where}.target: expected a boolean")
        index = entry.get("index", i)
        if not isinstance(index, int) or isinstance(index, bool):
            raise ParseError(f"{where}.index: expected an integer")
        if index in seen_indices:
            raise DuplicateIndex(f"{where}.index: {index} appears twice")
        if index != i:
            raise ParseError(f"{where}.index: expected {i} (contiguous from 0), got {index}")
        seen_indices.add(index)
        sentences.append(Sentence(index, text, target))

    if not any(s.is_target for s in sentences):
        raise NoTargetSentences("no sentence is flagged as a self-explanation target")
    return TextCorpus(title, tuple(sentences), _compute_checksum(title, sentences))


def corpus_from_json_obj(obj: dict) -> TextCorpus:
    """Rebuild a corpus embedded in a log header (re-deriving the checksum)."""
    return load_corpus(json.dumps(obj))


@dataclass(frozen=True)
class TargetView:
    sentence: Sentence
    context: tuple[Sentence, ...]  # every sentence before the target


def target_cursor(corpus: TextCorpus, position: int) -> Optional[TargetView]:
    """The position-th target sentence with its reading context, or None
    once the corpus is exhausted."""
    if position < 0:
        raise ValueError("position must be >= 0")
    targets = [s for s in corpus.sentences if s.is_target]
    if position >= len(targets):
        return None
    sentence = targets[position]
    return TargetView(sentence, tuple(corpus.sentences[: sentence.index]))

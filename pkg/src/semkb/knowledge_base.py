"""Shared knowledge base: single-pass construction, nearest-knowledge lookup and persistence."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .metrics import Embedder

Sentence = tuple[str, ...]

# slack for re-verifying the pairwise invariant with a different summation order
_VERIFY_SLACK = 1e-12


class KnowledgeBaseError(ValueError):
    pass


class MalformedKnowledgeBase(KnowledgeBaseError):
    pass


class EmbedderMismatch(KnowledgeBaseError):
    pass


class InvariantViolation(KnowledgeBaseError):
    pass


@dataclass(frozen=True)
class KnowledgeEntry:
    index: int
    sentence: Sentence
    embedding: np.ndarray = field(repr=False, compare=False)

    @property
    def text(self) -> str:
        return " ".join(self.sentence)


@dataclass
class KnowledgeBase:
    embedder: Embedder
    theta: float
    max_size: int | None = None
    entries: list[KnowledgeEntry] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.max_size is not None and self.max_size < 1:
            raise ValueError("max_size must be >= 1")
        self._matrix = np.zeros((0, self.embedder.dimension))
        if self.entries:
            self._matrix = np.stack([e.embedding for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def fingerprint(self) -> str:
        return self.embedder.fingerprint

    @property
    def sentences(self) -> list[Sentence]:
        return [e.sentence for e in self.entries]

    @property
    def embeddings(self) -> np.ndarray:
        return self._matrix

    @property
    def full(self) -> bool:
        return self.max_size is not None and len(self.entries) >= self.max_size

    def similarities(self, sentence: Sequence[str]) -> np.ndarray:
        """Clamped cosine similarity of ``sentence`` to every entry."""
        e = self.embedder.embed(tuple(sentence))
        return np.clip(self._matrix @ e, 0.0, 1.0)

    def try_add(self, sentence: Sequence[str]) -> bool:
        """Admit ``sentence`` unless some entry is more similar than theta."""
        if self.full:
            return False
        sentence = tuple(sentence)
        e = self.embedder.embed(sentence)
        if len(self.entries) and np.any(np.clip(self._matrix @ e, 0.0, 1.0) > self.theta):
            return False
        self.entries.append(KnowledgeEntry(len(self.entries), sentence, e))
        self._matrix = np.vstack([self._matrix, e[None, :]])
        return True

    def index_bits(self) -> int:
        return index_bits(len(self.entries))

    def copy(self) -> "KnowledgeBase":
        return KnowledgeBase(self.embedder, self.theta, self.max_size, list(self.entries))


def index_bits(size: int) -> int:
    return math.ceil(math.log2(max(2, size)))


def build(
    corpus: Iterable[Sequence[str]],
    theta: float,
    max_size: int | None,
    embedder: Embedder,
) -> KnowledgeBase:
    """Single-pass clustering over ``corpus`` in order."""
    kb = KnowledgeBase(embedder, theta, max_size)
    return _extend(kb, corpus)


def _extend(kb: KnowledgeBase, corpus: Iterable[Sequence[str]]) -> KnowledgeBase:
    for s in corpus:
        if kb.full:
            break
        kb.try_add(s)
    return kb


def update(kb: KnowledgeBase, new_corpus: Iterable[Sequence[str]], embedder: Embedder | None = None) -> KnowledgeBase:
    """Run the construction pass starting from ``kb``; existing entries keep their indices.

    Returns a new knowledge base; ``kb`` is left untouched.
    """
    if embedder is not None and embedder.fingerprint != kb.fingerprint:
        raise EmbedderMismatch("embedder mismatch")
    return _extend(kb.copy(), new_corpus)


def find_nearest(kb: KnowledgeBase, sentence: Sequence[str]) -> tuple[KnowledgeEntry, float]:
    """Entry minimising ``1 - similarity``; ties resolve to the lowest index."""
    if not kb.entries:
        raise KnowledgeBaseError("knowledge base empty")
    dist = 1.0 - kb.similarities(sentence)
    j = int(np.argmin(dist))
    return kb.entries[j], float(dist[j])


def nearest_indices(kb: KnowledgeBase, sentences: Iterable[Sequence[str]]) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``find_nearest``: (indices, distances)."""
    if not kb.entries:
        raise KnowledgeBaseError("knowledge base empty")
    idx, dist = [], []
    for s in sentences:
        d = 1.0 - kb.similarities(s)
        j = int(np.argmin(d))
        idx.append(j)
        dist.append(d[j])
    return np.asarray(idx, dtype=np.int64), np.asarray(dist, dtype=np.float64)


def kb_objective(kb: KnowledgeBase, corpus: Sequence[Sequence[str]]) -> float:
    """Mean distance from each corpus sentence to its nearest knowledge."""
    if not corpus:
        raise KnowledgeBaseError("empty corpus")
    _, dist = nearest_indices(kb, corpus)
    return float(np.mean(dist))


def pairwise_max_similarity(kb: KnowledgeBase) -> float:
    if len(kb) < 2:
        return 0.0
    sims = np.clip(kb.embeddings @ kb.embeddings.T, 0.0, 1.0)
    np.fill_diagonal(sims, -np.inf)
    return float(sims.max())


# ---------------------------------------------------------------- persistence


def dumps(kb: KnowledgeBase) -> str:
    lines = [
        f"theta={kb.theta!r}",
        f"max_size={'unlimited' if kb.max_size is None else kb.max_size}",
        f"embedder={kb.fingerprint}",
    ]
    lines += [f"{e.index}\t{e.text}" for e in kb.entries]
    return "\n".join(lines) + "\n"


def save(kb: KnowledgeBase, path: str | Path) -> None:
    Path(path).write_text(dumps(kb), encoding="utf-8")


def loads(text: str, embedder: Embedder) -> KnowledgeBase:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 3:
        raise MalformedKnowledgeBase("malformed knowledge base: missing header")
    header = {}
    for line in lines[:3]:
        key, sep, value = line.partition("=")
        if not sep:
            raise MalformedKnowledgeBase(f"malformed knowledge base: bad header line {line!r}")
        header[key] = value
    try:
        theta = float(header["theta"])
        raw_max = header["max_size"]
        max_size = None if raw_max == "unlimited" else int(raw_max)
        fingerprint = header["embedder"]
    except (KeyError, ValueError) as exc:
        raise MalformedKnowledgeBase("malformed knowledge base: bad header") from exc
    if fingerprint != embedder.fingerprint:
        raise EmbedderMismatch("embedder mismatch")

    kb = KnowledgeBase(embedder, theta, max_size)
    seen = set()
    for lineno, line in enumerate(lines[3:], start=4):
        idx_s, sep, text = line.partition("\t")
        if not sep or not text:
            raise MalformedKnowledgeBase(f"malformed knowledge base: line {lineno}")
        try:
            idx = int(idx_s)
        except ValueError:
            raise MalformedKnowledgeBase(f"malformed knowledge base: line {lineno}") from None
        if idx in seen or idx != len(kb.entries):
            raise MalformedKnowledgeBase(f"malformed knowledge base: duplicate or out-of-order index {idx}")
        seen.add(idx)
        sentence = tuple(text.split(" "))
        kb.entries.append(KnowledgeEntry(idx, sentence, embedder.embed(sentence)))
    if kb.entries:
        kb._matrix = np.stack([e.embedding for e in kb.entries])
    if max_size is not None and len(kb) > max_size:
        raise InvariantViolation("knowledge base exceeds its max_size")
    if pairwise_max_similarity(kb) > theta + _VERIFY_SLACK:
        raise InvariantViolation("pairwise similarity exceeds theta")
    return kb


def load(path: str | Path, embedder: Embedder) -> KnowledgeBase:
    return loads(Path(path).read_text(encoding="utf-8"), embedder)

"""Sentence fidelity metrics: BLEU and embedding cosine similarity."""
from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV64_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 18)
def _fnv_str(s: str) -> int:
    return fnv1a_64(s.encode("utf-8"))


# ---------------------------------------------------------------- BLEU


@dataclass(frozen=True)
class BleuWeights:
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) < 1:
            raise ValueError("at least one n-gram order is required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    @property
    def order(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, n: int) -> "BleuWeights":
        return cls(tuple([1.0 / n] * n))

    @classmethod
    def single(cls, n: int) -> "BleuWeights":
        """All weight on the n-gram precision alone (the usual "BLEU n-gram" curve)."""
        return cls(tuple(1.0 if i == n - 1 else 0.0 for i in range(n)))


def _ngrams(seq: Sequence, n: int) -> Counter:
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


@dataclass(frozen=True)
class NgramPrecision:
    value: float
    matches: int
    total: int
    degenerate: bool = False


def clipped_ngram_counts(reference: Sequence, candidate: Sequence, n: int) -> tuple[int, int]:
    """(clipped matches, candidate n-gram count) for order ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    matches = sum(min(c, ref[g]) for g, c in cand.items())
    return matches, sum(cand.values())


def ngram_precision_detail(reference: Sequence, candidate: Sequence, n: int) -> NgramPrecision:
    matches, total = clipped_ngram_counts(reference, candidate, n)
    if total == 0:
        return NgramPrecision(0.0, 0, 0, degenerate=True)
    return NgramPrecision(matches / total, matches, total)


def ngram_precision(reference: Sequence, candidate: Sequence, n: int) -> float:
    return ngram_precision_detail(reference, candidate, n).value


def bleu(
    reference: Sequence,
    candidate: Sequence,
    weights: BleuWeights | Sequence[float] = BleuWeights((0.25, 0.25, 0.25, 0.25)),
    *,
    smoothing: bool = False,
    standard_brevity: bool = False,
) -> float:
    """Sentence BLEU.

    The brevity factor defaults to ``min(1, exp(1 - len(cand)/len(ref)))``,
    which penalises candidates longer than the reference. ``standard_brevity``
    switches to the usual ``min(1, exp(1 - len(ref)/len(cand)))``. A zero
    precision at any order with positive weight yields 0 unless add-one
    ``smoothing`` is requested.
    """
    if not isinstance(weights, BleuWeights):
        weights = BleuWeights(tuple(weights))
    if len(reference) == 0 or len(candidate) == 0:
        raise ValueError("empty sentence")
    ratio = len(reference) / len(candidate) if standard_brevity else len(candidate) / len(reference)
    brevity = min(1.0, math.exp(1.0 - ratio))
    log_sum = 0.0
    for n, w in enumerate(weights.weights, start=1):
        if w == 0:
            continue
        matches, total = clipped_ngram_counts(reference, candidate, n)
        if smoothing:
            p = (matches + 1) / (total + 1)
        elif total == 0 or matches == 0:
            return 0.0
        else:
            p = matches / total
        log_sum += w * math.log(p)
    return min(1.0, brevity * math.exp(log_sum))


# ---------------------------------------------------------------- embedders


class EmbeddingNotFound(KeyError):
    pass


def _sentence_text(sentence) -> str:
    if isinstance(sentence, str):
        return sentence
    return " ".join(str(t) for t in sentence)


@dataclass(frozen=True)
class HashedEmbedder:
    """Hashed bag of word unigrams and character trigrams, L2-normalised.

    Sentences may be given as strings or token sequences (tokens are joined
    with single spaces). Token ids work too but then similarity reflects
    id strings, so prefer passing words.
    """

    dimension: int = 256
    kind: str = field(default="hashed", init=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")

    def raw_counts(self, sentence) -> np.ndarray:
        text = _sentence_text(sentence)
        vec = np.zeros(self.dimension, dtype=np.float64)
        for word in text.split(" "):
            if word:
                vec[_fnv_str(word) % self.dimension] += 1.0
        for i in range(len(text) - 2):
            vec[_fnv_str(text[i : i + 3]) % self.dimension] += 1.0
        return vec

    def embed(self, sentence) -> np.ndarray:
        if len(_sentence_text(sentence).strip()) == 0:
            raise ValueError("empty sentence")
        vec = self.raw_counts(sentence)
        return vec / np.linalg.norm(vec)

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(f"hashed-fnv1a64-w1c3;dim={self.dimension}".encode()).hexdigest()[:16]


class TableEmbedder:
    """Embeddings looked up from a precomputed table (e.g. sentence-transformer output)."""

    kind = "table"

    def __init__(self, table: Mapping[str, Sequence[float]]):
        if not table:
            raise ValueError("empty embedding table")
        dims = {len(v) for v in table.values()}
        if len(dims) != 1:
            raise ValueError("inconsistent embedding dimensions")
        self.dimension = dims.pop()
        self._table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}
        for k, v in self._table.items():
            if not np.all(np.isfinite(v)):
                raise ValueError(f"non-finite embedding for {k!r}")
        digest = hashlib.sha256()
        for k in sorted(self._table):
            digest.update(k.encode("utf-8"))
            digest.update(self._table[k].tobytes())
        self._fingerprint = digest.hexdigest()[:16]

    @classmethod
    def load(cls, path: str | Path) -> "TableEmbedder":
        table = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    text, values = line.split("\t")
                    table[text] = [float(v) for v in values.split(",")]
                except ValueError as exc:
                    raise ValueError(f"malformed embedding table line {lineno}") from exc
        return cls(table)

    def embed(self, sentence) -> np.ndarray:
        text = _sentence_text(sentence)
        try:
            vec = self._table[text]
        except KeyError:
            raise EmbeddingNotFound(f"embedding not found: {text!r}") from None
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    @property
    def fingerprint(self) -> str:
        return self._fingerprint


Embedder = HashedEmbedder | TableEmbedder


def embed(embedder: Embedder, sentence) -> np.ndarray:
    return embedder.embed(sentence)


def cosine_to_score(cos: float) -> float:
    return min(1.0, max(0.0, float(cos)))


def similarity_score(embedder: Embedder, a, b) -> float:
    """Cosine of the two sentence embeddings, clamped to [0, 1]."""
    ea, eb = embedder.embed(a), embedder.embed(b)
    return cosine_to_score(float(np.dot(ea, eb)))

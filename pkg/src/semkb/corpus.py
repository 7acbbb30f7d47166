"""Corpus loading, tokenization, filtering, splitting and the vocabulary."""
from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

UNK = "<unk>"
PAD = "<pad>"
UNK_ID = 0
PAD_ID = 1

PUNCTUATION = frozenset(".,!?;:'\"()-")
_TOKEN_RE = re.compile(r"[.,!?;:'\"()\-]|[^\s.,!?;:'\"()\-]+")

TokenSequence = tuple[int, ...]


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into words and standalone punctuation marks.

    >>> tokenize("Hello, world!")
    ['hello', ',', 'world', '!']
    """
    return _TOKEN_RE.findall(text.lower())


def detokenize(words: Iterable[str]) -> str:
    return " ".join(words)


def word_count(words: Sequence[str]) -> int:
    """Number of tokens that are not punctuation marks."""
    return sum(1 for w in words if w not in PUNCTUATION)


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.tokens) < 2 or self.tokens[UNK_ID] != UNK or self.tokens[PAD_ID] != PAD:
            raise ValueError("vocabulary must start with the unknown and padding markers")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def lookup(self, word: str) -> int:
        return self._index.get(word, UNK_ID)

    def word(self, index: int) -> str:
        return self.tokens[index]

    def encode(self, words: Iterable[str]) -> TokenSequence:
        return tuple(self.lookup(w) for w in words)

    def decode(self, ids: Iterable[int], strip_pad: bool = True) -> list[str]:
        return [self.tokens[i] for i in ids if not (strip_pad and i == PAD_ID)]

    def text(self, ids: Iterable[int]) -> str:
        return detokenize(self.decode(ids))

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(tuple(lines))


def build_vocabulary(sentences: Iterable[Sequence[str]], max_size: int) -> Vocabulary:
    """Keep the ``max_size - 2`` most frequent words; ties go to the lexicographically smaller word."""
    if max_size < 2:
        raise ValueError("max_size must be at least 2")
    counts = Counter(w for s in sentences for w in s)
    if not counts:
        raise ValueError("empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    words = [w for w, _ in ranked if w not in (UNK, PAD)][: max_size - 2]
    return Vocabulary((UNK, PAD, *words))


def read_sentences(path: str | Path, min_len: int = 5, max_len: int = 20) -> list[list[str]]:
    """Tokenized lines of ``path`` whose word count lies in ``[min_len, max_len]``, in file order."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            words = tokenize(line)
            if min_len <= word_count(words) <= max_len:
                out.append(words)
    return out


def load_and_filter(
    path: str | Path,
    vocab: Vocabulary | None = None,
    min_len: int = 5,
    max_len: int = 20,
    max_vocab: int = 1000,
) -> tuple[list[TokenSequence], Vocabulary]:
    """Load a one-sentence-per-line corpus, drop sentences outside the length window and encode.

    When ``vocab`` is None a vocabulary of at most ``max_vocab`` entries is
    built from the retained sentences.
    """
    sentences = read_sentences(path, min_len, max_len)
    if vocab is None:
        vocab = build_vocabulary(sentences, max_vocab)
    return [vocab.encode(s) for s in sentences], vocab


@dataclass(frozen=True)
class CorpusSplit:
    train: list[TokenSequence]
    validation: list[TokenSequence]
    test: list[TokenSequence]
    split_seed: int
    train_idx: tuple[int, ...] = ()
    validation_idx: tuple[int, ...] = ()
    test_idx: tuple[int, ...] = ()


def split_indices(n: int, seed: int) -> tuple[list[int], list[int], list[int]]:
    if n < 10:
        raise ValueError("corpus too small to split")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_train = round(0.8 * n)
    n_val = round(0.1 * n)
    return order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :]


def split(corpus: Sequence[TokenSequence], seed: int) -> CorpusSplit:
    """Seeded shuffle followed by an 8:1:1 train/validation/test partition."""
    tr, va, te = split_indices(len(corpus), seed)
    return CorpusSplit(
        train=[corpus[i] for i in tr],
        validation=[corpus[i] for i in va],
        test=[corpus[i] for i in te],
        split_seed=seed,
        train_idx=tuple(tr),
        validation_idx=tuple(va),
        test_idx=tuple(te),
    )


def pad_batch(seqs: Sequence[Sequence[int]], length: int | None = None) -> list[list[int]]:
    """Right-pad sequences with the padding marker to a common length."""
    length = max(len(s) for s in seqs) if length is None else length
    return [list(s) + [PAD_ID] * (length - len(s)) for s in seqs]

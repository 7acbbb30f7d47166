"""Character source codes: the fixed 6-bit code and canonical Huffman."""
from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

ALPHABET = (
    "abcdefghijklmnopqrstuvwxyz"
    "0123456789"
    " "
    ".,!?;:'\"()-_/\\@#$%&*+=<>[]~"
)
assert len(ALPHABET) == 64 and len(set(ALPHABET)) == 64

CHAR_INDEX = {c: i for i, c in enumerate(ALPHABET)}


class CorruptBitstream(ValueError):
    pass


def to_alphabet(text: str) -> tuple[str, int]:
    """Lowercase ``text`` and replace characters outside the alphabet by spaces.

    Returns the mapped text and the number of replacements.
    """
    out, unknown = [], 0
    for c in text.lower():
        if c in CHAR_INDEX:
            out.append(c)
        else:
            out.append(" ")
            unknown += 1
    return "".join(out), unknown


def bits_from_int(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def fixed6_encode(text: str) -> np.ndarray:
    mapped, _ = to_alphabet(text)
    bits = np.zeros(6 * len(mapped), dtype=np.uint8)
    for i, c in enumerate(mapped):
        bits[6 * i : 6 * i + 6] = bits_from_int(CHAR_INDEX[c], 6)
    return bits


def fixed6_decode(bits) -> str:
    b = np.asarray(bits, dtype=np.int64)
    if b.size % 6:
        raise ValueError("bit count is not a multiple of 6")
    idx = b.reshape(-1, 6) @ (1 << np.arange(5, -1, -1))
    return "".join(ALPHABET[i] for i in idx)


# ---------------------------------------------------------------- Huffman


@dataclass(frozen=True)
class HuffmanCode:
    codes: dict[str, str]

    def __post_init__(self):
        object.__setattr__(self, "_decode", {v: k for k, v in self.codes.items()})
        object.__setattr__(self, "_max_len", max(len(v) for v in self.codes.values()))

    @property
    def lengths(self) -> dict[str, int]:
        return {s: len(c) for s, c in self.codes.items()}

    def expected_length(self, probabilities: Mapping[str, float]) -> float:
        total = sum(probabilities.values())
        return math.fsum(p / total * len(self.codes[s]) for s, p in probabilities.items() if p > 0)

    def dumps(self) -> str:
        return "".join(f"{s}\t{c}\n" for s, c in sorted(self.codes.items(), key=lambda kv: (len(kv[1]), kv[1])))

    @classmethod
    def loads(cls, text: str) -> "HuffmanCode":
        codes = {}
        for line in text.split("\n"):
            if line:
                sym, code = line.rsplit("\t", 1)
                codes[sym] = code
        return cls(codes)


def huffman_lengths(freqs: Mapping[str, float]) -> dict[str, int]:
    """Code lengths from the Huffman merge; equal weights are popped in symbol order."""
    items = sorted((s, f) for s, f in freqs.items() if f > 0)
    if not items:
        raise ValueError("no symbol with positive frequency")
    if len(items) == 1:
        return {items[0][0]: 1}
    heap = [(f, i, (s,)) for i, (s, f) in enumerate(items)]
    heapq.heapify(heap)
    depth = Counter()
    counter = len(heap)
    while len(heap) > 1:
        f1, _, a = heapq.heappop(heap)
        f2, _, b = heapq.heappop(heap)
        for s in a + b:
            depth[s] += 1
        heapq.heappush(heap, (f1 + f2, counter, a + b))
        counter += 1
    return dict(depth)


def canonical_codes(lengths: Mapping[str, int]) -> dict[str, str]:
    codes, code, prev_len = {}, 0, 0
    for sym, length in sorted(lengths.items(), key=lambda kv: (kv[1], kv[0])):
        code <<= length - prev_len
        codes[sym] = format(code, f"0{length}b")
        code += 1
        prev_len = length
    return codes


def huffman_build(freqs: Mapping[str, float]) -> HuffmanCode:
    return HuffmanCode(canonical_codes(huffman_lengths(freqs)))


def char_frequencies(texts: Iterable[str], pseudocount: float = 0.0) -> dict[str, float]:
    """Character counts of ``texts`` after alphabet mapping, plus a pseudocount for every alphabet character."""
    counts = Counter()
    for t in texts:
        counts.update(to_alphabet(t)[0])
    return {c: counts.get(c, 0) + pseudocount for c in ALPHABET if counts.get(c, 0) + pseudocount > 0}


def huffman_encode(text: str, code: HuffmanCode) -> np.ndarray:
    mapped, _ = to_alphabet(text)
    try:
        s = "".join(code.codes[c] for c in mapped)
    except KeyError as exc:
        raise ValueError(f"character {exc.args[0]!r} has no Huffman codeword") from None
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def huffman_decode(bits, code: HuffmanCode, strict: bool = True) -> tuple[str, bool]:
    """Decode ``bits``; returns (text, ok).

    With ``strict`` a bitstream that does not end on a codeword boundary
    raises; otherwise the decodable prefix is returned with ``ok=False``.
    """
    table = code._decode
    out, cur = [], ""
    for b in np.asarray(bits, dtype=np.uint8):
        cur += "1" if b else "0"
        sym = table.get(cur)
        if sym is not None:
            out.append(sym)
            cur = ""
        elif len(cur) >= code._max_len:
            if strict:
                raise CorruptBitstream("corrupt bitstream")
            return "".join(out), False
    if cur:
        if strict:
            raise CorruptBitstream("corrupt bitstream")
        return "".join(out), False
    return "".join(out), True


def shannon_entropy(freqs: Mapping[str, float]) -> float:
    total = sum(freqs.values())
    return -math.fsum(f / total * math.log2(f / total) for f in freqs.values() if f > 0)

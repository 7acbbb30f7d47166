"""Separate source/channel coding baseline: text -> bits -> code -> 64-QAM -> channel -> back."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import channel as ch
from . import qam
from .ldpc import LdpcCode
from .reed_solomon import rs_decode_bits, rs_encode_bits
from .source_codes import HuffmanCode, fixed6_decode, fixed6_encode, huffman_decode, huffman_encode

SOURCE_CODES = ("huffman", "fixed6")
CHANNEL_CODES = ("rs", "ldpc", "none")


@dataclass(frozen=True)
class PipelineResult:
    text: str
    symbols: int
    source_ok: bool = True
    erased: bool = False
    channel_failures: int = 0


@dataclass
class ClassicalPipeline:
    source_code: str
    channel_code: str
    huffman: HuffmanCode | None = None
    ldpc: LdpcCode | None = None

    def __post_init__(self):
        if self.source_code not in SOURCE_CODES:
            raise ValueError(f"unknown source code {self.source_code!r}")
        if self.channel_code not in CHANNEL_CODES:
            raise ValueError(f"unknown channel code {self.channel_code!r}")
        if self.source_code == "huffman" and self.huffman is None:
            raise ValueError("huffman source code requires a code table")
        if self.channel_code == "ldpc" and self.ldpc is None:
            raise ValueError("ldpc channel code requires a parity-check matrix")

    @property
    def name(self) -> str:
        return f"{self.source_code}+{self.channel_code}"

    # -- stages -----------------------------------------------------------

    def source_encode(self, text: str) -> np.ndarray:
        return huffman_encode(text, self.huffman) if self.source_code == "huffman" else fixed6_encode(text)

    def source_decode(self, bits) -> tuple[str, bool]:
        if self.source_code == "huffman":
            return huffman_decode(bits, self.huffman, strict=False)
        usable = (len(bits) // 6) * 6
        return fixed6_decode(bits[:usable]), usable == len(bits)

    def channel_encode(self, bits: np.ndarray) -> tuple[np.ndarray, int]:
        if self.channel_code == "rs":
            return rs_encode_bits(bits)
        if self.channel_code == "ldpc":
            k = self.ldpc.k
            pad = (-bits.size) % k
            b = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)]).reshape(-1, k)
            return np.concatenate([self.ldpc.encode(u) for u in b]) if b.size else b.reshape(-1), pad
        return bits, 0

    def symbol_count(self, text: str) -> int:
        coded, _ = self.channel_encode(self.source_encode(text))
        return math.ceil(coded.size / qam.BITS_PER_SYMBOL)

    # -- end to end -------------------------------------------------------

    def transmit(self, text: str, config: ch.ChannelConfig, rng: np.random.Generator) -> PipelineResult:
        src = self.source_encode(text)
        coded, cpad = self.channel_encode(src)
        symbols, qpad = qam.qam64_modulate(coded)
        y, real = ch.transmit(symbols, config, rng, check_power=False)
        try:
            x_hat = ch.equalize(y, real)
        except ch.DeepFade:
            return PipelineResult("", symbols.size, source_ok=False, erased=True)
        failures = 0
        if self.channel_code == "ldpc":
            var = ch.effective_noise_variance(config, real)
            if np.ndim(var) == 0:
                var = np.full(x_hat.size, float(var))
            # noiseless channels still need finite, decisive LLRs
            var = np.maximum(var, 1e-9)
            llr = qam.qam64_llr(x_hat, var, qpad)
            blocks = []
            n = self.ldpc.n
            for i in range(0, llr.size, n):
                c, ok, _ = self.ldpc.decode(llr[i : i + n])
                failures += not ok
                blocks.append(self.ldpc.extract(c))
            bits = np.concatenate(blocks) if blocks else np.zeros(0, dtype=np.uint8)
            if cpad:
                bits = bits[:-cpad]
        else:
            hard = qam.qam64_demodulate(x_hat, qpad)
            if self.channel_code == "rs":
                bits, _, failures = rs_decode_bits(hard, cpad)
            else:
                bits = hard
        text_hat, ok = self.source_decode(bits)
        return PipelineResult(text_hat, symbols.size, source_ok=ok, channel_failures=failures)


def classical_pipeline(
    sentence: str,
    source_code: str,
    channel_code: str,
    channel_config: ch.ChannelConfig,
    rng: np.random.Generator,
    huffman: HuffmanCode | None = None,
    ldpc: LdpcCode | None = None,
) -> tuple[str, int]:
    """One-shot convenience wrapper returning (decoded sentence, complex symbol count)."""
    res = ClassicalPipeline(source_code, channel_code, huffman, ldpc).transmit(sentence, channel_config, rng)
    return res.text, res.symbols

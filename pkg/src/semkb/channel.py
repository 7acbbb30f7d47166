"""Complex-baseband channel: power normalisation, AWGN/Rayleigh/Rician fading, zero-forcing equalisation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

KINDS = ("awgn", "rayleigh", "rician")
DEEP_FADE = 1e-12


class DeepFade(ArithmeticError):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    kind: str = "awgn"
    snr_db: float = 10.0
    rician_k_db: float = 10.0
    seed: int = 0
    per_symbol_fading: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @property
    def rician_k(self) -> float:
        return 10.0 ** (self.rician_k_db / 10.0)

    @property
    def noise_variance(self) -> float:
        """Total complex noise variance; zero for an infinite SNR."""
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0)

    def with_snr(self, snr_db: float) -> "ChannelConfig":
        return ChannelConfig(self.kind, snr_db, self.rician_k_db, self.seed, self.per_symbol_fading)


@dataclass(frozen=True)
class ChannelRealization:
    gain: complex | np.ndarray
    noise: np.ndarray


def power_normalize(block: np.ndarray) -> np.ndarray:
    x = np.asarray(block, dtype=np.complex128)
    power = np.mean(np.abs(x) ** 2) if x.size else 0.0
    if power == 0:
        raise ValueError("zero-power block")
    return x / math.sqrt(power)


def draw_gains(config: ChannelConfig, rng: np.random.Generator, size=None):
    if config.kind == "awgn":
        return 1.0 + 0.0j if size is None else np.ones(size, dtype=np.complex128)
    scatter = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    if config.kind == "rayleigh":
        return scatter * math.sqrt(0.5)
    k = config.rician_k
    return math.sqrt(k / (k + 1.0)) + scatter * math.sqrt(0.5 / (k + 1.0))


def sample_gain(config: ChannelConfig, rng: np.random.Generator) -> complex:
    """One channel gain with unit second moment."""
    return complex(draw_gains(config, rng))


def complex_noise(n: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def transmit(block: np.ndarray, config: ChannelConfig, rng: np.random.Generator, check_power: bool = True):
    """``y = h x + n`` with one gain per block (or per symbol if configured).

    Returns (received, realization).
    """
    x = np.asarray(block, dtype=np.complex128)
    if check_power and x.size and abs(np.mean(np.abs(x) ** 2) - 1.0) > 1e-6:
        warnings.warn("transmitting a block that is not power-normalised", stacklevel=2)
    if config.per_symbol_fading:
        h = draw_gains(config, rng, x.size)
    else:
        h = sample_gain(config, rng)
    var = config.noise_variance
    n = complex_noise(x.size, var, rng) if var > 0 else np.zeros(x.size, dtype=np.complex128)
    return h * x + n, ChannelRealization(h, n)


def equalize(received: np.ndarray, realization: ChannelRealization) -> np.ndarray:
    """Zero-forcing with perfect channel knowledge."""
    h = realization.gain
    if np.any(np.abs(h) < DEEP_FADE):
        raise DeepFade("channel in deep fade")
    return np.asarray(received, dtype=np.complex128) / h


def effective_noise_variance(config: ChannelConfig, realization: ChannelRealization):
    """Noise variance per symbol after equalisation."""
    return config.noise_variance / np.abs(realization.gain) ** 2


def reals_to_complex(values: np.ndarray) -> np.ndarray:
    """Interleaved (re, im) pairs to complex symbols."""
    v = np.asarray(values, dtype=np.float64).reshape(-1, 2)
    return v[:, 0] + 1j * v[:, 1]


def complex_to_reals(symbols: np.ndarray) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.complex128)
    return np.stack([s.real, s.imag], axis=-1).reshape(-1)

"""Gray-mapped square 64-QAM with unit average energy."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

BITS_PER_SYMBOL = 6
SCALE = 1.0 / math.sqrt(42.0)
# axis level index i (level -7 + 2i) carries the 3-bit Gray label i ^ (i >> 1)
LEVELS = np.arange(-7, 8, 2, dtype=np.float64)
GRAY = np.array([i ^ (i >> 1) for i in range(8)], dtype=np.int64)
LEVEL_OF_LABEL = np.argsort(GRAY)
_AXIS_BITS = np.array([[(GRAY[i] >> (2 - b)) & 1 for b in range(3)] for i in range(8)], dtype=np.uint8)


def constellation() -> np.ndarray:
    """All 64 points indexed by their 6-bit label (3 bits in-phase, then 3 bits quadrature)."""
    labels = np.arange(64)
    i_lvl = LEVELS[LEVEL_OF_LABEL[labels >> 3]]
    q_lvl = LEVELS[LEVEL_OF_LABEL[labels & 7]]
    return (i_lvl + 1j * q_lvl) * SCALE


def pad_bits(bits) -> tuple[np.ndarray, int]:
    b = np.asarray(bits, dtype=np.uint8)
    pad = (-b.size) % BITS_PER_SYMBOL
    return np.concatenate([b, np.zeros(pad, dtype=np.uint8)]), pad


def qam64_modulate(bits) -> tuple[np.ndarray, int]:
    """Map bits to symbols, zero-padding to a multiple of 6. Returns (symbols, pad length)."""
    b, pad = pad_bits(bits)
    groups = b.reshape(-1, 6).astype(np.int64)
    i_label = (groups[:, 0] << 2) | (groups[:, 1] << 1) | groups[:, 2]
    q_label = (groups[:, 3] << 2) | (groups[:, 4] << 1) | groups[:, 5]
    return (LEVELS[LEVEL_OF_LABEL[i_label]] + 1j * LEVELS[LEVEL_OF_LABEL[q_label]]) * SCALE, pad


def _axis_index(v: np.ndarray) -> np.ndarray:
    return np.clip(np.rint((v / SCALE + 7.0) / 2.0), 0, 7).astype(np.int64)


def qam64_demodulate(symbols, pad: int = 0) -> np.ndarray:
    """Hard decision to the nearest constellation point."""
    y = np.asarray(symbols, dtype=np.complex128)
    bits = np.concatenate([_AXIS_BITS[_axis_index(y.real)], _AXIS_BITS[_axis_index(y.imag)]], axis=1).reshape(-1)
    return bits[: bits.size - pad] if pad else bits


def qam64_llr(symbols, noise_variance, pad: int = 0) -> np.ndarray:
    """Max-log bit LLRs (positive favours 0) given the complex noise variance per symbol."""
    y = np.asarray(symbols, dtype=np.complex128)
    var = np.broadcast_to(np.asarray(noise_variance, dtype=np.float64), y.shape)
    out = np.empty((y.size, 6))
    pts = LEVELS * SCALE
    for axis, comp in enumerate((y.real, y.imag)):
        d2 = (comp[:, None] - pts[None, :]) ** 2
        for b in range(3):
            ones = _AXIS_BITS[:, b] == 1
            out[:, 3 * axis + b] = (d2[:, ones].min(axis=1) - d2[:, ~ones].min(axis=1)) / np.maximum(var, 1e-300)
    llr = out.reshape(-1)
    return llr[: llr.size - pad] if pad else llr


def qfunc(x):
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def analytic_ser(es_n0_db: float, order: int = 64) -> float:
    """Exact symbol error rate of Gray square M-QAM over AWGN."""
    g = 10.0 ** (es_n0_db / 10.0)
    p = 2.0 * (1.0 - 1.0 / math.sqrt(order)) * float(qfunc(math.sqrt(3.0 * g / (order - 1))))
    return 1.0 - (1.0 - p) ** 2

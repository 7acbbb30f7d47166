"""Knowledge-assisted attention transceiver.

Shapes use B for batch, T for padded sentence length and E for the
embedding width. Masks are boolean with True marking real (unpadded)
positions.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..corpus import PAD_ID

INTEGRATION_RESIDUALS = ("value", "query", "both")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_dim: int = 128
    attn_dim: int = 128
    n_heads: int = 8
    symbols_per_word: int = 6
    max_len: int = 32
    integration_dense: bool = False
    integration_residual: str = "value"

    def __post_init__(self):
        if self.vocab_size < 2 or self.embed_dim < 1 or self.attn_dim < 1 or self.n_heads < 1:
            raise ValueError("invalid model dimensions")
        if self.symbols_per_word < 1:
            raise ValueError("symbols_per_word must be >= 1")
        if self.integration_residual not in INTEGRATION_RESIDUALS:
            raise ValueError(f"integration_residual must be one of {INTEGRATION_RESIDUALS}")

    @classmethod
    def desk(cls, vocab_size: int, **kw) -> "ModelConfig":
        base = dict(embed_dim=32, attn_dim=32, n_heads=4, symbols_per_word=4)
        base.update(kw)
        return cls(vocab_size=vocab_size, **base)

    @classmethod
    def paper(cls, vocab_size: int, **kw) -> "ModelConfig":
        return cls(vocab_size=vocab_size, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


class LayerNorm(nn.Module):
    """Per-position normalisation to zero mean / unit variance, then gain and bias."""

    def __init__(self, dim: int, eps: float = 1e-6):
        super().__init__()
        self.gain = nn.Parameter(torch.ones(dim))
        self.bias = nn.Parameter(torch.zeros(dim))
        self.eps = eps

    @staticmethod
    def normalize(x: torch.Tensor, eps: float = 1e-6) -> torch.Tensor:
        mu = x.mean(dim=-1, keepdim=True)
        var = ((x - mu) ** 2).mean(dim=-1, keepdim=True)
        return (x - mu) / torch.sqrt(var + eps)

    def forward(self, x):
        return self.normalize(x, self.eps) * self.gain + self.bias


class MultiHeadAttention(nn.Module):
    """``Concat(head_1..head_h) W_o`` with ``head_i = softmax(Q W_Q (K W_K)^T / sqrt(d)) V W_V``."""

    def __init__(self, embed_dim: int, attn_dim: int, n_heads: int):
        super().__init__()
        self.d = attn_dim
        self.h = n_heads
        scale = 1.0 / math.sqrt(embed_dim)
        self.W_Q = nn.Parameter(torch.randn(n_heads, embed_dim, attn_dim) * scale)
        self.W_K = nn.Parameter(torch.randn(n_heads, embed_dim, attn_dim) * scale)
        self.W_V = nn.Parameter(torch.randn(n_heads, embed_dim, attn_dim) * scale)
        self.W_o = nn.Parameter(torch.randn(n_heads * attn_dim, embed_dim) / math.sqrt(n_heads * attn_dim))

    def weights(self, q_in, k_in, key_mask=None):
        """Attention weights, shape (B, h, Lq, Lk)."""
        q = torch.einsum("ble,hed->bhld", q_in, self.W_Q)
        k = torch.einsum("ble,hed->bhld", k_in, self.W_K)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.d)
        if key_mask is not None:
            scores = scores.masked_fill(~key_mask[:, None, None, :], float("-inf"))
        return torch.softmax(scores, dim=-1)

    def forward(self, q_in, k_in, v_in, key_mask=None):
        if q_in.dim() != 3 or k_in.shape != v_in.shape or q_in.shape[-1] != k_in.shape[-1]:
            raise ValueError(f"shape mismatch: Q {tuple(q_in.shape)}, K {tuple(k_in.shape)}, V {tuple(v_in.shape)}")
        if k_in.shape[0] != q_in.shape[0]:
            raise ValueError("batch size mismatch")
        a = self.weights(q_in, k_in, key_mask)
        v = torch.einsum("ble,hed->bhld", v_in, self.W_V)
        z = a @ v  # (B, h, Lq, d)
        z = z.permute(0, 2, 1, 3).reshape(q_in.shape[0], q_in.shape[1], self.h * self.d)
        return z @ self.W_o


class FeedForward(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.fc1 = nn.Linear(dim, 4 * dim)
        self.fc2 = nn.Linear(4 * dim, dim)

    def forward(self, x):
        return self.fc2(F.gelu(self.fc1(x)))


class AttentionBlock(nn.Module):
    """Self-attention, add & norm, dense GELU dense, add & norm."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.attn = MultiHeadAttention(cfg.embed_dim, cfg.attn_dim, cfg.n_heads)
        self.norm1 = LayerNorm(cfg.embed_dim)
        self.ffn = FeedForward(cfg.embed_dim)
        self.norm2 = LayerNorm(cfg.embed_dim)

    def forward(self, x, mask=None):
        x = self.norm1(x + self.attn(x, x, x, mask))
        return self.norm2(x + self.ffn(x))


class IntegrationBlock(nn.Module):
    """Knowledge rows query the message (or received residual) rows.

    The knowledge sequence is aligned position by position with the message,
    so the output keeps the message's row count.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.residual = cfg.integration_residual
        self.attn = MultiHeadAttention(cfg.embed_dim, cfg.attn_dim, cfg.n_heads)
        self.norm = LayerNorm(cfg.embed_dim)
        self.ffn = FeedForward(cfg.embed_dim) if cfg.integration_dense else None
        self.norm2 = LayerNorm(cfg.embed_dim) if cfg.integration_dense else None

    def forward(self, knowledge, values, value_mask=None):
        t = values.shape[1]
        query = align_rows(knowledge, t)
        out = self.attn(query, values, values, value_mask)
        if self.residual in ("value", "both"):
            out = out + values
        if self.residual in ("query", "both"):
            out = out + query
        out = self.norm(out)
        if self.ffn is not None:
            out = self.norm2(out + self.ffn(out))
        return out


def align_rows(x: torch.Tensor, length: int) -> torch.Tensor:
    """Truncate or zero-pad the row axis of (B, L, E) to ``length``."""
    if x.shape[1] >= length:
        return x[:, :length]
    pad = x.new_zeros(x.shape[0], length - x.shape[1], x.shape[2])
    return torch.cat([x, pad], dim=1)


def power_normalize(x: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    """Scale each sentence's symbols to unit mean power; ``x`` is (B, T, M, 2)."""
    p = (x**2).sum(dim=-1)  # (B, T, M)
    if mask is None:
        mean = p.mean(dim=(1, 2))
    else:
        m = mask[:, :, None].to(x.dtype)
        mean = (p * m).sum(dim=(1, 2)) / (m.sum(dim=(1, 2)) * x.shape[2])
        x = x * mask[:, :, None, None].to(x.dtype)
    if torch.any(mean <= 0):
        raise FloatingPointError("zero-power block")
    return x / torch.sqrt(mean)[:, None, None, None]


class Transceiver(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        E, M = cfg.embed_dim, cfg.symbols_per_word
        self.token_embedding = nn.Embedding(cfg.vocab_size, E)
        self.position_embedding = nn.Embedding(cfg.max_len, E)
        self.extract = AttentionBlock(cfg)
        self.integrate_tx = IntegrationBlock(cfg)
        self.channel_encoder = nn.Linear(E, 2 * M)
        self.channel_decoder = nn.Linear(2 * M, E)
        self.integrate_rx = IntegrationBlock(cfg)
        self.recover = AttentionBlock(cfg)
        self.output = nn.Linear(E, cfg.vocab_size)

    # -- stages -----------------------------------------------------------

    def semantic_extract(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.dim() == 1:
            ids = ids[None]
        if ids.numel() and (ids.max() >= self.cfg.vocab_size or ids.min() < 0):
            raise ValueError("token id out of range")
        if ids.shape[1] > self.cfg.max_len:
            raise ValueError(f"sentence longer than max_len={self.cfg.max_len}")
        pos = torch.arange(ids.shape[1], device=ids.device)
        x = self.token_embedding(ids) + self.position_embedding(pos)[None]
        return self.extract(x, ids != PAD_ID)

    def channel_encode(self, r: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
        """(B, T, E) -> unit-power symbols (B, T, M, 2) as (re, im) pairs."""
        B, T, _ = r.shape
        x = self.channel_encoder(r).reshape(B, T, self.cfg.symbols_per_word, 2)
        return power_normalize(x, mask)

    def channel_decode(self, y: torch.Tensor) -> torch.Tensor:
        B, T = y.shape[:2]
        if y.shape[2:] != (self.cfg.symbols_per_word, 2):
            raise ValueError("received block does not hold M complex symbols per word")
        return self.channel_decoder(y.reshape(B, T, 2 * self.cfg.symbols_per_word))

    def recover_logits(self, s_hat: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
        return self.output(self.recover(s_hat, mask))

    def recover_probabilities(self, s_hat, mask=None):
        return torch.softmax(self.recover_logits(s_hat, mask), dim=-1)

    # -- composed ---------------------------------------------------------

    def transmitter(self, msg_ids, kb_ids):
        """Message and knowledge ids (B, T) / (B, Tk) -> (symbols, message mask, knowledge features)."""
        mask = msg_ids != PAD_ID
        s = self.semantic_extract(msg_ids)
        k = self.semantic_extract(kb_ids)
        r = self.integrate_tx(k, s, mask)
        return self.channel_encode(r, mask), mask, k

    def receiver(self, y, k, mask):
        r_hat = self.channel_decode(y)
        s_hat = self.integrate_rx(k, r_hat, mask)
        return self.recover_logits(s_hat, mask)

    def forward(self, msg_ids, kb_ids, channel=None):
        """Logits (B, T, N_vocab); ``channel`` maps unit-power symbols to equalised estimates."""
        x, mask, k = self.transmitter(msg_ids, kb_ids)
        y = x if channel is None else channel(x, mask)
        return self.receiver(y, k, mask)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def cross_entropy_loss(probabilities: torch.Tensor, targets: torch.Tensor, mask: torch.Tensor | None = None):
    """Mean of ``-ln p(target)`` over unpadded positions; probabilities clamped at 1e-12."""
    p = probabilities.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    nll = -torch.log(torch.clamp(p, min=1e-12))
    if mask is None:
        mask = targets != PAD_ID
    m = mask.to(nll.dtype)
    return (nll * m).sum() / m.sum()


def logits_loss(logits: torch.Tensor, targets: torch.Tensor, mask: torch.Tensor | None = None):
    """Same quantity as ``cross_entropy_loss`` computed from logits via log-softmax."""
    logp = torch.log_softmax(logits, dim=-1)
    nll = -logp.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    if mask is None:
        mask = targets != PAD_ID
    m = mask.to(nll.dtype)
    return (nll * m).sum() / m.sum()

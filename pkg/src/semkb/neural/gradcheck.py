"""Central finite-difference oracle for the transceiver's differentiable blocks.

Each case builds a block at 64-bit precision on random small shapes, reduces
its output to a scalar through a fixed random projection (a plain sum would
hide errors in layer-norm, whose outputs sum to a constant), and compares the
autograd gradient of every parameter and float input with central differences.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterator

import torch

from ..corpus import PAD_ID
from .model import (
    AttentionBlock,
    IntegrationBlock,
    LayerNorm,
    ModelConfig,
    MultiHeadAttention,
    Transceiver,
    cross_entropy_loss,
)

STEP = 1e-5
TOLERANCE = 1e-4
DTYPE = torch.float64


@dataclass(frozen=True)
class GradCheckResult:
    name: str
    shape: str
    max_relative_error: float
    checked: int

    @property
    def passed(self) -> bool:
        return self.max_relative_error < TOLERANCE


def central_difference(f: Callable[[], torch.Tensor], t: torch.Tensor, step: float = STEP) -> torch.Tensor:
    """d f / d t elementwise by (f(t + h) - f(t - h)) / 2h, perturbing ``t`` in place."""
    grad = torch.zeros_like(t)
    flat, gflat = t.data.view(-1), grad.view(-1)
    with torch.no_grad():
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + step
            hi = f().item()
            flat[i] = orig - step
            lo = f().item()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * step)
    return grad


def relative_error(analytic: torch.Tensor, numeric: torch.Tensor) -> float:
    scale = max(analytic.norm().item(), numeric.norm().item(), 1e-8)
    return (analytic - numeric).norm().item() / scale


def check(name: str, shape: str, f: Callable[[], torch.Tensor], tensors: list[torch.Tensor],
          step: float = STEP) -> GradCheckResult:
    for t in tensors:
        t.grad = None
    f().backward()
    analytic = [t.grad.detach().clone() if t.grad is not None else torch.zeros_like(t) for t in tensors]
    worst, count = 0.0, 0
    for t, a in zip(tensors, analytic):
        worst = max(worst, relative_error(a, central_difference(f, t, step)))
        count += t.numel()
    return GradCheckResult(name, shape, worst, count)


def _projection(out: torch.Tensor, gen: torch.Generator) -> Callable[[torch.Tensor], torch.Tensor]:
    w = torch.randn(out.shape, generator=gen, dtype=DTYPE)
    return lambda y: (y * w).sum()


def _mask(batch: int, length: int, rnd: random.Random) -> torch.Tensor:
    lengths = [rnd.randint(max(1, length - 2), length) for _ in range(batch)]
    lengths[0] = length
    return torch.tensor([[j < n for j in range(length)] for n in lengths])


def _cfg(rnd: random.Random, vocab: int = 7, **kw) -> ModelConfig:
    return ModelConfig(vocab_size=vocab, embed_dim=rnd.choice([3, 4, 5]), attn_dim=rnd.choice([2, 3]),
                       n_heads=rnd.choice([1, 2]), symbols_per_word=rnd.choice([1, 2, 3]), max_len=8, **kw)


def _params(module: torch.nn.Module) -> list[torch.Tensor]:
    return [p for p in module.parameters()]


def _randn(gen, *shape, scale=1.0):
    return (torch.randn(*shape, generator=gen, dtype=DTYPE) * scale).requires_grad_(True)


def cases(seed: int = 0) -> Iterator[tuple[str, str, Callable[[], torch.Tensor], list[torch.Tensor]]]:
    """An endless stream of (block name, shape description, scalar function, tensors) cases."""
    rnd = random.Random(seed)
    gen = torch.Generator().manual_seed(seed)
    kinds = ("multi_head_attention", "layer_norm", "semantic_extract", "integrate_tx", "integrate_rx",
             "channel_encode", "channel_decode", "recover", "cross_entropy", "transceiver")
    i = 0
    while True:
        kind = kinds[i % len(kinds)]
        i += 1
        torch.manual_seed(rnd.randrange(2**31))
        B, T = rnd.randint(1, 3), rnd.randint(2, 5)
        if kind == "multi_head_attention":
            E, d, h, Tk = rnd.choice([3, 4]), rnd.choice([2, 3]), rnd.choice([1, 2]), rnd.randint(2, 5)
            m = MultiHeadAttention(E, d, h).to(DTYPE)
            q, k, v = _randn(gen, B, T, E), _randn(gen, B, Tk, E), _randn(gen, B, Tk, E)
            mask = _mask(B, Tk, rnd)
            proj = _projection(m(q, k, v, mask), gen)
            yield kind, f"B={B} Lq={T} Lk={Tk} E={E} d={d} h={h}", (lambda m=m, q=q, k=k, v=v, mask=mask, proj=proj: proj(m(q, k, v, mask))), [q, k, v, *_params(m)]
        elif kind == "layer_norm":
            E = rnd.randint(2, 6)
            m = LayerNorm(E).to(DTYPE)
            with torch.no_grad():
                m.gain.normal_(generator=gen)
                m.bias.normal_(generator=gen)
            x = _randn(gen, B, T, E)
            proj = _projection(m(x), gen)
            yield kind, f"B={B} T={T} E={E}", (lambda m=m, x=x, proj=proj: proj(m(x))), [x, *_params(m)]
        elif kind in ("semantic_extract", "recover"):
            cfg = _cfg(rnd)
            m = AttentionBlock(cfg).to(DTYPE)
            x = _randn(gen, B, T, cfg.embed_dim)
            mask = _mask(B, T, rnd)
            if kind == "recover":
                out = Transceiver(cfg).to(DTYPE)
                fn = lambda out=out, x=x, mask=mask: out.recover_probabilities(x, mask)
                params = [*_params(out.recover), *_params(out.output)]
            else:
                fn = lambda m=m, x=x, mask=mask: m(x, mask)
                params = _params(m)
            proj = _projection(fn(), gen)
            yield kind, f"B={B} T={T} E={cfg.embed_dim} d={cfg.attn_dim} h={cfg.n_heads}", (lambda fn=fn, proj=proj: proj(fn())), [x, *params]
        elif kind in ("integrate_tx", "integrate_rx"):
            residual = rnd.choice(["value", "query", "both"])
            cfg = _cfg(rnd, integration_residual=residual, integration_dense=rnd.random() < 0.3)
            m = IntegrationBlock(cfg).to(DTYPE)
            Tk = rnd.randint(1, 6)
            k, s = _randn(gen, B, Tk, cfg.embed_dim), _randn(gen, B, T, cfg.embed_dim)
            mask = _mask(B, T, rnd)
            proj = _projection(m(k, s, mask), gen)
            yield kind, f"B={B} Ls={T} Lk={Tk} E={cfg.embed_dim} residual={residual} dense={cfg.integration_dense}", (lambda m=m, k=k, s=s, mask=mask, proj=proj: proj(m(k, s, mask))), [k, s, *_params(m)]
        elif kind == "channel_encode":
            cfg = _cfg(rnd)
            m = Transceiver(cfg).to(DTYPE)
            r = _randn(gen, B, T, cfg.embed_dim)
            mask = _mask(B, T, rnd)
            proj = _projection(m.channel_encode(r, mask), gen)
            yield kind, f"B={B} T={T} E={cfg.embed_dim} M={cfg.symbols_per_word}", (lambda m=m, r=r, mask=mask, proj=proj: proj(m.channel_encode(r, mask))), [r, *_params(m.channel_encoder)]
        elif kind == "channel_decode":
            cfg = _cfg(rnd)
            m = Transceiver(cfg).to(DTYPE)
            y = _randn(gen, B, T, cfg.symbols_per_word, 2)
            proj = _projection(m.channel_decode(y), gen)
            yield kind, f"B={B} T={T} M={cfg.symbols_per_word} E={cfg.embed_dim}", (lambda m=m, y=y, proj=proj: proj(m.channel_decode(y))), [y, *_params(m.channel_decoder)]
        elif kind == "cross_entropy":
            V = rnd.randint(2, 6)
            logits = _randn(gen, B, T, V)
            targets = torch.randint(0, V, (B, T), generator=gen)
            mask = _mask(B, T, rnd)
            fn = lambda logits=logits, targets=targets, mask=mask: cross_entropy_loss(torch.softmax(logits, -1), targets, mask)
            yield kind, f"B={B} T={T} V={V}", fn, [logits]
        else:
            cfg = _cfg(rnd, vocab=6)
            m = Transceiver(cfg).to(DTYPE)
            msg = torch.randint(2, cfg.vocab_size, (B, T), generator=gen)
            msg[1:, -1] = PAD_ID
            kb = torch.randint(2, cfg.vocab_size, (B, rnd.randint(T, T + 2)), generator=gen)
            noise = torch.randn(B, T, cfg.symbols_per_word, 2, generator=gen, dtype=DTYPE) * 0.3
            chan = lambda x, mask, noise=noise: x + noise
            fn = lambda m=m, msg=msg, kb=kb, chan=chan: cross_entropy_loss(
                torch.softmax(m(msg, kb, chan), -1), msg)
            # a subset of parameters keeps the full-model case fast
            params = [m.integrate_tx.attn.W_Q, m.channel_encoder.weight, m.integrate_rx.attn.W_V,
                      m.recover.norm1.gain, m.output.bias]
            yield kind, f"B={B} T={T} E={cfg.embed_dim} M={cfg.symbols_per_word}", fn, params


def run_suite(n_cases: int = 20, seed: int = 0) -> list[GradCheckResult]:
    out = []
    for n, (name, shape, fn, tensors) in enumerate(cases(seed)):
        if n >= n_cases:
            break
        out.append(check(name, shape, fn, tensors))
    return out


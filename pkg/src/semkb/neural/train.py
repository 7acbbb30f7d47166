"""Joint training of the transceiver with a knowledge base, plus greedy end-to-end transmission."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch

from .. import channel as ch
from .. import knowledge_base as kbm
from ..corpus import PAD_ID, UNK_ID, Vocabulary, pad_batch
from .model import ModelConfig, Transceiver, logits_loss

log = logging.getLogger(__name__)

NULL_KNOWLEDGE = (UNK_ID,)


class TrainingDiverged(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-2
    rho: float = 0.95
    eps: float = 1e-6
    batch_size: int = 256
    epochs: int = 100
    snr_range: tuple[float, float] = (0.0, 10.0)
    val_snr_db: float = 3.0
    eta_min_ratio: float = 1e-4
    seed: int = 0
    dtype: str = "float32"
    max_steps: int | None = None
    stratified_snr: bool = True

    def __post_init__(self):
        lo, hi = self.snr_range
        if not lo <= hi:
            raise ValueError("empty SNR range")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")

    @classmethod
    def desk(cls, **kw) -> "TrainConfig":
        base = dict(lr=1.0, batch_size=32, epochs=20)
        base.update(kw)
        return cls(**base)

    @property
    def torch_dtype(self):
        return {"float32": torch.float32, "float64": torch.float64}[self.dtype]


class TorchChannel:
    """Differentiable ``y = h x + n`` followed by perfect-CSI equalisation.

    One gain per sentence; SNR drawn uniformly per batch from ``snr_range``
    unless ``snr_db`` is fixed. ``kind=None`` disables the channel.
    """

    def __init__(self, kind: str | None, generator: torch.Generator, snr_db: float | None = None,
                 snr_range=(0.0, 10.0), rician_k_db: float = 10.0):
        if kind is not None and kind not in ch.KINDS:
            raise ValueError(f"unknown channel kind {kind!r}")
        self.kind = kind
        self.gen = generator
        self.snr_db = snr_db
        self.snr_range = snr_range
        self.rician_k = 10.0 ** (rician_k_db / 10.0)
        self.last_snr_db = snr_db

    def _randn(self, *shape, dtype):
        return torch.randn(*shape, generator=self.gen, dtype=dtype)

    def gains(self, batch: int, dtype) -> tuple[torch.Tensor, torch.Tensor]:
        if self.kind == "awgn":
            return torch.ones(batch, dtype=dtype), torch.zeros(batch, dtype=dtype)
        while True:
            re = self._randn(batch, dtype=dtype) * math.sqrt(0.5)
            im = self._randn(batch, dtype=dtype) * math.sqrt(0.5)
            if self.kind == "rician":
                s = math.sqrt(1.0 / (self.rician_k + 1.0))
                re = math.sqrt(self.rician_k / (self.rician_k + 1.0)) + re * s
                im = im * s
            # redraw deep fades rather than amplify noise without bound
            if torch.all(re**2 + im**2 >= ch.DEEP_FADE**2):
                return re, im

    def __call__(self, x: torch.Tensor, mask=None) -> torch.Tensor:
        if self.kind is None:
            return x
        if self.snr_db is None:
            lo, hi = self.snr_range
            snr = lo + (hi - lo) * float(torch.rand(1, generator=self.gen, dtype=torch.float64))
        else:
            snr = self.snr_db
        self.last_snr_db = snr
        if math.isinf(snr) and snr > 0:
            return x
        var = 10.0 ** (-snr / 10.0)
        B = x.shape[0]
        hr, hi_ = self.gains(B, x.dtype)
        hr = hr.view(B, *([1] * (x.dim() - 2)))
        hi_ = hi_.view(B, *([1] * (x.dim() - 2)))
        xr, xi = x[..., 0], x[..., 1]
        n = self._randn(*x.shape, dtype=x.dtype) * math.sqrt(var / 2.0)
        yr = hr * xr - hi_ * xi + n[..., 0]
        yi = hr * xi + hi_ * xr + n[..., 1]
        g = hr**2 + hi_**2
        return torch.stack([(yr * hr + yi * hi_) / g, (yi * hr - yr * hi_) / g], dim=-1)


# ---------------------------------------------------------------- data


def encode_words(vocab: Vocabulary, sentences: Sequence[Sequence[str]]) -> list[tuple[int, ...]]:
    return [vocab.encode(s) for s in sentences]


def knowledge_for(kb: kbm.KnowledgeBase | None, sentences: Sequence[Sequence[str]]) -> list[int]:
    """Nearest knowledge index per sentence (-1 when no knowledge base is used)."""
    if kb is None:
        return [-1] * len(sentences)
    idx, _ = kbm.nearest_indices(kb, sentences)
    return idx.tolist()


def make_batch(msgs: Sequence[Sequence[int]], kbs: Sequence[Sequence[int]]):
    t = max(len(m) for m in msgs)
    tk = max(t, max(len(k) for k in kbs))
    return torch.tensor(pad_batch(msgs, t)), torch.tensor(pad_batch(kbs, tk))


@dataclass
class Dataset:
    """Encoded messages with the id sequence of their knowledge."""

    messages: list[tuple[int, ...]]
    knowledge: list[tuple[int, ...]]
    knowledge_index: list[int] = field(default_factory=list)

    @classmethod
    def build(cls, sentences, vocab: Vocabulary, kb: kbm.KnowledgeBase | None, use_knowledge: bool = True):
        msgs = encode_words(vocab, sentences)
        if kb is None or not use_knowledge:
            return cls(msgs, [NULL_KNOWLEDGE] * len(msgs), [-1] * len(msgs))
        kidx = knowledge_for(kb, sentences)
        kb_ids = encode_words(vocab, kb.sentences)
        return cls(msgs, [kb_ids[j] for j in kidx], kidx)

    def __len__(self):
        return len(self.messages)

    def batches(self, batch_size: int, order=None):
        order = range(len(self)) if order is None else order
        order = list(order)
        for i in range(0, len(order), batch_size):
            sel = order[i : i + batch_size]
            yield make_batch([self.messages[j] for j in sel], [self.knowledge[j] for j in sel])


# ---------------------------------------------------------------- training


@dataclass
class TrainResult:
    model: Transceiver
    train_loss: list[float]
    val_loss: list[float]
    step_loss: list[float]

    def loss_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_loss"])
        for e, (tr, va) in enumerate(zip(self.train_loss, self.val_loss), start=1):
            w.writerow([e, repr(tr), "" if va is None else repr(va)])
        return buf.getvalue()


def init_model(cfg: ModelConfig, seed: int, dtype=torch.float32) -> Transceiver:
    torch.manual_seed(seed)
    return Transceiver(cfg).to(dtype)


def cosine_lr(base: float, epoch: int, epochs: int, eta_min_ratio: float) -> float:
    """Cosine annealing from ``base`` (epoch 0) to ``base * eta_min_ratio`` at the final epoch."""
    eta_min = base * eta_min_ratio
    if epochs <= 1:
        return base
    return eta_min + 0.5 * (base - eta_min) * (1.0 + math.cos(math.pi * epoch / (epochs - 1)))


def _state_dump(model: Transceiver, epoch: int, step: int, loss: float) -> str:
    norms = {n: float(p.detach().norm()) for n, p in model.named_parameters()}
    bad = [n for n, p in model.named_parameters() if not torch.all(torch.isfinite(p))]
    return f"non-finite loss {loss} at epoch {epoch} step {step}; non-finite params {bad}; norms {norms}"


def stratified_snrs(n: int, snr_range, gen: torch.Generator) -> list[float]:
    """``n`` SNRs, each marginally uniform on ``snr_range``, one per equal-width stratum in random order.

    Every epoch then sees the whole range evenly, so epoch-mean losses are not
    dominated by how many low-SNR batches an epoch happened to draw.
    """
    lo, hi = snr_range
    u = torch.rand(n, generator=gen, dtype=torch.float64)
    order = torch.randperm(n, generator=gen)
    return [lo + (hi - lo) * (int(order[i]) + float(u[i])) / n for i in range(n)]


def evaluate_loss(model: Transceiver, data: Dataset, channel: TorchChannel, batch_size: int) -> float:
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for msg, kb in data.batches(batch_size):
            logits = model(msg, kb, channel)
            n = int((msg != PAD_ID).sum())
            total += float(logits_loss(logits, msg)) * n
            count += n
    model.train()
    return total / count


def train(
    model: Transceiver,
    train_data: Dataset,
    config: TrainConfig,
    channel_kind: str | None = "awgn",
    val_data: Dataset | None = None,
    rician_k_db: float = 10.0,
) -> TrainResult:
    """Adadelta with per-epoch cosine annealing and per-epoch stratified SNRs; deterministic under ``config.seed``."""
    torch.use_deterministic_algorithms(True)
    dtype = config.torch_dtype
    model.to(dtype)
    opt = torch.optim.Adadelta(model.parameters(), lr=config.lr, rho=config.rho, eps=config.eps)
    gen = torch.Generator().manual_seed(config.seed)
    chan = TorchChannel(channel_kind, gen, snr_range=config.snr_range, rician_k_db=rician_k_db)
    rng = np.random.default_rng(config.seed)
    train_loss, val_loss, step_loss = [], [], []
    step = 0
    model.train()
    for epoch in range(config.epochs):
        for g in opt.param_groups:
            g["lr"] = cosine_lr(config.lr, epoch, config.epochs, config.eta_min_ratio)
        total, count = 0.0, 0
        n_batches = -(-len(train_data) // config.batch_size)
        snrs = stratified_snrs(n_batches, config.snr_range, gen) if config.stratified_snr else None
        for b, (msg, kb) in enumerate(train_data.batches(config.batch_size, rng.permutation(len(train_data)))):
            if snrs is not None:
                chan.snr_db = snrs[b]
            logits = model(msg, kb, chan)
            loss = logits_loss(logits, msg)
            if not torch.isfinite(loss):
                raise TrainingDiverged(_state_dump(model, epoch, step, loss.item()))
            opt.zero_grad()
            loss.backward()
            opt.step()
            n = int((msg != PAD_ID).sum())
            total += loss.item() * n
            count += n
            step_loss.append(loss.item())
            step += 1
            if config.max_steps is not None and step >= config.max_steps:
                break
        train_loss.append(total / count)
        if val_data is not None and len(val_data):
            vgen = torch.Generator().manual_seed(config.seed + 1_000_003 + epoch)
            vchan = TorchChannel(channel_kind, vgen, snr_db=config.val_snr_db, rician_k_db=rician_k_db)
            val_loss.append(evaluate_loss(model, val_data, vchan, config.batch_size))
        else:
            val_loss.append(None)
        log.info("epoch %d train %.4f val %s", epoch + 1, train_loss[-1], val_loss[-1])
        if config.max_steps is not None and step >= config.max_steps:
            break
    model.eval()
    return TrainResult(model, train_loss, val_loss, step_loss)


# ---------------------------------------------------------------- inference


@torch.no_grad()
def transmit_batch(model: Transceiver, msgs, kbs, channel: TorchChannel) -> list[tuple[int, ...]]:
    """Greedy per-position decoding of a batch; each output has its message's length."""
    model.eval()
    msg, kb = make_batch(msgs, kbs)
    logits = model(msg, kb, channel)
    pred = logits.argmax(dim=-1)
    return [tuple(int(t) for t in pred[i, : len(m)]) for i, m in enumerate(msgs)]


def end_to_end_transmit(
    model: Transceiver,
    kb: kbm.KnowledgeBase,
    vocab: Vocabulary,
    sentence: Sequence[str],
    channel_config: ch.ChannelConfig,
    generator: torch.Generator,
) -> tuple[tuple[int, ...], int, int]:
    """Transmit one sentence; returns (decoded ids, complex symbol count, knowledge index)."""
    entry, _ = kbm.find_nearest(kb, sentence)
    msg = vocab.encode(sentence)
    chan = TorchChannel(channel_config.kind, generator, snr_db=channel_config.snr_db,
                        rician_k_db=channel_config.rician_k_db)
    out = transmit_batch(model, [msg], [vocab.encode(entry.sentence)], chan)[0]
    return out, len(msg) * model.cfg.symbols_per_word, entry.index

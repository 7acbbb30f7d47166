"""Experiment drivers: KB building, training, SNR-sweep evaluation, baselines, θ-sweep, entropy report."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .. import channel as ch
from .. import corpus as cp
from .. import knowledge_base as kbm
from .. import semantic_info as si
from ..classical import ClassicalPipeline, HuffmanCode, LdpcCode, char_frequencies, huffman_build, read_alist
from ..metrics import BleuWeights, HashedEmbedder, TableEmbedder, bleu, similarity_score
from ..neural import checkpoint
from ..neural.model import ModelConfig, Transceiver
from ..neural.train import NULL_KNOWLEDGE, Dataset, TorchChannel, TrainConfig, TrainResult, init_model, train, transmit_batch
from .config import ConfigError, ExperimentConfig

log = logging.getLogger(__name__)

CLASSICAL_METHODS = ("huffman+rs", "fixed6+rs", "huffman+ldpc", "fixed6+ldpc", "huffman+none", "fixed6+none")
DEFAULT_BASELINES = CLASSICAL_METHODS[:4]
NEURAL_METHODS = ("neural", "neural-nokb")
EVAL_BATCH = 64
MIN_LEN, MAX_LEN = 5, 20


class ExperimentError(RuntimeError):
    pass


# ---------------------------------------------------------------- data


@dataclass(frozen=True)
class PreparedData:
    vocab: cp.Vocabulary
    sentences: list[list[str]]
    split: cp.CorpusSplit

    def words(self, part: str) -> list[list[str]]:
        idx = getattr(self.split, f"{part}_idx")
        return [self.sentences[i] for i in idx]


def prepare_data(cfg: ExperimentConfig, vocab: cp.Vocabulary | None = None) -> PreparedData:
    if not cfg.corpus:
        raise ExperimentError("missing corpus")
    if not Path(cfg.corpus).exists():
        raise ExperimentError(f"corpus not found: {cfg.corpus}")
    sentences = cp.read_sentences(cfg.corpus, MIN_LEN, MAX_LEN)
    if not sentences:
        raise ExperimentError("empty corpus")
    if vocab is None:
        vocab = cp.build_vocabulary(sentences, cfg.max_vocab)
    ids = [vocab.encode(s) for s in sentences]
    return PreparedData(vocab, sentences, cp.split(ids, cfg.split_seed))


def make_embedder(cfg: ExperimentConfig):
    return TableEmbedder.load(cfg.embeddings) if cfg.embeddings else HashedEmbedder()


def build_kb(cfg: ExperimentConfig, data: PreparedData | None = None, theta: float | None = None) -> kbm.KnowledgeBase:
    """Single-pass threshold-clustered knowledge base over the training split."""
    data = data or prepare_data(cfg)
    return kbm.build(data.words("train"), cfg.theta if theta is None else theta, cfg.max_kb_size, make_embedder(cfg))


def load_kb(cfg: ExperimentConfig) -> kbm.KnowledgeBase:
    if not cfg.kb or not Path(cfg.kb).exists():
        raise ExperimentError(f"missing knowledge base: {cfg.kb}")
    return kbm.load(cfg.kb, make_embedder(cfg))


# ---------------------------------------------------------------- training


def model_config(cfg: ExperimentConfig, vocab_size: int) -> ModelConfig:
    factory = ModelConfig.desk if cfg.profile == "desk" else ModelConfig.paper
    return factory(vocab_size, integration_residual=cfg.integration_residual,
                   integration_dense=cfg.integration_dense)


def train_config(cfg: ExperimentConfig, seed: int) -> TrainConfig:
    overrides = {k: v for k, v in (("epochs", cfg.epochs), ("lr", cfg.lr), ("batch_size", cfg.batch_size)) if v is not None}
    factory = TrainConfig.desk if cfg.profile == "desk" else TrainConfig
    return factory(seed=seed, dtype=cfg.dtype, **overrides)


def train_model(cfg: ExperimentConfig, data: PreparedData, kb: kbm.KnowledgeBase | None, seed: int,
                use_knowledge: bool | None = None) -> TrainResult:
    use_knowledge = cfg.use_knowledge if use_knowledge is None else use_knowledge
    if use_knowledge and (kb is None or len(kb) == 0):
        raise ExperimentError("knowledge base empty")
    tcfg = train_config(cfg, seed)
    model = init_model(model_config(cfg, len(data.vocab)), seed, tcfg.torch_dtype)
    train_ds = Dataset.build(data.words("train"), data.vocab, kb, use_knowledge)
    val_ds = Dataset.build(data.words("validation"), data.vocab, kb, use_knowledge)
    return train(model, train_ds, tcfg, cfg.channel, val_ds, cfg.rician_k_db)


def vocab_path(model_path: str) -> str:
    return model_path + ".vocab"


def save_model(model: Transceiver, vocab: cp.Vocabulary, path: str, meta: dict) -> None:
    checkpoint.save(model, path, meta)
    vocab.save(vocab_path(path))


def load_model(path: str) -> tuple[Transceiver, cp.Vocabulary, dict]:
    if not Path(path).exists():
        raise ExperimentError(f"missing model: {path}")
    model, meta = checkpoint.load(path)
    vpath = vocab_path(path)
    if not Path(vpath).exists():
        raise ExperimentError(f"missing vocabulary: {vpath}")
    return model, cp.Vocabulary.load(vpath), meta


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class ResultRow:
    method: str
    channel: str
    snr_db: float
    bleu_1: float
    bleu_2: float
    bleu_3: float
    bleu_4: float
    similarity: float
    symbols_per_sentence: float
    index_bits_per_sentence: float
    seed: int

    def __post_init__(self):
        for name in ("bleu_1", "bleu_2", "bleu_3", "bleu_4", "similarity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not self.symbols_per_sentence > 0:
            raise ValueError("symbols_per_sentence must be positive")

    def sort_key(self):
        return (self.method, self.channel, self.snr_db, self.seed)


_SINGLE = tuple(BleuWeights.single(n) for n in range(1, 5))


def sentence_scores(reference: Sequence[str], candidate: Sequence[str], embedder) -> tuple[float, ...]:
    """BLEU-1..4 and similarity of one decoded sentence; an empty decode scores 0."""
    if not candidate:
        return (0.0,) * 5
    bleus = tuple(bleu(reference, candidate, w) for w in _SINGLE)
    sim = similarity_score(embedder, list(reference), list(candidate))
    return (*bleus, sim)


def noise_seed(seed: int, snr_db: float, salt: int = 0) -> int:
    """Per-cell seed that depends only on (seed, SNR, salt), not on the grid."""
    key = int(round((snr_db + 1000.0) * 1000.0)) if math.isfinite(snr_db) else 2**31
    return int(np.random.SeedSequence([seed, key, salt]).generate_state(1, dtype=np.uint64)[0] >> 1)


def _mean_scores(scores: list[tuple[float, ...]]) -> list[float]:
    return [math.fsum(col) / len(scores) for col in zip(*scores)]


def evaluate_neural(
    model: Transceiver,
    vocab: cp.Vocabulary,
    kb: kbm.KnowledgeBase | None,
    sentences: Sequence[Sequence[str]],
    cfg: ExperimentConfig,
    method: str,
    use_knowledge: bool,
) -> list[ResultRow]:
    if not sentences:
        raise ExperimentError("empty test set")
    embedder = make_embedder(cfg)
    msgs = [vocab.encode(s) for s in sentences]
    refs = [vocab.decode(m) for m in msgs]
    if use_knowledge:
        if kb is None or len(kb) == 0:
            raise ExperimentError("knowledge base empty")
        kidx, _ = kbm.nearest_indices(kb, sentences)
        kb_ids = [vocab.encode(s) for s in kb.sentences]
        knowledge = [kb_ids[j] for j in kidx]
        bits = float(kb.index_bits())
    else:
        knowledge = [NULL_KNOWLEDGE] * len(msgs)
        bits = 0.0
    symbols = math.fsum(len(m) for m in msgs) / len(msgs) * model.cfg.symbols_per_word
    if cfg.include_index_cost:
        symbols += bits / 6.0
    rows = []
    for seed in cfg.seeds:
        for snr in cfg.snr_grid:
            gen = torch.Generator().manual_seed(noise_seed(seed, snr))
            chan = TorchChannel(cfg.channel, gen, snr_db=snr, rician_k_db=cfg.rician_k_db)
            scores = []
            for i in range(0, len(msgs), EVAL_BATCH):
                out = transmit_batch(model, msgs[i : i + EVAL_BATCH], knowledge[i : i + EVAL_BATCH], chan)
                for ref, ids in zip(refs[i : i + EVAL_BATCH], out):
                    scores.append(sentence_scores(ref, vocab.decode(ids), embedder))
            rows.append(ResultRow(method, cfg.channel, snr, *_mean_scores(scores), symbols, bits, seed))
    return rows


def default_ldpc() -> LdpcCode:
    ref = resources.files("semkb.resources").joinpath("ldpc_216_3_9.alist")
    with resources.as_file(ref) as path:
        return LdpcCode(read_alist(path))


def huffman_table(cfg: ExperimentConfig, train_sentences: Sequence[Sequence[str]]) -> HuffmanCode:
    if cfg.huffman:
        return HuffmanCode.loads(Path(cfg.huffman).read_text(encoding="utf-8"))
    texts = [cp.detokenize(s) for s in train_sentences]
    return huffman_build(char_frequencies(texts, pseudocount=1.0))


def evaluate_classical(
    sentences: Sequence[Sequence[str]],
    train_sentences: Sequence[Sequence[str]],
    cfg: ExperimentConfig,
    methods: Sequence[str] = DEFAULT_BASELINES,
) -> list[ResultRow]:
    if not sentences:
        raise ExperimentError("empty test set")
    embedder = make_embedder(cfg)
    huff = huffman_table(cfg, train_sentences) if any(m.startswith("huffman") for m in methods) else None
    ldpc = None
    if any(m.endswith("ldpc") for m in methods):
        ldpc = LdpcCode(read_alist(cfg.ldpc)) if cfg.ldpc else default_ldpc()
    texts = [cp.detokenize(s) for s in sentences]
    rows = []
    for method in methods:
        if method not in CLASSICAL_METHODS:
            raise ConfigError(f"unknown method {method!r}")
        src, chan_code = method.split("+")
        pipe = ClassicalPipeline(src, chan_code, huff, ldpc)
        salt = CLASSICAL_METHODS.index(method) + 1
        for seed in cfg.seeds:
            for snr in cfg.snr_grid:
                rng = np.random.default_rng(noise_seed(seed, snr, salt))
                ccfg = ch.ChannelConfig(cfg.channel, snr, cfg.rician_k_db, seed)
                scores, symbols = [], []
                for ref, text in zip(sentences, texts):
                    res = pipe.transmit(text, ccfg, rng)
                    scores.append(sentence_scores(ref, cp.tokenize(res.text), embedder))
                    symbols.append(res.symbols)
                rows.append(ResultRow(method, cfg.channel, snr, *_mean_scores(scores),
                                      math.fsum(symbols) / len(symbols), 0.0, seed))
    return rows


def run_evaluation(cfg: ExperimentConfig) -> list[ResultRow]:
    """Evaluate every model in ``cfg.model`` (and any classical ``cfg.methods``) on the test split."""
    classical = [m for m in cfg.methods if m in CLASSICAL_METHODS]
    unknown = [m for m in cfg.methods if m not in CLASSICAL_METHODS and m not in NEURAL_METHODS]
    if unknown:
        raise ConfigError(f"unknown method {unknown[0]!r}")
    if not cfg.model and not classical:
        raise ExperimentError("missing model")
    rows = []
    kb = None
    for path in cfg.model:
        model, vocab, meta = load_model(path)
        use_knowledge = meta.get("use_knowledge", "1") == "1"
        if use_knowledge and kb is None:
            kb = load_kb(cfg)
        data = prepare_data(cfg, vocab)
        method = "neural" if use_knowledge else "neural-nokb"
        rows += evaluate_neural(model, vocab, kb, data.words("test"), cfg, method, use_knowledge)
    if classical:
        data = prepare_data(cfg)
        rows += evaluate_classical(data.words("test"), data.words("train"), cfg, classical)
    return sorted(rows, key=ResultRow.sort_key)


def run_baseline_evaluation(cfg: ExperimentConfig) -> list[ResultRow]:
    methods = cfg.methods or DEFAULT_BASELINES
    data = prepare_data(cfg)
    return sorted(evaluate_classical(data.words("test"), data.words("train"), cfg, methods), key=ResultRow.sort_key)


# ---------------------------------------------------------------- θ sweep


@dataclass(frozen=True)
class SweepRow:
    theta: float
    kb_size: int
    bleu_1: float
    similarity: float
    seed: int


@dataclass(frozen=True)
class SweepRun:
    row: SweepRow
    result: TrainResult
    kb: kbm.KnowledgeBase


def threshold_sweep_runs(cfg: ExperimentConfig, thetas: Sequence[float] | None = None) -> list[SweepRun]:
    """One KB and one freshly trained model per (θ, seed), scored at ``cfg.eval_snr_db``."""
    thetas = tuple(cfg.thetas if thetas is None else thetas)
    if any(not 0.0 <= t <= 1.0 for t in thetas):
        raise ConfigError("theta outside [0, 1]")
    data = prepare_data(cfg)
    test = data.words("test")
    runs = []
    for theta in thetas:
        kb = build_kb(cfg, data, theta)
        for seed in cfg.seeds:
            result = train_model(cfg, data, kb, seed)
            ecfg = cfg.replace(snr_grid=(cfg.eval_snr_db,), seeds=(seed,))
            (row,) = evaluate_neural(result.model, data.vocab, kb, test, ecfg, "neural", True)
            runs.append(SweepRun(SweepRow(theta, len(kb), row.bleu_1, row.similarity, seed), result, kb))
            log.info("theta %.2f seed %d: |KB|=%d bleu_1=%.4f sim=%.4f", theta, seed, len(kb), row.bleu_1, row.similarity)
    return runs


def run_threshold_sweep(cfg: ExperimentConfig, thetas: Sequence[float] | None = None) -> list[SweepRow]:
    return sorted((r.row for r in threshold_sweep_runs(cfg, thetas)), key=lambda r: (r.theta, r.seed))


# ---------------------------------------------------------------- entropy


def entropy_report(cfg: ExperimentConfig, kb: kbm.KnowledgeBase | None = None) -> str:
    """Semantic-entropy report of the filtered corpus against the knowledge base."""
    kb = kb if kb is not None else load_kb(cfg)
    if not cfg.corpus or not Path(cfg.corpus).exists():
        raise ExperimentError(f"missing corpus: {cfg.corpus}")
    sentences = cp.read_sentences(cfg.corpus, MIN_LEN, MAX_LEN)
    if not sentences:
        raise ExperimentError("empty corpus")
    source = si.SourceModel.empirical(sentences)
    return si.entropy_report_csv(source, kb, si.SemanticInfoConfig(lam=cfg.lam, distance=cfg.metric))


# ---------------------------------------------------------------- CSV


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence, row_type) -> str:
    names = [f.name for f in fields(row_type)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        d = asdict(r)
        w.writerow([_cell(d[n]) for n in names])
    return buf.getvalue()

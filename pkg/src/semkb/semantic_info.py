"""Semantic self-information and entropy relative to a knowledge base."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import knowledge_base as kbm
from .metrics import BleuWeights, bleu

MASS_TOL = 1e-12


@dataclass(frozen=True)
class SemanticInfoConfig:
    lam: float = 1.0
    d_max: float = 1.0 - 1e-9
    distance: str = "similarity"  # or "bleu"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 0.0 < self.d_max < 1.0:
            raise ValueError("d_max must lie in (0, 1)")
        if self.distance not in ("similarity", "bleu"):
            raise ValueError(f"unknown distance {self.distance!r}")


@dataclass(frozen=True)
class SourceModel:
    sentences: tuple[tuple[str, ...], ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.sentences) != len(self.probabilities) or not self.sentences:
            raise ValueError("source model needs one probability per sentence")
        if any(not p > 0 for p in self.probabilities):
            raise ValueError("source probabilities must be positive")
        if abs(math.fsum(self.probabilities) - 1.0) > MASS_TOL:
            raise ValueError("source probabilities must sum to 1")

    @classmethod
    def empirical(cls, corpus: Sequence[Sequence[str]]) -> "SourceModel":
        """Relative frequency of each distinct sentence, in order of first appearance."""
        counts = Counter(tuple(s) for s in corpus)
        n = sum(counts.values())
        sents = tuple(counts)
        return cls(sents, tuple(counts[s] / n for s in sents))

    @classmethod
    def uniform(cls, sentences: Sequence[Sequence[str]]) -> "SourceModel":
        return cls(tuple(tuple(s) for s in sentences), tuple([1.0 / len(sentences)] * len(sentences)))


@dataclass(frozen=True)
class KnowledgeDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.ndim != 1 or np.any(p < 0) or abs(math.fsum(p) - 1.0) > MASS_TOL:
            raise ValueError("invalid knowledge distribution")
        object.__setattr__(self, "probabilities", p)

    def __getitem__(self, k: int) -> float:
        return float(self.probabilities[k])


def nearest(kb: kbm.KnowledgeBase, sentence: Sequence[str], cfg: SemanticInfoConfig) -> tuple[int, float]:
    """(index, distance) of the nearest knowledge under the configured distance."""
    if cfg.distance == "similarity":
        entry, d = kbm.find_nearest(kb, sentence)
        return entry.index, d
    if not kb.entries:
        raise kbm.KnowledgeBaseError("knowledge base empty")
    w = BleuWeights.single(1)
    dists = [1.0 - bleu(e.sentence, tuple(sentence), w) for e in kb.entries]
    j = int(np.argmin(dists))
    return j, float(dists[j])


def _assignments(source: SourceModel, kb: kbm.KnowledgeBase, cfg: SemanticInfoConfig):
    return [nearest(kb, s, cfg) for s in source.sentences]


def induced_distribution(
    source: SourceModel, kb: kbm.KnowledgeBase, cfg: SemanticInfoConfig = SemanticInfoConfig()
) -> KnowledgeDistribution:
    """Push the source distribution forward through the nearest-knowledge map."""
    if not kb.entries:
        raise kbm.KnowledgeBaseError("knowledge base empty")
    mass = [[] for _ in kb.entries]
    for (k, _), p in zip(_assignments(source, kb, cfg), source.probabilities):
        mass[k].append(p)
    return KnowledgeDistribution(np.array([math.fsum(m) for m in mass]))


def knowledge_self_information(dist: KnowledgeDistribution, k_index: int) -> float:
    p = dist[k_index]
    if p <= 0:
        raise ValueError("knowledge has zero mass")
    return -math.log2(p)


def kb_entropy(dist: KnowledgeDistribution) -> float:
    return math.fsum(-p * math.log2(p) for p in dist.probabilities if p > 0)


def distance_information(distance: float, cfg: SemanticInfoConfig) -> float:
    """Penalty term ``-lambda * log2(1 - D)`` with D clamped at ``d_max``."""
    d = min(max(distance, 0.0), cfg.d_max)
    return -cfg.lam * math.log2(1.0 - d)


def semantic_self_information(
    sentence: Sequence[str],
    kb: kbm.KnowledgeBase,
    dist: KnowledgeDistribution,
    cfg: SemanticInfoConfig = SemanticInfoConfig(),
) -> float:
    k, d = nearest(kb, sentence, cfg)
    return knowledge_self_information(dist, k) + distance_information(d, cfg)


@dataclass(frozen=True)
class SentenceTerm:
    sentence_index: int
    knowledge_index: int
    distance: float
    self_information_bits: float


@dataclass(frozen=True)
class Decomposition:
    source_entropy: float
    kb_entropy: float
    residual_term: float
    defect: float
    terms: tuple[SentenceTerm, ...] = ()


def _terms(source: SourceModel, kb: kbm.KnowledgeBase, cfg: SemanticInfoConfig):
    assign = _assignments(source, kb, cfg)
    mass = [[] for _ in kb.entries]
    for (k, _), p in zip(assign, source.probabilities):
        mass[k].append(p)
    dist = KnowledgeDistribution(np.array([math.fsum(m) for m in mass]))
    terms = tuple(
        SentenceTerm(i, k, d, knowledge_self_information(dist, k) + distance_information(d, cfg))
        for i, (k, d) in enumerate(assign)
    )
    return dist, assign, terms


def source_semantic_entropy(
    source: SourceModel, kb: kbm.KnowledgeBase, cfg: SemanticInfoConfig = SemanticInfoConfig()
) -> float:
    _, _, terms = _terms(source, kb, cfg)
    return math.fsum(p * t.self_information_bits for p, t in zip(source.probabilities, terms))


def verify_decomposition(
    source: SourceModel, kb: kbm.KnowledgeBase, cfg: SemanticInfoConfig = SemanticInfoConfig()
) -> Decomposition:
    """Check that source semantic entropy equals knowledge entropy plus the distance term."""
    dist, assign, terms = _terms(source, kb, cfg)
    hs = math.fsum(p * t.self_information_bits for p, t in zip(source.probabilities, terms))
    hk = kb_entropy(dist)
    residual = math.fsum(p * distance_information(d, cfg) for p, (_, d) in zip(source.probabilities, assign))
    return Decomposition(hs, hk, residual, abs(hs - hk - residual), terms)


def entropy_report_csv(
    source: SourceModel, kb: kbm.KnowledgeBase, cfg: SemanticInfoConfig = SemanticInfoConfig()
) -> str:
    """Per-sentence terms followed by four summary rows (label in the first column, value in the second)."""
    dec = verify_decomposition(source, kb, cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sentence_index", "nearest_knowledge_index", "distance", "self_information_bits"])
    for t in dec.terms:
        w.writerow([t.sentence_index, t.knowledge_index, repr(t.distance), repr(t.self_information_bits)])
    w.writerow(["H_K_bits", repr(dec.kb_entropy), "", ""])
    w.writerow(["H_s_S_bits", repr(dec.source_entropy), "", ""])
    w.writerow(["residual_bits", repr(dec.residual_term), "", ""])
    w.writerow(["defect", repr(dec.defect), "", ""])
    return buf.getvalue()

"""Okapi BM25 over the paragraphs of a single document."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import InterventionCondition, tokenize

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


@dataclass(frozen=True)
class Bm25Index:
    term_freqs: tuple[Counter, ...]
    doc_freqs: Counter
    lengths: tuple[int, ...]
    avg_length: float
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    @property
    def n_paragraphs(self) -> int:
        return len(self.lengths)

    def idf(self, term: str) -> float:
        df = self.doc_freqs.get(term, 0)
        return math.log(1.0 + (self.n_paragraphs - df + 0.5) / (df + 0.5))


def build_index(paragraphs: Sequence[str], k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> Bm25Index:
    if not paragraphs:
        raise ValueError("cannot build a BM25 index over zero paragraphs")
    if k1 < 0 or not 0 <= b <= 1:
        raise ValueError(f"invalid BM25 parameters k1={k1}, b={b}")
    term_freqs = tuple(Counter(tokenize(p)) for p in paragraphs)
    lengths = tuple(sum(tf.values()) for tf in term_freqs)
    doc_freqs: Counter = Counter()
    for tf in term_freqs:
        doc_freqs.update(tf.keys())
    avg = sum(lengths) / len(lengths)
    return Bm25Index(term_freqs, doc_freqs, lengths, avg, k1, b)


def score(index: Bm25Index, query_tokens: Sequence[str], paragraph_idx: int) -> float:
    if not 0 <= paragraph_idx < index.n_paragraphs:
        raise IndexError(f"paragraph index {paragraph_idx} out of range [0, {index.n_paragraphs})")
    if index.avg_length == 0:
        return 0.0
    tf = index.term_freqs[paragraph_idx]
    norm = index.k1 * (1.0 - index.b + index.b * index.lengths[paragraph_idx] / index.avg_length)
    total = 0.0
    for term in query_tokens:
        f = tf.get(term, 0)
        if f:
            total += index.idf(term) * f * (index.k1 + 1.0) / (f + norm)
    return total


def ic_query(ic: InterventionCondition) -> list[str]:
    return tokenize(ic.intervention) + tokenize(ic.condition)


def most_relevant_paragraph(index: Bm25Index, ic: InterventionCondition) -> int:
    """Index of the highest-scoring paragraph; the earliest one wins ties."""
    query = ic_query(ic)
    best, best_score = 0, -1.0
    for i in range(index.n_paragraphs):
        s = score(index, query, i)
        if s > best_score:
            best, best_score = i, s
    return best

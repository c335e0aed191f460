"""Reduce a document to classifier input: paragraph filter, then window filter.

The paragraph filter keeps the first paragraph, the last three, and the one
BM25 ranks highest for the intervention and condition terms. The window filter
cuts the result into sentence-aligned windows of at most ``window_words``
tokens and keeps only windows that mention both terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .corpus import Document, InterventionCondition, Sentence, segment_sentences, tokenize
from .relevance import DEFAULT_B, DEFAULT_K1, Bm25Index, build_index, most_relevant_paragraph

D_PRIME = "d_prime"
D_DOUBLE_PRIME = "d_double_prime"
DEFAULT_WINDOW_WORDS = 510

# ignored when deciding whether a window mentions a multi-word term
TERM_STOPWORDS = frozenset({"a", "an", "and", "the", "of", "for", "in", "on", "with", "to", "s"})


class NoRelevantWindowError(ValueError):
    """Every window was dropped and fallback to the paragraph-filtered text is disabled."""


@dataclass(frozen=True)
class SubDocument:
    source_id: str
    sentences: tuple[Sentence, ...]
    provenance: str
    dropped_windows: int = 0
    fallback: bool = False
    paragraph_indices: tuple[int, ...] = ()
    n_windows: int = 0

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)

    def metadata(self) -> dict:
        return {
            "stage": self.provenance,
            "paragraphs": list(self.paragraph_indices),
            "windows": self.n_windows,
            "dropped_windows": self.dropped_windows,
            "fallback": self.fallback,
        }


def paragraph_filter(
    doc: Document, index: Optional[Bm25Index] = None, ic: Optional[InterventionCondition] = None
) -> SubDocument:
    n = len(doc.paragraphs)
    if index is None:
        index = build_index(doc.paragraphs)
    if n <= 4:
        keep = set(range(n))
    else:
        keep = {0, n - 3, n - 2, n - 1, most_relevant_paragraph(index, ic or doc.ic)}
    selected = tuple(sorted(keep))
    sentences = tuple(s for s in segment_sentences(doc) if s.paragraph_index in keep)
    return SubDocument(doc.id, sentences, D_PRIME, paragraph_indices=selected)


def term_tokens(term: str) -> set[str]:
    tokens = tokenize(term)
    content = {t for t in tokens if t not in TERM_STOPWORDS}
    return content or set(tokens)


def windows(sentences: tuple[Sentence, ...], window_words: int) -> list[list[Sentence]]:
    """Greedy sentence-aligned partition; an oversized sentence is its own window."""
    out: list[list[Sentence]] = []
    current: list[Sentence] = []
    size = 0
    for sent in sentences:
        n = len(tokenize(sent.text))
        if current and size + n > window_words:
            out.append(current)
            current, size = [], 0
        current.append(sent)
        size += n
    if current:
        out.append(current)
    return out


def window_mentions(window: list[Sentence], ic: InterventionCondition) -> bool:
    tokens = set()
    for sent in window:
        tokens.update(tokenize(sent.text))
    return term_tokens(ic.intervention) <= tokens and term_tokens(ic.condition) <= tokens


def window_filter(
    d_prime: SubDocument, ic: InterventionCondition, window_words: int = DEFAULT_WINDOW_WORDS
) -> SubDocument:
    if window_words < 1:
        raise ValueError("window_words must be positive")
    parts = windows(d_prime.sentences, window_words)
    kept = [w for w in parts if window_mentions(w, ic)]
    sentences = tuple(s for w in kept for s in w)
    return SubDocument(
        d_prime.source_id,
        sentences,
        D_DOUBLE_PRIME,
        dropped_windows=len(parts) - len(kept),
        paragraph_indices=d_prime.paragraph_indices,
        n_windows=len(parts),
    )


def preprocess(
    doc: Document,
    ic: Optional[InterventionCondition] = None,
    *,
    window_words: int = DEFAULT_WINDOW_WORDS,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    fallback: bool = True,
) -> SubDocument:
    ic = ic or doc.ic
    d_prime = paragraph_filter(doc, build_index(doc.paragraphs, k1, b), ic)
    d_double = window_filter(d_prime, ic, window_words)
    if d_double.sentences:
        return d_double
    if not fallback:
        raise NoRelevantWindowError(
            f"document {doc.id!r}: no window mentions both {ic.intervention!r} and {ic.condition!r}"
        )
    return SubDocument(
        d_prime.source_id,
        d_prime.sentences,
        D_PRIME,
        dropped_windows=d_double.dropped_windows,
        fallback=True,
        paragraph_indices=d_prime.paragraph_indices,
        n_windows=d_double.n_windows,
    )

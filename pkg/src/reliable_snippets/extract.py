"""Snippet extraction by sentence erasure.

The document is classified as a whole; each sentence is then removed in turn
and its contribution is the drop in the score of the predicted viewpoint. The
sentence with the largest contribution becomes the snippet.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import Document, InterventionCondition, Sentence
from .preprocess import DEFAULT_WINDOW_WORDS, SubDocument, preprocess
from .relevance import DEFAULT_B, DEFAULT_K1
from .viewpoint import ViewpointClassifier, classify

DEFAULT_CROP_LIMIT = 160
ELLIPSIS = "..."


class ExtractionError(RuntimeError):
    def __init__(self, message: str, doc_id: Optional[str] = None, sentence_index: Optional[int] = None):
        super().__init__(message)
        self.doc_id = doc_id
        self.sentence_index = sentence_index


@dataclass(frozen=True)
class SentenceContribution:
    sentence: Sentence
    value: float


@dataclass(frozen=True)
class Caption:
    title: str
    snippet_text: str
    url: Optional[str] = None


@dataclass(frozen=True)
class SnippetResult:
    doc_id: str
    predicted_viewpoint: str
    selected_sentence: Sentence
    snippet_text: str
    contributions: tuple[SentenceContribution, ...]
    provenance: dict

    @property
    def contribution(self) -> float:
        for c in self.contributions:
            if c.sentence == self.selected_sentence:
                return c.value
        raise LookupError("selected sentence has no contribution entry")

    def caption(self, doc: Document) -> Caption:
        return Caption(doc.title, self.snippet_text, doc.url)

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "viewpoint": self.predicted_viewpoint,
            "snippet": self.snippet_text,
            "sentence_index": self.selected_sentence.doc_index,
            "contribution": self.contribution,
            "fallback": bool(self.provenance.get("fallback", False)),
            "contributions": [{"index": c.sentence.doc_index, "value": c.value} for c in self.contributions],
        }

    def to_jsonl(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)


def join_sentences(sentences: Sequence[Sentence]) -> str:
    return " ".join(s.text for s in sentences)


def erase(sentences: Sequence[Sentence], i: int) -> str:
    return join_sentences(sentences[:i] + sentences[i + 1:])


def contributions(
    model: ViewpointClassifier,
    d2: SubDocument,
    ic: InterventionCondition,
    jobs: int = 1,
) -> tuple[str, list[SentenceContribution]]:
    """Predicted viewpoint of ``d2`` and the erasure contribution of each sentence."""
    sentences = tuple(d2.sentences)
    if not sentences:
        raise ExtractionError("cannot compute contributions of an empty sub-document", d2.source_id)
    try:
        full = classify(model, join_sentences(sentences), ic)
    except Exception as exc:
        raise ExtractionError(f"document {d2.source_id!r}: classifier failed: {exc}", d2.source_id) from exc
    v_star = full.predicted
    if len(sentences) == 1:
        return v_star, [SentenceContribution(sentences[0], 1.0)]

    base = full.score(v_star)

    def one(i: int) -> float:
        try:
            return base - classify(model, erase(sentences, i), ic).score(v_star)
        except Exception as exc:
            idx = sentences[i].doc_index
            raise ExtractionError(
                f"document {d2.source_id!r}: classifier failed with sentence {idx} erased: {exc}",
                d2.source_id,
                idx,
            ) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(one, range(len(sentences))))
    else:
        values = [one(i) for i in range(len(sentences))]
    return v_star, [SentenceContribution(s, v) for s, v in zip(sentences, values)]


def select_snippet(contribs: Sequence[SentenceContribution]) -> Sentence:
    if not contribs:
        raise ValueError("no contributions to select from")
    best = min(contribs, key=lambda c: (-c.value, c.sentence.doc_index))
    return best.sentence


def crop(text: str, limit: int = DEFAULT_CROP_LIMIT) -> str:
    """Trim ``text`` to ``limit`` characters at a word boundary, ellipsis included."""
    if limit < len(ELLIPSIS) + 1:
        raise ValueError(f"crop limit must be at least {len(ELLIPSIS) + 1}")
    if len(text) <= limit:
        return text
    budget = limit - len(ELLIPSIS)
    head = text[:budget]
    if not text[budget].isspace():
        # back off to the last whitespace so no word is split
        cut = max((i for i, ch in enumerate(head) if ch.isspace()), default=0)
        if head[:cut].strip():
            head = head[:cut]
    # a single oversized leading word gets a hard cut
    return (head.rstrip() or head) + ELLIPSIS


def extract_snippet(
    model: ViewpointClassifier,
    doc: Document,
    ic: Optional[InterventionCondition] = None,
    *,
    window_words: int = DEFAULT_WINDOW_WORDS,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    fallback: bool = True,
    crop_limit: int = DEFAULT_CROP_LIMIT,
    jobs: int = 1,
) -> SnippetResult:
    ic = ic or doc.ic
    d2 = preprocess(doc, ic, window_words=window_words, k1=k1, b=b, fallback=fallback)
    v_star, contribs = contributions(model, d2, ic, jobs=jobs)
    chosen = select_snippet(contribs)
    return SnippetResult(
        doc_id=doc.id,
        predicted_viewpoint=v_star,
        selected_sentence=chosen,
        snippet_text=crop(chosen.text, crop_limit),
        contributions=tuple(contribs),
        provenance=d2.metadata(),
    )

"""Documents, JSONL ingestion, segmentation and the viewpoint label taxonomy."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

LABELS = (
    "effective",
    "potentially_effective",
    "inconclusive",
    "potentially_ineffective",
    "ineffective",
    "no_viewpoint",
)

# grouped four-level classes; the classifier output space is the first three
CLASSES = ("effective", "inconclusive", "ineffective", "no_viewpoint")
VIEWPOINTS = ("effective", "inconclusive", "ineffective")

_REGROUP = {
    "potentially_effective": "effective",
    "potentially_ineffective": "ineffective",
}


class CorpusError(ValueError):
    """Raised for malformed corpus input; the message names the line."""


def regroup(label: str) -> str:
    """Map a six-valued annotator label onto the four grouped classes."""
    if label not in LABELS:
        raise ValueError(f"unknown label {label!r}")
    return _REGROUP.get(label, label)


@dataclass(frozen=True)
class InterventionCondition:
    intervention: str
    condition: str

    def __post_init__(self):
        if not self.intervention.strip() or not self.condition.strip():
            raise ValueError("intervention and condition must be nonempty")

    def key(self) -> tuple[str, str]:
        return (self.intervention.strip().lower(), self.condition.strip().lower())

    @property
    def query_id(self) -> str:
        """Stable slug used to group documents into one SERP."""
        return "-".join(tokenize(self.intervention) + tokenize(self.condition))


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    paragraphs: tuple[str, ...]
    ic: InterventionCondition
    url: Optional[str] = None
    label: Optional[str] = None

    def __post_init__(self):
        if not any(p.strip() for p in self.paragraphs):
            raise ValueError(f"document {self.id!r} has no nonempty paragraph")
        if self.label is not None and self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")

    @property
    def text(self) -> str:
        return "\n\n".join(self.paragraphs)

    def to_json(self) -> dict:
        out = {"id": self.id, "title": self.title}
        if self.url is not None:
            out["url"] = self.url
        out["paragraphs"] = list(self.paragraphs)
        out["intervention"] = self.ic.intervention
        out["condition"] = self.ic.condition
        if self.label is not None:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class Sentence:
    text: str
    doc_index: int
    paragraph_index: int
    char_span: tuple[int, int] = field(compare=True)


# --- tokenization -----------------------------------------------------------

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercased runs of Unicode letters/digits; everything else separates."""
    return _TOKEN_RE.findall(text.lower())


# --- sentence segmentation ----------------------------------------------------

ABBREVIATIONS = frozenset(
    {
        "dr.", "mr.", "mrs.", "ms.", "prof.", "sr.", "jr.", "st.",
        "e.g.", "i.e.", "vs.", "etc.", "al.", "fig.", "figs.", "no.",
        "approx.", "ca.", "cf.", "vol.", "pp.", "inc.", "ltd.", "co.",
        "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
        "sept.", "oct.", "nov.", "dec.", "mg.", "min.", "max.", "resp.",
    }
)

# terminal punctuation, optional closers, whitespace, optional openers, then
# an uppercase letter or digit starting the next sentence
_BOUNDARY_RE = re.compile(r"[.?!]+[\"'”’)\]]*(\s+)(?=[\"'“‘(\[]*[A-Z0-9])")


def _is_abbreviation(paragraph: str, punct_end: int) -> bool:
    start = punct_end
    while start > 0 and not paragraph[start - 1].isspace():
        start -= 1
    word = paragraph[start:punct_end].lstrip("\"'(“‘[").lower()
    return word in ABBREVIATIONS


def split_paragraph(paragraph: str) -> list[tuple[int, int]]:
    """Character spans of the sentences in one paragraph.

    Spans exclude surrounding whitespace, so the gaps between consecutive spans
    (and before the first / after the last) are pure whitespace.
    """
    spans = []
    start = 0
    for m in _BOUNDARY_RE.finditer(paragraph):
        end = m.start(1)
        # the punctuation run ends where closers begin; only '.' can be an abbreviation
        if paragraph[m.start()] == "." and _is_abbreviation(paragraph, m.start() + 1):
            continue
        spans.append((start, end))
        start = m.end(1)
    spans.append((start, len(paragraph)))

    out = []
    for s, e in spans:
        chunk = paragraph[s:e]
        stripped = chunk.strip()
        if not stripped:
            continue
        lead = len(chunk) - len(chunk.lstrip())
        out.append((s + lead, s + lead + len(stripped)))
    return out


def segment_sentences(doc: Document) -> list[Sentence]:
    sentences: list[Sentence] = []
    for p_idx, paragraph in enumerate(doc.paragraphs):
        for s, e in split_paragraph(paragraph):
            sentences.append(Sentence(paragraph[s:e], len(sentences), p_idx, (s, e)))
    return sentences


def reconstruct_paragraph(paragraph: str, sentences: Iterable[Sentence]) -> str:
    """Rebuild a paragraph from its sentences plus the original whitespace gaps."""
    parts = []
    pos = 0
    for sent in sentences:
        s, e = sent.char_span
        parts.append(paragraph[pos:s])
        parts.append(sent.text)
        pos = e
    parts.append(paragraph[pos:])
    return "".join(parts)


# --- JSONL ingestion ------------------------------------------------------------

_BLANK_LINES_RE = re.compile(r"\n[ \t\r\f\v]*\n\s*")


def split_paragraphs(text: str) -> list[str]:
    return [p.strip() for p in _BLANK_LINES_RE.split(text) if p.strip()]


def document_from_json(obj: dict, lineno: int = 0) -> Document:
    where = f"at line {lineno}" if lineno else "in record"
    if not isinstance(obj, dict):
        raise CorpusError(f"malformed record {where}: expected a JSON object")
    for key in ("id", "title", "intervention", "condition"):
        if not isinstance(obj.get(key), str):
            raise CorpusError(f"malformed record {where}: missing or non-string field {key!r}")
    if "paragraphs" in obj:
        paragraphs = obj["paragraphs"]
        if not isinstance(paragraphs, list) or not all(isinstance(p, str) for p in paragraphs):
            raise CorpusError(f"malformed record {where}: 'paragraphs' must be a list of strings")
    elif isinstance(obj.get("text"), str):
        paragraphs = split_paragraphs(obj["text"])
    else:
        raise CorpusError(f"malformed record {where}: needs 'text' or 'paragraphs'")

    label = obj.get("label")
    if label is not None and label not in LABELS:
        raise CorpusError(f"unknown label {label!r} {where}")
    url = obj.get("url")
    if url is not None and not isinstance(url, str):
        raise CorpusError(f"malformed record {where}: 'url' must be a string")

    try:
        ic = InterventionCondition(obj["intervention"], obj["condition"])
        return Document(obj["id"], obj["title"], tuple(paragraphs), ic, url=url, label=label)
    except ValueError as exc:
        raise CorpusError(f"invalid document {where}: {exc}") from None


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, object]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: malformed JSON at line {lineno}: {exc.msg}") from None


def ingest_corpus(path: str | Path) -> list[Document]:
    docs: list[Document] = []
    seen: dict[str, int] = {}
    for lineno, obj in iter_jsonl(path):
        doc = document_from_json(obj, lineno)
        if doc.id in seen:
            raise CorpusError(
                f"duplicate document id {doc.id!r} at line {lineno} (first seen at line {seen[doc.id]})"
            )
        seen[doc.id] = lineno
        docs.append(doc)
    return docs


def dump_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json(), ensure_ascii=False) + "\n")

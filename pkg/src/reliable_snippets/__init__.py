"""Viewpoint-focused snippet extraction for intervention-effectiveness queries."""

__version__ = "0.1.0"

from .corpus import Document, InterventionCondition, Sentence, ingest_corpus, regroup, segment_sentences, tokenize
from .extract import Caption, SnippetResult, contributions, crop, extract_snippet, select_snippet
from .preprocess import SubDocument, preprocess
from .viewpoint import BaselineModel, ViewpointDistribution, classify, train_baseline

__all__ = [
    "BaselineModel",
    "Caption",
    "Document",
    "InterventionCondition",
    "Sentence",
    "SnippetResult",
    "SubDocument",
    "ViewpointDistribution",
    "classify",
    "contributions",
    "crop",
    "extract_snippet",
    "ingest_corpus",
    "preprocess",
    "regroup",
    "segment_sentences",
    "select_snippet",
    "tokenize",
    "train_baseline",
]

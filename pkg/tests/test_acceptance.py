"""One test per acceptance criterion; the first docstring line is the criterion label."""

import random
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

from oracles import bm25_by_hand, brute_force_contributions, chi2_sf_quadrature
from reliable_snippets.cli import main
from reliable_snippets.corpus import Sentence, dump_corpus, segment_sentences
from reliable_snippets.evaluate import confusion, no_viewpoint_table
from reliable_snippets.extract import contributions, crop, select_snippet
from reliable_snippets.preprocess import D_DOUBLE_PRIME, SubDocument, paragraph_filter, preprocess, windows
from reliable_snippets.relevance import build_index, score
from reliable_snippets.serpgen import render
from reliable_snippets.stats import chi_square
from reliable_snippets.viewpoint import KeywordClassifier, train_baseline
from synthetic import (
    FAMILIES,
    FILLER,
    corpus42,
    study_records,
    random_document,
    separable_corpus,
    serp_fixture_page,
    training_documents,
)

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).resolve().parent.parent
_MODULE_START = time.perf_counter()


def test_erasure_matches_brute_force(separable_model):
    """Erasure oracle: 200 random docs (<=12 sentences), bitwise equal to brute force, < 30 s"""
    rng = random.Random(200)
    start = time.perf_counter()
    for i in range(200):
        doc = random_document(rng, f"e{i}", max_total=12, mention=0.6)
        d2 = preprocess(doc)
        assert 1 <= len(d2.sentences) <= 12
        v, contribs = contributions(separable_model, d2, doc.ic)
        assert (v, [c.value for c in contribs]) == brute_force_contributions(
            separable_model, [s.text for s in d2.sentences], doc.ic
        )
    assert time.perf_counter() - start < 30


def test_keyword_fixture(ic):
    """Keyword fixture: contributions (3/7-1/5, 3/7-1/2, 3/7-1/2) within 1e-12, selects sentence 0"""
    texts = ["good good.", "bad.", "unclear."]
    d2 = SubDocument("fixture", tuple(Sentence(t, i, 0, (0, len(t))) for i, t in enumerate(texts)), D_DOUBLE_PRIME)
    _, contribs = contributions(KeywordClassifier(), d2, ic)
    expected = (3 / 7 - 1 / 5, 3 / 7 - 1 / 2, 3 / 7 - 1 / 2)
    assert all(abs(c.value - e) <= 1e-12 for c, e in zip(contribs, expected))
    assert select_snippet(contribs).doc_index == 0


def test_metric_reproduction():
    """Metric reproduction: 83 (19.76%), 118 (28%), 110/19/2 (84/14.5/1.5%), 74.7% / 60% within 0.1 pt"""
    records = study_records()
    framework_nv = no_viewpoint_table(records, "framework")
    assert framework_nv.total_count == 83
    assert abs(framework_nv.total_percent - 19.76) <= 0.1
    query_nv = no_viewpoint_table(records, "query_based")
    assert query_nv.total_count == 118
    assert abs(query_nv.total_percent - 28) <= 0.1
    cm = confusion(records, "framework")
    assert cm.row("effective") == [110, 19, 2]
    for got, want in zip(cm.row_percents[0], (84, 14.5, 1.5)):
        assert abs(got - want) <= 0.1
    assert abs(cm.accuracy_viewpoint - 74.7) <= 0.1
    assert abs(cm.accuracy_all - 60) <= 0.1


def test_bm25_fixture():
    """BM25: 3-paragraph fixture equals hand evaluation within 1e-9; no-match query scores exactly 0"""
    paragraphs = ["roselle lowers pressure", "tea recipe", "roselle roselle study"]
    query = ["roselle", "hypertension"]
    idx = build_index(paragraphs)
    for i in range(3):
        assert abs(score(idx, query, i) - bm25_by_hand(paragraphs, query, i)) <= 1e-9
    assert score(idx, query, 1) == 0.0
    assert all(score(idx, ["hypertension"], i) == 0.0 for i in range(3))


def _mentions(sentences, ic):
    words = set()
    for s in sentences:
        words.update(re.findall(r"[^\W_]+", s.text.lower()))
    return ic.intervention.lower() in words and ic.condition.lower() in words


def test_preprocessing_invariants():
    """Preprocessing: 500 random docs, paragraph filter keeps <= 5, windows mention both terms, subsequence, no empty fallback"""
    rng = random.Random(500)
    for i in range(500):
        doc = random_document(rng, f"p{i}", max_paragraphs=15, mention=rng.choice([0.05, 0.3, 0.8]))
        width = rng.choice([5, 12, 30, 510])
        order = [s.doc_index for s in segment_sentences(doc)]
        d1 = paragraph_filter(doc)
        assert len(d1.paragraph_indices) <= 5 and len(set(d1.paragraph_indices)) == len(d1.paragraph_indices)
        d2 = preprocess(doc, window_words=width)
        assert d2.sentences
        ids1 = [s.doc_index for s in d1.sentences]
        ids2 = [s.doc_index for s in d2.sentences]
        assert ids1 == sorted(ids1) and set(ids1) <= set(order)
        assert ids2 == sorted(ids2) and set(ids2) <= set(ids1)
        if d2.fallback:
            assert d2.sentences == d1.sentences
            continue
        kept = set(ids2)
        for window in windows(d1.sentences, width):
            inside = {s.doc_index for s in window}
            if inside & kept:
                assert inside <= kept
                assert _mentions(window, doc.ic)


def test_chi_square():
    """Chi-square: [[30,10],[10,30]] gives 20.0 +- 1e-9, df 1, p within 1e-8 of quadrature; proportional rows give 0"""
    res = chi_square([[30, 10], [10, 30]])
    assert abs(res.statistic - 20.0) <= 1e-9
    assert res.degrees_of_freedom == 1
    assert abs(res.p_value - chi2_sf_quadrature(20.0, 1)) <= 1e-8
    assert chi_square([[10, 20], [20, 40]]).statistic == 0


def test_baseline_classifier(ic):
    """Baseline: >= 95% training accuracy, distributions sum to 1 +- 1e-9, same-seed retrain byte-identical"""
    data = separable_corpus()
    model = train_baseline(data, seed=11)
    correct = 0
    for text, label in data:
        dist = model.classify(text, ic)
        assert abs(sum(dist.values) - 1) <= 1e-9
        correct += dist.predicted == label
    assert correct / len(data) >= 0.95
    rng = random.Random(1)
    for _ in range(500):
        text = " ".join(rng.choices(FILLER + sum(FAMILIES.values(), []) + ["novel"], k=rng.randint(1, 40)))
        assert abs(sum(model.classify(text, ic).values) - 1) <= 1e-9
    assert train_baseline(data, seed=11).dumps() == model.dumps()


def _random_text(rng):
    kind = rng.random()
    if kind < 0.05:
        return "x" * rng.randint(150, 400)
    words = []
    for _ in range(rng.randint(0, 60)):
        n = rng.choice([1, 2, 3, 5, 8, 12]) if rng.random() > 0.02 else rng.randint(100, 250)
        words.append("".join(rng.choices("abcdefgh.,'é", k=n)))
    seps = [" ", " ", " ", "  ", "\n", "\t"]
    return "".join(w + rng.choice(seps) for w in words).rstrip(" ") if rng.random() < 0.5 else " ".join(words)


def test_crop_property():
    """Crop: 10,000 random strings, length <= 160, no mid-word split but single-token case, idempotent when short"""
    rng = random.Random(160)
    for _ in range(10_000):
        text = _random_text(rng)
        out = crop(text)
        assert len(out) <= 160
        if len(text) <= 160:
            assert out == text == crop(out)
            continue
        head = out[:-3]
        assert out.endswith("...") and text.startswith(head)
        split_word = head and not head[-1].isspace() and not text[len(head)].isspace()
        if split_word:
            assert not any(ch.isspace() for ch in head.strip())


def test_end_to_end_determinism(tmp_path):
    """End-to-end: `extract` on a 42-document fixture twice is byte-identical; full suite < 2 minutes"""
    dump_corpus(corpus42(), tmp_path / "corpus.jsonl")
    dump_corpus(training_documents(), tmp_path / "train.jsonl")
    assert main(["train", "--corpus", str(tmp_path / "train.jsonl"), "--out", str(tmp_path / "model.json")]) == 0
    outs = []
    for name in ("a.jsonl", "b.jsonl"):
        code = main(["extract", "--corpus", str(tmp_path / "corpus.jsonl"), "--model", str(tmp_path / "model.json"),
                     "--out", str(tmp_path / name)])
        assert code == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].decode().splitlines()) == 42

    # the rest of the suite in a fresh interpreter, plus the time spent in this module so far
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "--ignore", str(Path(__file__))],
        cwd=ROOT, capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - start + (time.perf_counter() - _MODULE_START)
    assert proc.returncode == 0, proc.stdout[-2000:]
    assert elapsed < 120, f"suite took {elapsed:.1f}s"


def test_serp_golden():
    """SERP: fixture page byte-identical to golden file; caption order identical across two method tags"""
    golden = (Path(__file__).parent / "golden" / "serp_fixture.html").read_bytes()
    assert render(serp_fixture_page("framework")).encode("utf-8") == golden
    assert serp_fixture_page("framework").captions == serp_fixture_page("query_based").captions

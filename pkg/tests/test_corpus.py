import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reliable_snippets.corpus import (
    ABBREVIATIONS,
    LABELS,
    CorpusError,
    Document,
    InterventionCondition,
    dump_corpus,
    ingest_corpus,
    reconstruct_paragraph,
    regroup,
    segment_sentences,
    split_paragraph,
    tokenize,
)
from synthetic import random_document


def _doc(*paragraphs):
    return Document("d", "T", tuple(paragraphs), InterventionCondition("roselle", "hypertension"))


def _write(tmp_path, *lines):
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(json.dumps(x) if not isinstance(x, str) else x for x in lines) + "\n")
    return path


class TestIngest:
    def test_paragraph_field(self, tmp_path):
        path = _write(
            tmp_path,
            {"id": "d1", "title": "T", "paragraphs": ["a", "b"], "intervention": "roselle", "condition": "hypertension"},
        )
        (doc,) = ingest_corpus(path)
        assert doc.paragraphs == ("a", "b")
        assert doc.ic == InterventionCondition("roselle", "hypertension")
        assert doc.label is None and doc.url is None

    def test_text_split_on_blank_lines(self, tmp_path):
        path = _write(
            tmp_path,
            {"id": "d1", "title": "T", "text": "one\nstill one\n\n\n  two \n \nthree", "intervention": "x", "condition": "y"},
        )
        (doc,) = ingest_corpus(path)
        assert doc.paragraphs == ("one\nstill one", "two", "three")

    def test_label(self, tmp_path):
        path = _write(
            tmp_path,
            {"id": "d1", "title": "T", "text": "a", "intervention": "x", "condition": "y", "label": "potentially_effective"},
        )
        assert ingest_corpus(path)[0].label == "potentially_effective"

    def test_unknown_label_names_token_and_line(self, tmp_path):
        ok = {"id": "d1", "title": "T", "text": "a", "intervention": "x", "condition": "y"}
        path = _write(tmp_path, ok, dict(ok, id="d2"), dict(ok, id="d3", label="maybe"))
        with pytest.raises(CorpusError, match="unknown label 'maybe' at line 3"):
            ingest_corpus(path)

    def test_malformed_line(self, tmp_path):
        ok = {"id": "d1", "title": "T", "text": "a", "intervention": "x", "condition": "y"}
        path = _write(tmp_path, ok, "{not json")
        with pytest.raises(CorpusError, match="line 2"):
            ingest_corpus(path)

    def test_missing_field(self, tmp_path):
        path = _write(tmp_path, {"id": "d1", "title": "T", "text": "a", "intervention": "x"})
        with pytest.raises(CorpusError, match="condition"):
            ingest_corpus(path)

    def test_duplicate_id(self, tmp_path):
        ok = {"id": "d1", "title": "T", "text": "a", "intervention": "x", "condition": "y"}
        path = _write(tmp_path, ok, ok)
        with pytest.raises(CorpusError, match="duplicate document id 'd1'"):
            ingest_corpus(path)

    def test_blank_terms_rejected(self, tmp_path):
        path = _write(tmp_path, {"id": "d1", "title": "T", "text": "a", "intervention": "  ", "condition": "y"})
        with pytest.raises(CorpusError):
            ingest_corpus(path)

    def test_round_trip(self, tmp_path):
        rng = random.Random(5)
        docs = [random_document(rng, f"d{i}") for i in range(20)]
        docs[3] = Document("d3", "Title", docs[3].paragraphs, docs[3].ic, url="http://x", label="inconclusive")
        path = tmp_path / "out.jsonl"
        dump_corpus(docs, path)
        again = ingest_corpus(path)
        assert again == docs
        dump_corpus(again, tmp_path / "out2.jsonl")
        assert (tmp_path / "out2.jsonl").read_bytes() == path.read_bytes()


class TestSegmentation:
    def test_terminal_punctuation(self):
        assert [s.text for s in segment_sentences(_doc("It works. It is safe."))] == ["It works.", "It is safe."]

    def test_abbreviation(self):
        assert [s.text for s in segment_sentences(_doc("Dr. Smith agrees. End."))] == ["Dr. Smith agrees.", "End."]

    @pytest.mark.parametrize(
        "abbrev",
        ["Dr.", "Mr.", "Mrs.", "Prof.", "e.g.", "i.e.", "vs.", "etc.", "al.", "Fig.", "No.", "approx.", "cf."],
    )
    def test_abbreviation_oracle(self, abbrev):
        # hand-maintained list: none of these may end a sentence
        assert abbrev.lower() in ABBREVIATIONS
        text = f"Before {abbrev} After one. Done."
        assert [s.text for s in segment_sentences(_doc(text))] == [f"Before {abbrev} After one.", "Done."]

    def test_no_terminal_punctuation(self):
        assert [s.text for s in segment_sentences(_doc("no marker here"))] == ["no marker here"]

    def test_lowercase_continuation_does_not_split(self):
        assert len(segment_sentences(_doc("Blood pressure fell by 5 mm. in most patients."))) == 1

    def test_paragraph_boundary_ends_sentence(self):
        sents = segment_sentences(_doc("First part without stop", "Second"))
        assert [(s.text, s.paragraph_index, s.doc_index) for s in sents] == [
            ("First part without stop", 0, 0),
            ("Second", 1, 1),
        ]

    def test_empty_paragraph_yields_nothing(self):
        assert [s.text for s in segment_sentences(_doc("", "Only. This."))] == ["Only.", "This."]

    def test_question_and_quotes(self):
        text = 'Does it help? "Yes," he said. "It does." Then 2 trials failed!'
        assert [s.text for s in segment_sentences(_doc(text))] == [
            "Does it help?",
            '"Yes," he said.',
            '"It does."',
            "Then 2 trials failed!",
        ]

    @given(st.text(alphabet=st.sampled_from("ab .?!\n\tAB1\"')e.g"), max_size=80))
    def test_reconstruction_property(self, paragraph):
        spans = split_paragraph(paragraph)
        for s, e in spans:
            assert paragraph[s:e].strip() == paragraph[s:e] != ""
        if not paragraph.strip():
            assert spans == []
            return
        doc = _doc(paragraph)
        assert reconstruct_paragraph(paragraph, segment_sentences(doc)) == paragraph

    def test_reconstruction_random_documents(self):
        rng = random.Random(11)
        for i in range(100):
            doc = random_document(rng, str(i))
            sents = segment_sentences(doc)
            assert [s.doc_index for s in sents] == list(range(len(sents)))
            for p_idx, paragraph in enumerate(doc.paragraphs):
                own = [s for s in sents if s.paragraph_index == p_idx]
                assert reconstruct_paragraph(paragraph, own) == paragraph


class TestTokenize:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Roselle, for Hypertension!", ["roselle", "for", "hypertension"]),
            ("", []),
            ("130/86 mmHg", ["130", "86", "mmhg"]),
            ("Crohn's disease", ["crohn", "s", "disease"]),
            ("Ginkgo_biloba", ["ginkgo", "biloba"]),
            ("Café Ärzte", ["café", "ärzte"]),
        ],
    )
    def test_examples(self, text, expected):
        assert tokenize(text) == expected

    @given(st.text())
    def test_deterministic(self, text):
        assert tokenize(text) == tokenize(text)
        assert all(t == t.lower() and t.isalnum() for t in tokenize(text))


class TestRegroup:
    @pytest.mark.parametrize(
        "label,expected",
        [
            ("potentially_effective", "effective"),
            ("potentially_ineffective", "ineffective"),
            ("effective", "effective"),
            ("inconclusive", "inconclusive"),
            ("ineffective", "ineffective"),
            ("no_viewpoint", "no_viewpoint"),
        ],
    )
    def test_mapping(self, label, expected):
        assert regroup(label) == expected

    @pytest.mark.parametrize("label", LABELS)
    def test_idempotent(self, label):
        assert regroup(regroup(label)) == regroup(label)

    def test_unknown(self):
        with pytest.raises(ValueError):
            regroup("maybe")

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from securesearch.crypto import detokenize
from securesearch.extract import (Document, KeyFile, build_key_file, extract_keywords,
                                  load_stopwords, words)


def kw(text, max_keywords=20, stopwords=frozenset()):
    return dict(extract_keywords(Document.from_text(text), max_keywords, stopwords))


def test_hand_counted_frequency():
    assert kw("the cat sat. the cat ran.", 2, {"the"})["cat"] == 2


def test_only_stopwords():
    assert extract_keywords(Document.from_text("the of and the"), 5, {"the", "of", "and"}) == []


def test_phrase_and_components():
    out = extract_keywords(Document.from_text("armed robbery armed robbery"), 1)
    assert out == [("armed robbery", 2), ("armed", 2), ("robbery", 2)]


def test_phrases_do_not_cross_stopwords():
    got = kw("police report of the burglary", 10, {"of", "the"})
    assert "police report" in got
    assert not any("report burglary" in p for p in got)


def test_empty_document():
    doc = Document.from_text("")
    assert doc.length == 0 and extract_keywords(doc) == []


def test_bad_max():
    with pytest.raises(ValueError):
        extract_keywords(Document.from_text("x"), 0)


def test_bundled_stopwords():
    sw = load_stopwords()
    assert {"the", "of", "and"} <= sw and "robbery" not in sw


def test_doc_id_is_content_hash(tmp_path):
    a, b = Document.from_text("same text"), Document.from_text("same text")
    assert a.doc_id == b.doc_id and re.fullmatch(r"[0-9a-f]{16}", a.doc_id)
    (tmp_path / "f.txt").write_text("same text")
    assert Document.from_file(tmp_path / "f.txt").doc_id == a.doc_id


def test_key_file_structure(key):
    doc = Document.from_text("packet router packet latency router packet")
    kf = build_key_file(doc, key, 3)
    plain = extract_keywords(doc, 3)
    assert len(kf.entries) == len(plain)
    assert len({t for t, _ in kf.entries}) == len(kf.entries)
    assert [(detokenize(key, t), f) for t, f in kf.entries] == plain
    assert kf.doc_length == 6


def test_key_file_deterministic(key):
    doc = Document.from_text("burglary at the bank, burglary again")
    assert build_key_file(doc, key).to_json() == build_key_file(doc, key).to_json()


def test_key_file_wire_round_trip(key):
    kf = build_key_file(Document.from_text("tcp handshake tcp"), key)
    assert KeyFile.from_dict(kf.to_dict()) == kf
    assert set(kf.to_dict()) == {"doc_id", "doc_length", "entries"}


vocab = st.sampled_from("alpha beta gamma delta the of epsilon zeta".split())


@settings(max_examples=200, deadline=None)
@given(st.lists(vocab, max_size=60), st.integers(1, 8))
def test_frequencies_match_rescan(tokens, max_keywords):
    text = " ".join(tokens)
    sw = {"the", "of"}
    out = extract_keywords(Document.from_text(text), max_keywords, sw)
    seq = words(text)
    for term, freq in out:
        parts = term.split(" ")
        n = len(parts)
        assert freq == sum(seq[i:i + n] == parts for i in range(len(seq) - n + 1))
        assert not set(parts) & sw
    # phrases capped at max; each adds at most 3 component words
    assert len(out) <= 4 * max_keywords
    assert len({t for t, _ in out}) == len(out)
